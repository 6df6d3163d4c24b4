#include <doctest.h>

#include <csignal>
#include <filesystem>

#include "fixtures.hpp"
#include "shelljudge/errors.hpp"
#include "shelljudge/sandbox.hpp"
#include "shelljudge/util.hpp"

using namespace shelljudge;
namespace fs = std::filesystem;

namespace {

ExecutionSpec spec_for(const std::string& script, const fs::path& workdir) {
    ExecutionSpec spec;
    spec.script = script;
    spec.time_limit_ms = 5000;
    spec.output_limit = 1 << 20;
    spec.workdir = workdir;
    return spec;
}

} // namespace

TEST_SUITE("sandbox") {

TEST_CASE("echo exits cleanly with its output captured") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto oc = sandbox.execute(spec_for("echo hi\n", wd.path()));
    CHECK(oc.exited());
    CHECK(oc.exit_code == 0);
    CHECK(oc.stdout_bytes == "hi\n");
    CHECK(oc.wall_ms < 5000);
}

TEST_CASE("exit status is reported") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto oc = sandbox.execute(spec_for("exit 3\n", wd.path()));
    CHECK(oc.exited());
    CHECK(oc.exit_code == 3);
    CHECK(oc.stdout_bytes.empty());
}

TEST_CASE("infinite loop is killed inside the grace window") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto spec = spec_for("while true; do :; done\n", wd.path());
    spec.time_limit_ms = 500;
    int64_t before = util::steady_ms();
    auto oc = sandbox.execute(spec);
    int64_t elapsed = util::steady_ms() - before;
    CHECK(oc.killed);
    CHECK(oc.reason == KillReason::Timeout);
    CHECK(oc.wall_ms >= 500);
    CHECK(oc.wall_ms <= 2500);
    CHECK(elapsed <= 2500);
}

TEST_CASE("unbounded stdout is cut at the output limit") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto spec = spec_for("yes\n", wd.path());
    spec.output_limit = 1024;
    auto oc = sandbox.execute(spec);
    CHECK(oc.killed);
    CHECK(oc.reason == KillReason::OutputLimit);
    CHECK(oc.stdout_bytes.size() == 1024);
}

TEST_CASE("finite overflow classifies as OutputLimit deterministically") {
    Sandbox sandbox{Sandbox::Options{}};
    for (int i = 0; i < 3; i++) {
        util::TempDir wd(fs::temp_directory_path(), "sbx-");
        auto spec = spec_for("printf 'x%.0s' {1..5000}\n", wd.path());
        spec.output_limit = 1024;
        auto oc = sandbox.execute(spec);
        CHECK(oc.killed);
        CHECK(oc.reason == KillReason::OutputLimit);
        CHECK(oc.stdout_bytes.size() == 1024);
    }
}

TEST_CASE("stdin streams through, binary-safe") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto spec = spec_for("cat\n", wd.path());
    spec.stdin_bytes = std::string("a\0b\xff\ntail", 9);
    auto oc = sandbox.execute(spec);
    CHECK(oc.exited());
    CHECK(oc.stdout_bytes == spec.stdin_bytes);
}

TEST_CASE("large stdin does not deadlock") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto spec = spec_for("cat\n", wd.path());
    spec.stdin_bytes = std::string(512 * 1024, 'z');
    auto oc = sandbox.execute(spec);
    CHECK(oc.exited());
    CHECK(oc.stdout_bytes.size() == spec.stdin_bytes.size());
}

TEST_CASE("script that ignores stdin still terminates") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto spec = spec_for("echo done\n", wd.path());
    spec.stdin_bytes = std::string(512 * 1024, 'q'); // bigger than the pipe buffer
    auto oc = sandbox.execute(spec);
    CHECK(oc.exited());
    CHECK(oc.stdout_bytes == "done\n");
}

TEST_CASE("argv reaches the script verbatim, spaces included") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto spec = spec_for("printf '%s|' \"$@\"\n", wd.path());
    spec.argv = {"one", "two words", "-n"};
    auto oc = sandbox.execute(spec);
    CHECK(oc.stdout_bytes == "one|two words|-n|");
}

TEST_CASE("environment is fixed and minimal") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto spec = spec_for("echo \"$HOME\"; echo \"$LC_ALL\"; echo \"${SECRET_FROM_PARENT:-unset}\"\n",
                         wd.path());
    ::setenv("SECRET_FROM_PARENT", "leak", 1);
    auto oc = sandbox.execute(spec);
    ::unsetenv("SECRET_FROM_PARENT");
    auto lines = util::split_lines(oc.stdout_bytes);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == fs::absolute(wd.path()).string());
    CHECK(lines[1] == "C");
    CHECK(lines[2] == "unset");
}

TEST_CASE("workdir is removed afterwards unless retention is on") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    fs::path kept = wd.path();
    wd.release();
    sandbox.execute(spec_for("touch artifact.txt\n", kept));
    CHECK_FALSE(fs::exists(kept));

    Sandbox retaining{Sandbox::Options{.backend = "portable", .jail_root = {},
                                       .retain_workdirs = true}};
    util::TempDir wd2(fs::temp_directory_path(), "sbx-");
    retaining.execute(spec_for("echo x > artifact.txt\n", wd2.path()));
    CHECK(fs::exists(wd2.path() / "artifact.txt"));
}

TEST_CASE("scratch state never leaks between executions") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd1(fs::temp_directory_path(), "sbx-");
    sandbox.execute(spec_for("echo secret > marker.txt\n", wd1.path()));
    util::TempDir wd2(fs::temp_directory_path(), "sbx-");
    auto oc = sandbox.execute(spec_for("ls\n", wd2.path()));
    CHECK(oc.stdout_bytes == "script.sh\n"); // only its own script is visible
}

TEST_CASE("background children do not stall the run and die with it") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto spec = spec_for("sleep 30 & echo done\n", wd.path());
    int64_t before = util::steady_ms();
    auto oc = sandbox.execute(spec);
    int64_t elapsed = util::steady_ms() - before;
    CHECK(oc.exited());
    CHECK(oc.stdout_bytes == "done\n");
    CHECK(elapsed < 3000); // did not wait for the orphan sleep
    CHECK(::kill(static_cast<pid_t>(-oc.pgid), 0) == -1); // group fully swept
}

TEST_CASE("missing workdir is a setup failure") {
    Sandbox sandbox{Sandbox::Options{}};
    ExecutionSpec spec = spec_for("echo hi\n", "/nonexistent/workdir/path");
    CHECK_THROWS_AS(sandbox.execute(spec), ContestError);
}

TEST_CASE("stderr is captured separately and never merged") {
    Sandbox sandbox{Sandbox::Options{}};
    util::TempDir wd(fs::temp_directory_path(), "sbx-");
    auto oc = sandbox.execute(spec_for("echo out; echo err >&2\n", wd.path()));
    CHECK(oc.stdout_bytes == "out\n");
    CHECK(oc.stderr_bytes == "err\n");
}

TEST_CASE("portable backend declares its capabilities") {
    Sandbox sandbox{Sandbox::Options{}};
    auto report = sandbox.capabilities();
    CHECK(report.backend == "portable");
    CHECK(report.process_group_kill);
    CHECK(report.rlimits);
    CHECK(report.fs_scope == "scratch-dir");
    CHECK(report.warnings.empty());
}

TEST_CASE("strict backend degrades honestly when it cannot chroot") {
    Sandbox no_jail{Sandbox::Options{.backend = "strict", .jail_root = {},
                                     .retain_workdirs = false}};
    auto report = no_jail.capabilities();
    CHECK(report.backend == "strict");
    CHECK(report.fs_scope == "degraded");
    REQUIRE_FALSE(report.warnings.empty());

    // a jail that lacks a shell is just as unusable
    util::TempDir empty_jail(fs::temp_directory_path(), "jail-");
    Sandbox bad_jail{Sandbox::Options{.backend = "strict", .jail_root = empty_jail.path(),
                                      .retain_workdirs = false}};
    CHECK(bad_jail.capabilities().fs_scope == "degraded");
}

TEST_CASE("strict backend reports root-changed when a jail is usable") {
    if (::geteuid() != 0) return; // requires root, like the real deployment
    util::TempDir jail(fs::temp_directory_path(), "jail-");
    fs::create_directories(jail.path() / "bin");
    util::write_file(jail.path() / "bin/sh", "#!/bin/sh\n");
    Sandbox strict{Sandbox::Options{.backend = "strict", .jail_root = jail.path(),
                                    .retain_workdirs = false}};
    CHECK(strict.capabilities().fs_scope == "root-changed");
    CHECK(strict.capabilities().warnings.empty());
}

TEST_CASE("backend selection follows SHELLJUDGE_BACKEND") {
    ::setenv("SHELLJUDGE_BACKEND", "strict", 1);
    CHECK(Sandbox::options_from_env().backend == "strict");
    ::setenv("SHELLJUDGE_BACKEND", "portable", 1);
    CHECK(Sandbox::options_from_env().backend == "portable");
    ::setenv("SHELLJUDGE_BACKEND", "bogus", 1);
    CHECK(Sandbox::options_from_env().backend == "portable"); // unknown -> default
    ::unsetenv("SHELLJUDGE_BACKEND");
}

} // TEST_SUITE
