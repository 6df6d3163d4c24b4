#include "shelljudge/sandbox.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include <fcntl.h>
#include <poll.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "shelljudge/errors.hpp"
#include "shelljudge/util.hpp"

namespace shelljudge {

namespace fs = std::filesystem;

namespace {

constexpr int64_t kSigkillDelayMs = 600; // SIGTERM -> SIGKILL escalation gap

const char* pick_interpreter() {
    if (::access("/bin/bash", X_OK) == 0) return "/bin/bash";
    return "/bin/sh";
}

bool jail_has_shell(const fs::path& jail) {
    return fs::exists(jail / "bin" / "bash") || fs::exists(jail / "bin" / "sh");
}

void ignore_sigpipe_once() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void set_nonblocking(int fd) {
    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
}

struct Pipe {
    int rd = -1, wr = -1;
    void open() {
        int fds[2];
        if (::pipe2(fds, O_CLOEXEC) != 0)
            throw ContestError(Ec::sandbox_failure, std::string("pipe2: ") + std::strerror(errno));
        rd = fds[0];
        wr = fds[1];
    }
    void close_rd() { if (rd >= 0) { ::close(rd); rd = -1; } }
    void close_wr() { if (wr >= 0) { ::close(wr); wr = -1; } }
    ~Pipe() { close_rd(); close_wr(); }
};

// Append up to `cap` bytes total into `sink`, discarding overflow so writers
// never block on a full pipe. Returns false on EOF.
bool drain_fd(int fd, std::string& sink, size_t cap, bool& overflowed) {
    char buf[16384];
    while (true) {
        ssize_t n = ::read(fd, buf, sizeof(buf));
        if (n > 0) {
            size_t room = cap > sink.size() ? cap - sink.size() : 0;
            size_t take = std::min(room, static_cast<size_t>(n));
            sink.append(buf, take);
            if (take < static_cast<size_t>(n)) overflowed = true;
            continue;
        }
        if (n == 0) return false;
        if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
        return false; // treat read errors as EOF
    }
}

} // namespace

Sandbox::Options Sandbox::options_from_env() {
    Options opt;
    if (const char* b = std::getenv("SHELLJUDGE_BACKEND")) {
        std::string s = b;
        if (s == "portable" || s == "strict") opt.backend = s;
    }
    if (const char* j = std::getenv("SHELLJUDGE_JAIL")) opt.jail_root = j;
    return opt;
}

Sandbox::Sandbox(Options opt) : opt_(std::move(opt)) {
    chroot_usable_ = opt_.backend == "strict" && ::geteuid() == 0 &&
                     !opt_.jail_root.empty() && jail_has_shell(opt_.jail_root);
}

IsolationReport Sandbox::capabilities() const {
    IsolationReport r;
    r.backend = opt_.backend;
    r.process_group_kill = true;
    r.rlimits = true;
    if (opt_.backend == "portable") {
        r.fs_scope = "scratch-dir";
        return r;
    }
    if (chroot_usable_) {
        r.fs_scope = "root-changed";
        return r;
    }
    r.fs_scope = "degraded";
    if (::geteuid() != 0)
        r.warnings.push_back("strict backend needs root for chroot; running with scratch-dir scope only");
    else if (opt_.jail_root.empty())
        r.warnings.push_back("strict backend has no jail root configured (SHELLJUDGE_JAIL); scratch-dir scope only");
    else
        r.warnings.push_back("jail root lacks bin/bash or bin/sh; scratch-dir scope only");
    return r;
}

ExecutionOutcome Sandbox::execute(const ExecutionSpec& spec) const {
    ignore_sigpipe_once();

    if (spec.time_limit_ms <= 0)
        throw ContestError(Ec::sandbox_failure, "time_limit must be positive");
    if (!fs::is_directory(spec.workdir))
        throw ContestError(Ec::sandbox_failure, "workdir missing: " + spec.workdir.string());

    fs::path script_host = spec.workdir / "script.sh";
    util::write_file(script_host, spec.script);
    ::chmod(script_host.c_str(), 0700);

    // Paths as the child will see them; differ from host paths only under chroot.
    std::string chroot_dir;
    fs::path workdir_child = fs::absolute(spec.workdir);
    if (chroot_usable_) {
        auto rel = fs::relative(workdir_child, opt_.jail_root);
        if (rel.empty() || rel.native().rfind("..", 0) == 0)
            throw ContestError(Ec::sandbox_failure,
                               "strict backend: workdir must live inside the jail root");
        chroot_dir = fs::absolute(opt_.jail_root).string();
        workdir_child = fs::path("/") / rel;
    }
    std::string script_child = (workdir_child / "script.sh").string();

    std::string interp = chroot_usable_
                             ? (fs::exists(opt_.jail_root / "bin/bash") ? "/bin/bash" : "/bin/sh")
                             : pick_interpreter();

    // argv/env buffers are assembled before fork; the child only calls
    // async-signal-safe functions.
    std::vector<std::string> argv_store;
    argv_store.push_back(interp);
    argv_store.push_back(script_child);
    for (const auto& a : spec.argv) argv_store.push_back(a);
    std::vector<char*> argv_c;
    for (auto& s : argv_store) argv_c.push_back(s.data());
    argv_c.push_back(nullptr);

    std::vector<std::string> env_store = {
        "PATH=/usr/local/sbin:/usr/local/bin:/usr/sbin:/usr/bin:/sbin:/bin",
        "HOME=" + workdir_child.string(),
        "LC_ALL=C",
    };
    std::vector<char*> env_c;
    for (auto& s : env_store) env_c.push_back(s.data());
    env_c.push_back(nullptr);

    std::string workdir_child_str = workdir_child.string();

    Pipe in, out, err, execerr;
    in.open();
    out.open();
    err.open();
    execerr.open();

    const rlim_t cpu_secs = static_cast<rlim_t>(spec.time_limit_ms / 1000 + 3);

    pid_t pid = ::fork();
    if (pid < 0)
        throw ContestError(Ec::sandbox_failure, std::string("fork: ") + std::strerror(errno));

    if (pid == 0) {
        ::setsid();
        struct rlimit rl;
        rl = {cpu_secs, cpu_secs + 2};
        ::setrlimit(RLIMIT_CPU, &rl);
        rl = {256u << 20, 256u << 20};
        ::setrlimit(RLIMIT_FSIZE, &rl);
        rl = {256, 256};
        ::setrlimit(RLIMIT_NPROC, &rl);
        rl = {0, 0};
        ::setrlimit(RLIMIT_CORE, &rl);

        if (!chroot_dir.empty() && ::chroot(chroot_dir.c_str()) != 0) {
            int e = errno;
            (void)!::write(execerr.wr, &e, sizeof(e));
            ::_exit(127);
        }
        if (::chdir(workdir_child_str.c_str()) != 0) {
            int e = errno;
            (void)!::write(execerr.wr, &e, sizeof(e));
            ::_exit(127);
        }
        ::dup2(in.rd, 0);
        ::dup2(out.wr, 1);
        ::dup2(err.wr, 2);
        ::execve(argv_c[0], argv_c.data(), env_c.data());
        int e = errno;
        (void)!::write(execerr.wr, &e, sizeof(e));
        ::_exit(127);
    }

    in.close_rd();
    out.close_wr();
    err.close_wr();
    execerr.close_wr();
    set_nonblocking(in.wr);
    set_nonblocking(out.rd);
    set_nonblocking(err.rd);

    const int64_t start = util::steady_ms();
    const int64_t term_at = start + spec.time_limit_ms;
    const int64_t hard_budget = start + spec.time_limit_ms + kGraceMs;

    ExecutionOutcome oc;
    oc.pgid = pid;
    size_t cap = static_cast<size_t>(spec.output_limit);
    size_t stdin_written = 0;
    bool stdin_done = spec.stdin_bytes.empty();
    if (stdin_done) in.close_wr();
    bool out_open = true, err_open = true;
    bool reaped = false;
    int wstatus = 0;
    bool timeout_kill = false;
    bool stdout_over = false; // script produced more stdout than the cap
    int64_t kill_at = -1;     // SIGKILL deadline once a SIGTERM was sent
    bool overflow_dummy = false;

    // Until setsid() has run in the child, killpg(pid) finds no group; the
    // direct kill fallback covers that window.
    auto signal_group = [&](int sig) {
        if (::killpg(pid, sig) != 0) ::kill(pid, sig);
    };
    auto send_term = [&] {
        signal_group(SIGTERM);
        kill_at = util::steady_ms() + kSigkillDelayMs;
    };

    while (!reaped) {
        int64_t now = util::steady_ms();

        pid_t w = ::waitpid(pid, &wstatus, WNOHANG);
        if (w == pid) {
            reaped = true;
            oc.wall_ms = util::steady_ms() - start;
            break;
        }

        if (out_open) out_open = drain_fd(out.rd, oc.stdout_bytes, cap, stdout_over);
        if (err_open) err_open = drain_fd(err.rd, oc.stderr_bytes, cap, overflow_dummy);
        if (stdout_over && kill_at < 0) send_term();

        now = util::steady_ms();
        if (now >= term_at && !timeout_kill && !stdout_over) {
            timeout_kill = true;
            send_term();
        }
        if (kill_at >= 0 && now >= kill_at) {
            signal_group(SIGKILL);
            kill_at = now + 100; // keep escalating until the group is gone
        }
        if (now >= hard_budget - 200 && kill_at < 0) {
            // last-resort guard so the return budget holds even if pipes stay open
            timeout_kill = true;
            send_term();
            signal_group(SIGKILL);
        }

        struct pollfd fds[3];
        nfds_t nfds = 0;
        if (!stdin_done) fds[nfds++] = {in.wr, POLLOUT, 0};
        if (out_open) fds[nfds++] = {out.rd, POLLIN, 0};
        if (err_open) fds[nfds++] = {err.rd, POLLIN, 0};

        int64_t next_deadline = term_at;
        if (kill_at >= 0) next_deadline = std::min(next_deadline, kill_at);
        int timeout = static_cast<int>(std::clamp<int64_t>(next_deadline - util::steady_ms(), 1, 50));
        if (nfds == 0) {
            ::usleep(static_cast<useconds_t>(timeout) * 1000);
        } else {
            ::poll(fds, nfds, timeout);
        }

        if (!stdin_done) {
            ssize_t n = ::write(in.wr, spec.stdin_bytes.data() + stdin_written,
                                spec.stdin_bytes.size() - stdin_written);
            if (n > 0) {
                stdin_written += static_cast<size_t>(n);
                if (stdin_written == spec.stdin_bytes.size()) {
                    stdin_done = true;
                    in.close_wr();
                }
            } else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) {
                stdin_done = true; // EPIPE: script closed stdin early
                in.close_wr();
            }
        }
    }

    // The direct child is gone; sweep the rest of its process group so
    // backgrounded descendants cannot outlive the run.
    for (int i = 0; i < 400; i++) {
        if (::killpg(pid, SIGKILL) != 0) break; // ESRCH: group empty
        if (util::steady_ms() >= hard_budget - 100) break;
        ::usleep(5000);
    }

    // Collect output the child flushed right before exiting.
    if (out_open) drain_fd(out.rd, oc.stdout_bytes, cap, stdout_over);
    if (err_open) drain_fd(err.rd, oc.stderr_bytes, cap, overflow_dummy);

    int exec_errno = 0;
    ssize_t got = ::read(execerr.rd, &exec_errno, sizeof(exec_errno));
    bool setup_failed = got == static_cast<ssize_t>(sizeof(exec_errno));

    if (!opt_.retain_workdirs) {
        std::error_code ec;
        fs::remove_all(spec.workdir, ec);
    }

    if (setup_failed)
        throw ContestError(Ec::sandbox_failure,
                           std::string("cannot start script: ") + std::strerror(exec_errno));

    oc.wall_ms = std::clamp<int64_t>(oc.wall_ms, 0, spec.time_limit_ms + kGraceMs);
    // Overflow classifies as OutputLimit even when the script exited before
    // the kill landed; classification stays deterministic for deterministic
    // output.
    if (stdout_over) {
        oc.killed = true;
        oc.reason = KillReason::OutputLimit;
    } else if (timeout_kill) {
        oc.killed = true;
        oc.reason = KillReason::Timeout;
        oc.wall_ms = std::max(oc.wall_ms, spec.time_limit_ms);
    } else if (WIFEXITED(wstatus)) {
        oc.exit_code = WEXITSTATUS(wstatus);
    } else if (WIFSIGNALED(wstatus)) {
        oc.exit_code = 128 + WTERMSIG(wstatus); // shell convention
    }
    return oc;
}

} // namespace shelljudge
