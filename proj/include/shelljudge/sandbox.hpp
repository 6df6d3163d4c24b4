#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace shelljudge {

// SIGTERM at the time limit, SIGKILL escalation after; execute() always
// returns within time_limit + kGraceMs.
inline constexpr int64_t kGraceMs = 2000;

struct ExecutionSpec {
    std::string script;
    std::vector<std::string> argv;
    std::string stdin_bytes;
    int64_t time_limit_ms = 5000;
    int64_t output_limit = 1 << 20;
    std::filesystem::path workdir;      // fresh, empty, private to this execution
    std::filesystem::path shared_files; // optional read-only data path
};

enum class KillReason { Timeout, OutputLimit };

struct ExecutionOutcome {
    bool killed = false;
    KillReason reason = KillReason::Timeout;
    int exit_code = 0;         // meaningful when !killed
    std::string stdout_bytes;  // truncated at output_limit
    std::string stderr_bytes;  // truncated at output_limit
    int64_t wall_ms = 0;
    int64_t pgid = 0; // process group of the run, for diagnostics

    bool exited() const { return !killed; }
};

struct IsolationReport {
    std::string backend;
    bool process_group_kill = false;
    std::string fs_scope; // "scratch-dir" | "root-changed" | "degraded"
    bool rlimits = false;
    std::vector<std::string> warnings;
};

// Executes one untrusted script per call. Reentrant: parallel calls are fine
// as long as each spec owns a private workdir.
class Sandbox {
  public:
    struct Options {
        std::string backend = "portable"; // "portable" | "strict"
        std::filesystem::path jail_root;  // strict only: chroot target prepared by the operator
        bool retain_workdirs = false;     // keep scratch contents for instructor inspection
    };

    Sandbox() : Sandbox(options_from_env()) {}
    explicit Sandbox(Options opt);

    // Reads SHELLJUDGE_BACKEND and SHELLJUDGE_JAIL.
    static Options options_from_env();

    // Throws ContestError(sandbox_failure) when the run cannot be set up;
    // script behavior itself never throws.
    ExecutionOutcome execute(const ExecutionSpec& spec) const;

    IsolationReport capabilities() const;

    const Options& options() const { return opt_; }

  private:
    Options opt_;
    bool chroot_usable_ = false;
};

} // namespace shelljudge
