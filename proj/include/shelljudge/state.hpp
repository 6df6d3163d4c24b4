#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shelljudge/events.hpp"
#include "shelljudge/judge.hpp"
#include "shelljudge/pack.hpp"

namespace shelljudge {

struct ProblemProgress {
    int64_t failed_attempts = 0;
    int64_t hints_taken = 0;
    std::optional<int64_t> solved_at; // contest-relative seconds
    int64_t checks = 0;
};

struct ContestantState {
    std::string id;
    std::string token;
    size_t active_index = 0; // == number of solved problems, capped at total
    bool finished = false;
    std::vector<ProblemProgress> per_problem; // one per problem, in order
};

struct ProblemTally {
    int64_t correct = 0;
    int64_t failed = 0;
    int64_t hints = 0;
    int64_t checks = 0;
};

// Consistent copy of everything derived state readers need; scoring and
// analytics work from this alone.
struct ContestSnapshot {
    std::string contest_name;
    std::string pack_digest;
    int64_t duration_s = 0;
    int64_t now_s = 0;
    bool started = false;
    bool ended = false;
    std::vector<std::string> problem_order;
    std::map<std::string, ContestantState> contestants;
    std::vector<ProblemTally> tallies; // aligned with problem_order
    int64_t last_seq = 0;
};

struct RegistrationView {
    std::string contestant;
    std::string token;
    std::string active_problem;
    std::filesystem::path workspace; // empty when workspaces are disabled
};

struct SubmitView {
    Verdict aggregate = Verdict::JudgeError;
    int64_t attempt = 0; // failed attempts on the problem after this submission
    std::string problem;
    std::optional<std::string> unlocked; // next problem id on accept
    bool finished = false;
    int64_t solved_at = -1; // contest-relative seconds, -1 unless accepted
    int64_t penalty_seconds = 0;
};

struct CheckView {
    std::string problem; // the active problem the check ran against
    EvaluationResult result;
};

struct HintView {
    int index = 0;
    std::string body;
    std::string problem;
    int64_t hints_taken = 0;         // on this problem, after this request
    int64_t hint_penalty_min = 0;    // per-hint constant
    int64_t hints_total = 0;         // across all problems
};

struct StatusView {
    std::string contestant;
    bool finished = false;
    std::optional<std::string> active_problem;
    size_t active_index = 0;
    std::string active_title;
    std::string active_statement;
    int64_t failed_attempts_active = 0;
    int64_t hints_taken_active = 0;
    int64_t hints_available_active = 0;
    int64_t solved = 0;
    int64_t penalty_seconds = 0;
    int64_t elapsed_s = 0;
    int64_t duration_s = 0;
    bool ended = false;
};

// The contest state machine: one mutation at a time, totally ordered by event
// seq. Evaluations run outside the writer lock and re-enter to commit, so
// parallel submissions by different contestants judge concurrently.
class Contest {
  public:
    struct Options {
        std::filesystem::path event_log_file;      // empty: keep events in memory only
        std::filesystem::path workspace_root;      // empty: workspace sync disabled
        std::filesystem::path instructor_log_root; // empty: instructor logs disabled
        std::function<int64_t()> clock;            // contest-relative seconds; required
    };

    Contest(const ContestPack& pack, const Judge& judge, Options opt);

    // Emits ContestStarted. Must be called exactly once, before any other op.
    void start();

    RegistrationView register_contestant(const std::string& id);
    SubmitView submit(const std::string& id, const std::string& script);
    CheckView check(const std::string& id, const std::string& script);
    HintView request_hint(const std::string& id);
    StatusView status(const std::string& id) const;

    // Materializes one directory per unlocked problem with the statement and
    // public case files; never hidden cases, never un-requested hints.
    // Idempotent. Returns the paths written or refreshed.
    std::vector<std::filesystem::path> sync_workspace(const std::string& id);

    bool verify_token(const std::string& id, const std::string& token) const;

    // Emits ContestEnded when the contest started and has not ended yet.
    void end();
    bool clock_expired() const;

    ContestSnapshot snapshot() const;
    const ContestPack& pack() const { return *pack_; }
    std::vector<ContestEvent> events_copy() const; // in-memory tail, for tests

  private:
    const ContestPack* pack_;
    const Judge* judge_;
    Options opt_;
    std::unique_ptr<EventLog> log_;

    mutable std::mutex mu_;
    ContestSnapshot state_;
    std::set<std::string> busy_; // contestants with an in-flight evaluation
    std::vector<ContestEvent> mem_events_;

    int64_t now_rel() const;
    ContestEvent make_event(EventKind kind, int64_t at) const;
    int64_t commit(ContestEvent ev);                // assigns seq, appends, applies; returns seq
    void apply(const ContestEvent& ev);             // state transition per event
    void ensure_running(int64_t now) const;         // throws when not accepting ops
    const ContestantState& need_contestant(const std::string& id) const;
    std::vector<std::filesystem::path> sync_workspace_locked(const std::string& id);
};

// Rebuilds the derived state from an event list; never executes a sandbox.
// Throws ContestError(sequence_gap | pack_digest_mismatch).
ContestSnapshot replay(const std::vector<ContestEvent>& events, const ContestPack& pack);

} // namespace shelljudge
