#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shelljudge/pack.hpp"
#include "shelljudge/sandbox.hpp"

namespace shelljudge {

enum class Verdict {
    Accepted,
    WrongAnswer,
    TimeLimitExceeded,
    RuntimeError,
    OutputLimitExceeded,
    JudgeError,
};

const char* verdict_name(Verdict v);          // "Accepted", "WrongAnswer", ...
const char* verdict_display(Verdict v);       // "Accepted", "Wrong answer", ...
std::optional<Verdict> verdict_from_name(const std::string& s);

struct TestResult {
    std::string case_id;
    Verdict verdict = Verdict::JudgeError;
    int64_t wall_ms = 0;
    std::string produced_stdout; // instructor log only, never shown on submit
};

struct EvaluationResult {
    int64_t submission_seq = 0;
    std::vector<TestResult> per_test; // in case order
    Verdict aggregate = Verdict::JudgeError;
    int64_t judged_at = 0; // contest-relative seconds

    bool accepted() const { return aggregate == Verdict::Accepted; }
};

enum class CaseSet { Hidden, Public };

// Exact: byte equality. NewlineTolerant: equality after stripping exactly one
// trailing '\n' (if present) from each side. No CR normalization.
bool compare_output(const std::string& produced, const std::string& expected, CompareMode mode);

class Judge {
  public:
    Judge(const Sandbox& sandbox, std::filesystem::path scratch_root);

    // Runs every case in the set (no fail-fast); aggregate is the verdict of
    // the first failing case in case order, Accepted when none fail.
    // Throws ContestError(unknown_problem | no_public_cases).
    EvaluationResult evaluate(const ContestPack& pack, const std::string& problem_id,
                              const std::string& script, CaseSet set) const;

    const Sandbox& sandbox() const { return *sandbox_; }

  private:
    const Sandbox* sandbox_;
    std::filesystem::path scratch_root_;
};

// Appends nothing; writes logs/<contestant>/<problem>/<submission-seq>.log and
// a sibling .script with the submission verbatim. Returns the .log path.
// Throws ContestError(log_write_failure).
std::filesystem::path write_instructor_log(const EvaluationResult& result,
                                           const std::string& contestant,
                                           const std::string& problem,
                                           const std::string& script,
                                           const std::filesystem::path& log_root);

// Re-reads the aggregate verdict from an instructor log file.
std::optional<Verdict> parse_instructor_log_aggregate(const std::filesystem::path& log_file);

} // namespace shelljudge
