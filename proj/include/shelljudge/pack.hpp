#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace shelljudge {

enum class CompareMode { Exact, NewlineTolerant };

const char* compare_mode_name(CompareMode m);
std::optional<CompareMode> compare_mode_from_name(const std::string& s);

struct TestCase {
    std::string id;                 // filename stem, e.g. "01"
    std::vector<std::string> argv;  // raw arguments, may contain the {FILES} placeholder
    std::string stdin_bytes;
    std::string expected_stdout;
};

struct Hint {
    int index = 0; // 1-based, most important first
    std::string body;
};

struct Problem {
    std::string id;
    std::string title;
    std::string statement;
    std::vector<Hint> hints;
    std::vector<TestCase> public_cases;
    std::vector<TestCase> hidden_cases; // never empty in a loaded pack
    int64_t time_limit_ms = 5000;
    CompareMode compare = CompareMode::NewlineTolerant;
};

struct ContestConfig {
    std::string name;
    int64_t duration_min = 0;
    int64_t wrong_attempt_penalty_min = 10;
    int64_t hint_penalty_min = 15;
    int64_t output_limit = 1 << 20;
    bool count_unsolved_failures = false;
    std::vector<std::string> problem_order;
};

// Immutable after load; safe to share read-only across threads.
struct ContestPack {
    ContestConfig config;
    std::vector<Problem> problems; // in manifest order
    std::filesystem::path root;
    std::filesystem::path shared_files; // <root>/files, empty path when absent
    std::string digest;                 // sha256 over canonical pack content

    const Problem* find(const std::string& id) const;
    int index_of(const std::string& id) const; // -1 when unknown
};

// Directory layout (bit-exact):
//   contest.json
//   problems/<id>/statement.txt
//   problems/<id>/problem.json            (optional overrides)
//   problems/<id>/hints/<n>.txt
//   problems/<id>/public/NN.{args,stdin,out}
//   problems/<id>/hidden/NN.{args,stdin,out}
//   files/                                (shared read-only data)
// Throws ContestError with codes missing_manifest, malformed_manifest,
// missing_problem, missing_hidden_cases, hint_gap, malformed_pack.
ContestPack load_pack(const std::filesystem::path& dir);

struct ValidationFinding {
    std::string problem; // empty for pack-level findings
    std::string what;
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;
    bool ok() const { return findings.empty(); }
    std::string to_string() const;
};

// Structural warnings plus, when a reference solution is supplied for a
// problem, a hidden-case run of that script through the judge; any mismatch
// with the stored expected output becomes a finding. Execution failures
// become findings too, never exceptions.
ValidationReport validate_pack(const ContestPack& pack,
                               const std::map<std::string, std::string>& reference_solutions = {});

} // namespace shelljudge
