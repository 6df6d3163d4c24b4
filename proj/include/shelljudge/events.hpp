#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "shelljudge/judge.hpp"

namespace shelljudge {

enum class EventKind {
    ContestStarted,
    ContestantRegistered,
    SubmissionReceived,
    EvaluationCompleted,
    HintRequested,
    ProblemUnlocked,
    ContestEnded,
};

const char* event_kind_name(EventKind k);

struct TestVerdict {
    std::string case_id;
    Verdict verdict = Verdict::JudgeError;
    int64_t wall_ms = 0;
};

// One line of the append-only log. Which payload fields are meaningful
// depends on `kind`; the JSON form only carries the relevant ones.
struct ContestEvent {
    int64_t seq = 0; // dense from 1
    int64_t at = 0;  // contest-relative seconds
    EventKind kind = EventKind::ContestStarted;

    // ContestStarted
    std::string contest_name;
    std::string pack_digest;
    int64_t duration_s = 0;

    // contestant-scoped kinds
    std::string contestant;
    std::string token; // ContestantRegistered
    std::string problem;

    // SubmissionReceived / EvaluationCompleted
    bool check = false;
    int64_t script_size = 0;
    std::string script_sha256;
    int64_t submission_seq = 0; // EvaluationCompleted: seq of the SubmissionReceived
    int64_t submitted_at = 0;
    Verdict aggregate = Verdict::JudgeError;
    std::vector<TestVerdict> per_test;

    // HintRequested
    int hint_index = 0;

    nlohmann::json to_json() const;
    static ContestEvent from_json(const nlohmann::json& j); // throws ContestError(corrupt_log)
};

// Append-only JSONL file, fsynced on every append.
class EventLog {
  public:
    explicit EventLog(std::filesystem::path file); // creates; refuses an existing non-empty file
    ~EventLog();
    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;

    void append(const ContestEvent& ev);
    const std::filesystem::path& path() const { return file_; }

    static std::vector<ContestEvent> read_file(const std::filesystem::path& file);

  private:
    std::filesystem::path file_;
    int fd_ = -1;
};

} // namespace shelljudge
