#include "shelljudge/events.hpp"

#include <cerrno>
#include <cstring>

#include <fcntl.h>
#include <unistd.h>

#include "shelljudge/errors.hpp"
#include "shelljudge/util.hpp"

namespace shelljudge {

using nlohmann::json;

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::ContestStarted: return "ContestStarted";
        case EventKind::ContestantRegistered: return "ContestantRegistered";
        case EventKind::SubmissionReceived: return "SubmissionReceived";
        case EventKind::EvaluationCompleted: return "EvaluationCompleted";
        case EventKind::HintRequested: return "HintRequested";
        case EventKind::ProblemUnlocked: return "ProblemUnlocked";
        case EventKind::ContestEnded: return "ContestEnded";
    }
    return "ContestStarted";
}

static std::optional<EventKind> event_kind_from_name(const std::string& s) {
    for (EventKind k : {EventKind::ContestStarted, EventKind::ContestantRegistered,
                        EventKind::SubmissionReceived, EventKind::EvaluationCompleted,
                        EventKind::HintRequested, EventKind::ProblemUnlocked,
                        EventKind::ContestEnded})
        if (s == event_kind_name(k)) return k;
    return std::nullopt;
}

json ContestEvent::to_json() const {
    json j{{"seq", seq}, {"at", at}, {"kind", event_kind_name(kind)}};
    switch (kind) {
        case EventKind::ContestStarted:
            j["name"] = contest_name;
            j["pack_digest"] = pack_digest;
            j["duration_s"] = duration_s;
            break;
        case EventKind::ContestantRegistered:
            j["contestant"] = contestant;
            j["token"] = token;
            break;
        case EventKind::SubmissionReceived:
            j["contestant"] = contestant;
            j["problem"] = problem;
            j["check"] = check;
            j["script_size"] = script_size;
            j["script_sha256"] = script_sha256;
            break;
        case EventKind::EvaluationCompleted: {
            j["contestant"] = contestant;
            j["problem"] = problem;
            j["check"] = check;
            j["submission_seq"] = submission_seq;
            j["submitted_at"] = submitted_at;
            j["aggregate"] = verdict_name(aggregate);
            json cases = json::array();
            for (const auto& tv : per_test)
                cases.push_back(json{{"case", tv.case_id},
                                     {"verdict", verdict_name(tv.verdict)},
                                     {"wall_ms", tv.wall_ms}});
            j["per_test"] = std::move(cases);
            break;
        }
        case EventKind::HintRequested:
            j["contestant"] = contestant;
            j["problem"] = problem;
            j["index"] = hint_index;
            break;
        case EventKind::ProblemUnlocked:
            j["contestant"] = contestant;
            j["problem"] = problem;
            break;
        case EventKind::ContestEnded:
            break;
    }
    return j;
}

ContestEvent ContestEvent::from_json(const json& j) {
    try {
        ContestEvent ev;
        ev.seq = j.at("seq").get<int64_t>();
        ev.at = j.at("at").get<int64_t>();
        auto kind = event_kind_from_name(j.at("kind").get<std::string>());
        if (!kind) throw ContestError(Ec::corrupt_log, "unknown event kind");
        ev.kind = *kind;
        switch (ev.kind) {
            case EventKind::ContestStarted:
                ev.contest_name = j.at("name").get<std::string>();
                ev.pack_digest = j.at("pack_digest").get<std::string>();
                ev.duration_s = j.at("duration_s").get<int64_t>();
                break;
            case EventKind::ContestantRegistered:
                ev.contestant = j.at("contestant").get<std::string>();
                ev.token = j.at("token").get<std::string>();
                break;
            case EventKind::SubmissionReceived:
                ev.contestant = j.at("contestant").get<std::string>();
                ev.problem = j.at("problem").get<std::string>();
                ev.check = j.at("check").get<bool>();
                ev.script_size = j.value("script_size", int64_t{0});
                ev.script_sha256 = j.value("script_sha256", std::string());
                break;
            case EventKind::EvaluationCompleted: {
                ev.contestant = j.at("contestant").get<std::string>();
                ev.problem = j.at("problem").get<std::string>();
                ev.check = j.at("check").get<bool>();
                ev.submission_seq = j.at("submission_seq").get<int64_t>();
                ev.submitted_at = j.at("submitted_at").get<int64_t>();
                auto agg = verdict_from_name(j.at("aggregate").get<std::string>());
                if (!agg) throw ContestError(Ec::corrupt_log, "unknown verdict");
                ev.aggregate = *agg;
                for (const auto& c : j.at("per_test")) {
                    TestVerdict tv;
                    tv.case_id = c.at("case").get<std::string>();
                    auto v = verdict_from_name(c.at("verdict").get<std::string>());
                    if (!v) throw ContestError(Ec::corrupt_log, "unknown verdict");
                    tv.verdict = *v;
                    tv.wall_ms = c.at("wall_ms").get<int64_t>();
                    ev.per_test.push_back(std::move(tv));
                }
                break;
            }
            case EventKind::HintRequested:
                ev.contestant = j.at("contestant").get<std::string>();
                ev.problem = j.at("problem").get<std::string>();
                ev.hint_index = j.at("index").get<int>();
                break;
            case EventKind::ProblemUnlocked:
                ev.contestant = j.at("contestant").get<std::string>();
                ev.problem = j.at("problem").get<std::string>();
                break;
            case EventKind::ContestEnded:
                break;
        }
        return ev;
    } catch (const json::exception& e) {
        throw ContestError(Ec::corrupt_log, e.what());
    }
}

EventLog::EventLog(std::filesystem::path file) : file_(std::move(file)) {
    std::error_code ec;
    if (std::filesystem::exists(file_, ec) && std::filesystem::file_size(file_, ec) > 0)
        throw ContestError(Ec::internal,
                           "event log already exists (move it aside first): " + file_.string());
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    fd_ = ::open(file_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd_ < 0)
        throw ContestError(Ec::internal,
                           "cannot open event log " + file_.string() + ": " + std::strerror(errno));
}

EventLog::~EventLog() {
    if (fd_ >= 0) ::close(fd_);
}

void EventLog::append(const ContestEvent& ev) {
    std::string line = ev.to_json().dump();
    line += '\n';
    size_t off = 0;
    while (off < line.size()) {
        ssize_t n = ::write(fd_, line.data() + off, line.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ContestError(Ec::internal,
                               std::string("event log write failed: ") + std::strerror(errno));
        }
        off += static_cast<size_t>(n);
    }
    ::fsync(fd_);
}

std::vector<ContestEvent> EventLog::read_file(const std::filesystem::path& file) {
    std::string text = util::read_file(file);
    std::vector<ContestEvent> events;
    int64_t lineno = 0;
    for (const auto& line : util::split_lines(text)) {
        lineno++;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ContestError(Ec::corrupt_log,
                               "line " + std::to_string(lineno) + ": " + e.what());
        }
        events.push_back(ContestEvent::from_json(j));
    }
    return events;
}

} // namespace shelljudge
