#include "shelljudge/analytics.hpp"

#include "shelljudge/events.hpp"
#include "shelljudge/scoring.hpp"
#include "shelljudge/util.hpp"

namespace shelljudge {

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string results_csv(const ContestSnapshot& snap, const ContestConfig& cfg) {
    std::string out = "contestant,solved,penalty_minutes,last_accept_s,hints_total,failed_total\n";
    for (const auto& row : score(snap, cfg)) {
        const ContestantState& c = snap.contestants.at(row.contestant);
        int64_t hints = 0, failed = 0;
        for (const auto& p : c.per_problem) {
            hints += p.hints_taken;
            failed += p.failed_attempts;
        }
        out += csv_field(row.contestant) + ',' + std::to_string(row.solved) + ',' +
               format_penalty_minutes(row.penalty_seconds) + ',' +
               std::to_string(row.last_accept_s) + ',' + std::to_string(hints) + ',' +
               std::to_string(failed) + '\n';
    }
    return out;
}

std::string problem_stats_csv(const ContestSnapshot& snap) {
    std::string out = "problem,correct,failed,hints,checks,stopped_here\n";
    for (const auto& r : problem_stats(snap)) {
        out += csv_field(r.problem) + ',' + std::to_string(r.correct) + ',' +
               std::to_string(r.failed) + ',' + std::to_string(r.hints) + ',' +
               std::to_string(r.checks) + ',' + std::to_string(r.stopped_here) + '\n';
    }
    return out;
}

int64_t export_results(const std::filesystem::path& log_path, const ContestPack& pack,
                       const std::filesystem::path& out_csv) {
    auto events = EventLog::read_file(log_path);
    ContestSnapshot snap = replay(events, pack);
    std::string csv = results_csv(snap, pack.config);
    util::write_file_atomic(out_csv, csv);
    return static_cast<int64_t>(snap.contestants.size());
}

int64_t export_problem_stats(const std::filesystem::path& log_path, const ContestPack& pack,
                             const std::filesystem::path& out_csv) {
    auto events = EventLog::read_file(log_path);
    ContestSnapshot snap = replay(events, pack);
    std::string csv = problem_stats_csv(snap);
    util::write_file_atomic(out_csv, csv);
    return static_cast<int64_t>(snap.problem_order.size());
}

} // namespace shelljudge
