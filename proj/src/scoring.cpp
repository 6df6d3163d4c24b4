#include "shelljudge/scoring.hpp"

#include <algorithm>
#include <cstdio>

namespace shelljudge {

int64_t penalty_seconds_for(const ContestantState& c, const ContestConfig& cfg) {
    int64_t last_accept = 0;
    int64_t failed_counted = 0;
    int64_t hints = 0;
    for (const auto& p : c.per_problem) {
        hints += p.hints_taken;
        if (p.solved_at) {
            last_accept = std::max(last_accept, *p.solved_at);
            failed_counted += p.failed_attempts;
        } else if (cfg.count_unsolved_failures) {
            failed_counted += p.failed_attempts;
        }
    }
    return last_accept + 60 * (cfg.wrong_attempt_penalty_min * failed_counted +
                               cfg.hint_penalty_min * hints);
}

std::vector<RankingRow> score(const ContestSnapshot& state, const ContestConfig& cfg) {
    std::vector<RankingRow> rows;
    rows.reserve(state.contestants.size());
    for (const auto& [id, c] : state.contestants) {
        RankingRow row;
        row.contestant = id;
        for (size_t i = 0; i < state.problem_order.size(); i++) {
            ProblemProgress p = i < c.per_problem.size() ? c.per_problem[i] : ProblemProgress{};
            ProblemCell cell;
            cell.problem = state.problem_order[i];
            cell.attempts = p.failed_attempts;
            cell.hints = p.hints_taken;
            if (p.solved_at) {
                cell.solved = true;
                cell.solved_at = *p.solved_at;
                row.solved++;
                row.last_accept_s = std::max(row.last_accept_s, *p.solved_at);
            }
            row.cells.push_back(std::move(cell));
        }
        row.penalty_seconds = penalty_seconds_for(c, cfg);
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(), [](const RankingRow& a, const RankingRow& b) {
        if (a.solved != b.solved) return a.solved > b.solved;
        if (a.penalty_seconds != b.penalty_seconds) return a.penalty_seconds < b.penalty_seconds;
        return a.contestant < b.contestant;
    });
    return rows;
}

std::vector<ProblemStatsRow> problem_stats(const ContestSnapshot& state) {
    std::vector<ProblemStatsRow> rows;
    for (size_t i = 0; i < state.problem_order.size(); i++) {
        ProblemStatsRow r;
        r.problem = state.problem_order[i];
        if (i < state.tallies.size()) {
            r.correct = state.tallies[i].correct;
            r.failed = state.tallies[i].failed;
            r.hints = state.tallies[i].hints;
            r.checks = state.tallies[i].checks;
        }
        rows.push_back(std::move(r));
    }
    for (const auto& [id, c] : state.contestants) {
        if (c.finished) continue;
        if (c.active_index < rows.size()) rows[c.active_index].stopped_here++;
    }
    return rows;
}

std::string format_penalty_minutes(int64_t penalty_seconds) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", static_cast<double>(penalty_seconds) / 60.0);
    return buf;
}

std::string format_ranking(const std::vector<RankingRow>& rows) {
    std::string out = "rank contestant solved penalty\n";
    for (size_t i = 0; i < rows.size(); i++) {
        out += std::to_string(i + 1);
        out += ' ';
        out += rows[i].contestant;
        out += ' ';
        out += std::to_string(rows[i].solved);
        out += ' ';
        out += format_penalty_minutes(rows[i].penalty_seconds);
        out += '\n';
    }
    return out;
}

} // namespace shelljudge
