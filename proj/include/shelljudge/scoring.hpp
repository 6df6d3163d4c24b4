#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shelljudge/state.hpp"

namespace shelljudge {

struct ProblemCell {
    std::string problem;
    bool solved = false;
    int64_t solved_at = 0; // contest-relative seconds, when solved
    int64_t attempts = 0;  // failed attempts (before the accept, when solved)
    int64_t hints = 0;
};

struct RankingRow {
    std::string contestant;
    int64_t solved = 0;
    int64_t penalty_seconds = 0; // exact; minutes rendering derives from this
    int64_t last_accept_s = 0;   // 0 when solved == 0
    std::vector<ProblemCell> cells;
};

// penalty = last_accept + 60 * (W * failed-on-solved + H * all hints), with
// failed attempts on never-solved problems added only when
// count_unsolved_failures is set.
int64_t penalty_seconds_for(const ContestantState& c, const ContestConfig& cfg);

// Rows sorted by solved desc, penalty asc, contestant id asc; a strict total
// order (ids are unique).
std::vector<RankingRow> score(const ContestSnapshot& state, const ContestConfig& cfg);

struct ProblemStatsRow {
    std::string problem;
    int64_t correct = 0;
    int64_t failed = 0;
    int64_t hints = 0;
    int64_t checks = 0;
    int64_t stopped_here = 0; // non-finished contestants whose active problem this is
};

std::vector<ProblemStatsRow> problem_stats(const ContestSnapshot& state);

// "65.0" style minutes with one decimal.
std::string format_penalty_minutes(int64_t penalty_seconds);

// Canonical plain-text ranking; `admin replay` prints exactly this.
std::string format_ranking(const std::vector<RankingRow>& rows);

} // namespace shelljudge
