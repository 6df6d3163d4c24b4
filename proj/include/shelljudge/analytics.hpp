#pragma once

#include <cstdint>
#include <filesystem>

#include "shelljudge/pack.hpp"
#include "shelljudge/state.hpp"

namespace shelljudge {

// CSV of final per-contestant results, rows ordered like the final ranking:
//   contestant,solved,penalty_minutes,last_accept_s,hints_total,failed_total
// Returns the data row count. The output file appears atomically; a corrupt
// log leaves nothing behind. Throws ContestError(corrupt_log | sequence_gap |
// pack_digest_mismatch).
int64_t export_results(const std::filesystem::path& log_path, const ContestPack& pack,
                       const std::filesystem::path& out_csv);

// CSV of per-problem indicators, rows in problem order:
//   problem,correct,failed,hints,checks,stopped_here
int64_t export_problem_stats(const std::filesystem::path& log_path, const ContestPack& pack,
                             const std::filesystem::path& out_csv);

// The same derivations over an already-replayed snapshot.
std::string results_csv(const ContestSnapshot& snap, const ContestConfig& cfg);
std::string problem_stats_csv(const ContestSnapshot& snap);

} // namespace shelljudge
