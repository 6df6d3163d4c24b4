#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "shelljudge/pack.hpp"

// Test fixtures and independent oracles. Everything here computes expected
// values without going through the judge/sandbox path it is used to verify.
namespace fixtures {

namespace fs = std::filesystem;

// --- mini pack: trivial echo problems for state-machine and service tests ---
//
// Problems p1..pN. Correct answer for pK is the line "pK-ok". Hidden case
// inputs and hint bodies carry HIDDEN_/HINT_BODY_ markers so confinement
// scans can detect any leak into a workspace.
fs::path write_mini_pack(const fs::path& dir, int problems = 3, int hidden_cases = 2,
                         int64_t duration_min = 120);
std::string mini_ok_script(const std::string& problem_id);
std::string mini_wrong_script();
std::string mini_slow_script(int64_t sleep_s); // correct for nothing, just slow

// --- failed-login analysis pack (threshold filter over a lastb-style log) ---
fs::path write_listing1_pack(const fs::path& dir);
std::string listing1_reference();
std::string listing1_wrong_ascending();

// Synthesizes a lastb-style log with exactly `count` failed-login lines per
// user, shuffled deterministically by `seed`.
std::string make_lastb_log(std::vector<std::pair<std::string, int>> counts, unsigned seed);

// Independent oracle: tally first fields, keep counts >= min_count, sort by
// count desc then user reverse-alphabetical, render "count user" lines.
std::string tally_expected(const std::string& log_text, int min_count);

// The public-case expected block for the shipped listing1 fixture.
extern const char* const kListing1PublicBlock;

// --- looping pack: passes the public case, loops forever on a hidden one ---
fs::path write_tle_pack(const fs::path& dir, int64_t time_limit_ms = 500);
std::string tle_loop_script(); // branches on stdin: "1" prints ok, else spins

// Directory for scratch state, rooted under the system temp dir.
fs::path fresh_dir(const std::string& tag);

} // namespace fixtures
