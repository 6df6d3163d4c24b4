#pragma once

#include <stdexcept>
#include <string>

namespace shelljudge {

// One error code space for the whole daemon; codes double as wire error ids.
enum class Ec {
    // pack loading
    missing_manifest,
    malformed_manifest,
    missing_problem,
    missing_hidden_cases,
    hint_gap,
    malformed_pack,
    // judging
    unknown_problem,
    no_public_cases,
    sandbox_failure,
    log_write_failure,
    // contest state
    duplicate_contestant,
    not_registered,
    contest_not_running,
    contest_ended,
    already_finished,
    no_more_hints,
    busy,
    workspace_write_failure,
    // replay / analytics
    sequence_gap,
    pack_digest_mismatch,
    corrupt_log,
    // service
    auth,
    bad_request,
    unknown_op,
    bind_failure,
    internal,
};

const char* ec_name(Ec code);

struct ContestError : std::runtime_error {
    Ec code;
    ContestError(Ec c, const std::string& msg)
        : std::runtime_error(std::string(ec_name(c)) + ": " + msg), code(c) {}
};

} // namespace shelljudge
