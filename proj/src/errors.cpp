#include "shelljudge/errors.hpp"

namespace shelljudge {

const char* ec_name(Ec code) {
    switch (code) {
        case Ec::missing_manifest: return "missing_manifest";
        case Ec::malformed_manifest: return "malformed_manifest";
        case Ec::missing_problem: return "missing_problem";
        case Ec::missing_hidden_cases: return "missing_hidden_cases";
        case Ec::hint_gap: return "hint_gap";
        case Ec::malformed_pack: return "malformed_pack";
        case Ec::unknown_problem: return "unknown_problem";
        case Ec::no_public_cases: return "no_public_cases";
        case Ec::sandbox_failure: return "sandbox_failure";
        case Ec::log_write_failure: return "log_write_failure";
        case Ec::duplicate_contestant: return "duplicate_contestant";
        case Ec::not_registered: return "not_registered";
        case Ec::contest_not_running: return "contest_not_running";
        case Ec::contest_ended: return "contest_ended";
        case Ec::already_finished: return "already_finished";
        case Ec::no_more_hints: return "no_more_hints";
        case Ec::busy: return "busy";
        case Ec::workspace_write_failure: return "workspace_write_failure";
        case Ec::sequence_gap: return "sequence_gap";
        case Ec::pack_digest_mismatch: return "pack_digest_mismatch";
        case Ec::corrupt_log: return "corrupt_log";
        case Ec::auth: return "auth";
        case Ec::bad_request: return "bad_request";
        case Ec::unknown_op: return "unknown_op";
        case Ec::bind_failure: return "bind_failure";
        case Ec::internal: return "internal";
    }
    return "unknown";
}

} // namespace shelljudge
