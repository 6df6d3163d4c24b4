#include "shelljudge/state.hpp"

#include <algorithm>
#include <cstdio>

#include "shelljudge/errors.hpp"
#include "shelljudge/scoring.hpp"
#include "shelljudge/util.hpp"

namespace shelljudge {

namespace fs = std::filesystem;

namespace {

int problem_index(const ContestSnapshot& s, const std::string& id) {
    for (size_t i = 0; i < s.problem_order.size(); i++)
        if (s.problem_order[i] == id) return (int)i;
    return -1;
}

// The single transition function: live commits and replay both go through it,
// so a replayed log reproduces the live state by construction.
void apply_event(ContestSnapshot& s, const ContestEvent& ev) {
    switch (ev.kind) {
        case EventKind::ContestStarted:
            s.started = true;
            s.contest_name = ev.contest_name;
            s.pack_digest = ev.pack_digest;
            s.duration_s = ev.duration_s;
            break;
        case EventKind::ContestantRegistered: {
            ContestantState c;
            c.id = ev.contestant;
            c.token = ev.token;
            c.per_problem.resize(s.problem_order.size());
            s.contestants.emplace(ev.contestant, std::move(c));
            break;
        }
        case EventKind::SubmissionReceived:
            break; // counters move on EvaluationCompleted
        case EventKind::EvaluationCompleted: {
            auto it = s.contestants.find(ev.contestant);
            int pi = problem_index(s, ev.problem);
            if (it == s.contestants.end() || pi < 0)
                throw ContestError(Ec::corrupt_log, "evaluation for unknown contestant/problem");
            ContestantState& c = it->second;
            ProblemProgress& prog = c.per_problem[pi];
            ProblemTally& tally = s.tallies[pi];
            if (ev.check) {
                prog.checks++;
                tally.checks++;
            } else if (ev.aggregate == Verdict::Accepted) {
                if (!prog.solved_at) {
                    prog.solved_at = ev.submitted_at;
                    if (c.active_index == (size_t)pi) {
                        c.active_index++;
                        if (c.active_index == s.problem_order.size()) c.finished = true;
                    }
                }
                tally.correct++;
            } else {
                prog.failed_attempts++;
                tally.failed++;
            }
            break;
        }
        case EventKind::HintRequested: {
            auto it = s.contestants.find(ev.contestant);
            int pi = problem_index(s, ev.problem);
            if (it == s.contestants.end() || pi < 0)
                throw ContestError(Ec::corrupt_log, "hint for unknown contestant/problem");
            it->second.per_problem[pi].hints_taken++;
            s.tallies[pi].hints++;
            break;
        }
        case EventKind::ProblemUnlocked:
            break; // informational; unlock state derives from accepts
        case EventKind::ContestEnded:
            s.ended = true;
            break;
    }
    s.now_s = std::max(s.now_s, ev.at);
    s.last_seq = ev.seq;
}

} // namespace

Contest::Contest(const ContestPack& pack, const Judge& judge, Options opt)
    : pack_(&pack), judge_(&judge), opt_(std::move(opt)) {
    if (!opt_.clock) throw ContestError(Ec::internal, "contest clock is required");
    state_.problem_order = pack.config.problem_order;
    state_.tallies.resize(pack.problems.size());
    state_.contest_name = pack.config.name;
    state_.pack_digest = pack.digest;
    state_.duration_s = pack.config.duration_min * 60;
    if (!opt_.event_log_file.empty()) log_ = std::make_unique<EventLog>(opt_.event_log_file);
}

int64_t Contest::now_rel() const {
    return std::max(opt_.clock(), state_.now_s); // monotone even if the source jumps back
}

ContestEvent Contest::make_event(EventKind kind, int64_t at) const {
    ContestEvent ev;
    ev.kind = kind;
    ev.at = at;
    return ev;
}

int64_t Contest::commit(ContestEvent ev) {
    ev.seq = state_.last_seq + 1;
    if (log_) log_->append(ev);
    apply_event(state_, ev);
    int64_t seq = ev.seq;
    mem_events_.push_back(std::move(ev));
    return seq;
}

void Contest::ensure_running(int64_t now) const {
    if (!state_.started) throw ContestError(Ec::contest_not_running, "contest has not started");
    if (state_.ended) throw ContestError(Ec::contest_ended, "contest is over");
    if (now >= state_.duration_s) throw ContestError(Ec::contest_ended, "contest time is up");
}

const ContestantState& Contest::need_contestant(const std::string& id) const {
    auto it = state_.contestants.find(id);
    if (it == state_.contestants.end()) throw ContestError(Ec::not_registered, id);
    return it->second;
}

void Contest::start() {
    std::lock_guard lock(mu_);
    if (state_.started) throw ContestError(Ec::internal, "contest already started");
    ContestEvent ev = make_event(EventKind::ContestStarted, now_rel());
    ev.contest_name = pack_->config.name;
    ev.pack_digest = pack_->digest;
    ev.duration_s = pack_->config.duration_min * 60;
    commit(ev);
}

RegistrationView Contest::register_contestant(const std::string& id) {
    std::lock_guard lock(mu_);
    int64_t now = now_rel();
    ensure_running(now);
    if (id.empty()) throw ContestError(Ec::bad_request, "empty contestant id");
    if (state_.contestants.count(id)) throw ContestError(Ec::duplicate_contestant, id);

    ContestEvent reg = make_event(EventKind::ContestantRegistered, now);
    reg.contestant = id;
    reg.token = util::random_token();
    commit(reg);

    ContestEvent unlock = make_event(EventKind::ProblemUnlocked, now);
    unlock.contestant = id;
    unlock.problem = state_.problem_order.front();
    commit(unlock);

    RegistrationView view;
    view.contestant = id;
    view.token = reg.token;
    view.active_problem = unlock.problem;
    if (!opt_.workspace_root.empty()) {
        sync_workspace_locked(id);
        view.workspace = opt_.workspace_root / id;
    }
    return view;
}

bool Contest::verify_token(const std::string& id, const std::string& token) const {
    std::lock_guard lock(mu_);
    auto it = state_.contestants.find(id);
    return it != state_.contestants.end() && !token.empty() && it->second.token == token;
}

SubmitView Contest::submit(const std::string& id, const std::string& script) {
    std::string problem;
    int64_t submitted_at = 0;
    int64_t sub_seq = 0;

    {
        std::lock_guard lock(mu_);
        int64_t now = now_rel();
        ensure_running(now);
        const ContestantState& c = need_contestant(id);
        if (c.finished) throw ContestError(Ec::already_finished, id);
        if (busy_.count(id)) throw ContestError(Ec::busy, "evaluation already in flight");
        busy_.insert(id);

        problem = state_.problem_order[c.active_index];
        ContestEvent ev = make_event(EventKind::SubmissionReceived, now);
        ev.contestant = id;
        ev.problem = problem;
        ev.check = false;
        ev.script_size = (int64_t)script.size();
        ev.script_sha256 = util::sha256_hex(script);
        sub_seq = commit(ev);
        submitted_at = now;
    }

    EvaluationResult result;
    try {
        result = judge_->evaluate(*pack_, problem, script, CaseSet::Hidden);
    } catch (...) {
        std::lock_guard lock(mu_);
        busy_.erase(id);
        throw;
    }

    std::lock_guard lock(mu_);
    busy_.erase(id);
    result.submission_seq = sub_seq;
    result.judged_at = now_rel();

    ContestEvent done = make_event(EventKind::EvaluationCompleted, result.judged_at);
    done.contestant = id;
    done.problem = problem;
    done.check = false;
    done.submission_seq = sub_seq;
    done.submitted_at = submitted_at;
    done.aggregate = result.aggregate;
    for (const auto& tr : result.per_test)
        done.per_test.push_back({tr.case_id, tr.verdict, tr.wall_ms});
    commit(done);

    SubmitView view;
    view.aggregate = result.aggregate;
    view.problem = problem;
    const ContestantState& c = state_.contestants.at(id);
    int pi = problem_index(state_, problem);
    view.attempt = c.per_problem[pi].failed_attempts;
    view.finished = c.finished;
    if (result.accepted()) {
        view.solved_at = submitted_at;
        if (!c.finished) {
            ContestEvent unlock = make_event(EventKind::ProblemUnlocked, result.judged_at);
            unlock.contestant = id;
            unlock.problem = state_.problem_order[c.active_index];
            commit(unlock);
            view.unlocked = unlock.problem;
        }
        if (!opt_.workspace_root.empty()) sync_workspace_locked(id);
    }
    view.penalty_seconds = penalty_seconds_for(c, pack_->config);

    if (!opt_.instructor_log_root.empty()) {
        try {
            write_instructor_log(result, id, problem, script, opt_.instructor_log_root);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "shelljudge: instructor log write failed: %s\n", e.what());
        }
    }
    return view;
}

CheckView Contest::check(const std::string& id, const std::string& script) {
    std::string problem;
    int64_t sub_seq = 0;
    int64_t submitted_at = 0;

    {
        std::lock_guard lock(mu_);
        int64_t now = now_rel();
        ensure_running(now);
        const ContestantState& c = need_contestant(id);
        if (c.finished) throw ContestError(Ec::already_finished, id);
        if (busy_.count(id)) throw ContestError(Ec::busy, "evaluation already in flight");

        problem = state_.problem_order[c.active_index];
        if (pack_->find(problem)->public_cases.empty())
            throw ContestError(Ec::no_public_cases, problem);
        busy_.insert(id);

        ContestEvent ev = make_event(EventKind::SubmissionReceived, now);
        ev.contestant = id;
        ev.problem = problem;
        ev.check = true;
        ev.script_size = (int64_t)script.size();
        ev.script_sha256 = util::sha256_hex(script);
        sub_seq = commit(ev);
        submitted_at = now;
    }

    EvaluationResult result;
    try {
        result = judge_->evaluate(*pack_, problem, script, CaseSet::Public);
    } catch (...) {
        std::lock_guard lock(mu_);
        busy_.erase(id);
        throw;
    }

    std::lock_guard lock(mu_);
    busy_.erase(id);
    result.submission_seq = sub_seq;
    result.judged_at = now_rel();

    ContestEvent done = make_event(EventKind::EvaluationCompleted, result.judged_at);
    done.contestant = id;
    done.problem = problem;
    done.check = true;
    done.submission_seq = sub_seq;
    done.submitted_at = submitted_at;
    done.aggregate = result.aggregate;
    for (const auto& tr : result.per_test)
        done.per_test.push_back({tr.case_id, tr.verdict, tr.wall_ms});
    commit(done);

    if (!opt_.instructor_log_root.empty()) {
        try {
            write_instructor_log(result, id, problem, script, opt_.instructor_log_root);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "shelljudge: instructor log write failed: %s\n", e.what());
        }
    }
    return CheckView{problem, std::move(result)};
}

HintView Contest::request_hint(const std::string& id) {
    std::lock_guard lock(mu_);
    int64_t now = now_rel();
    ensure_running(now);
    const ContestantState& c = need_contestant(id);
    if (c.finished) throw ContestError(Ec::already_finished, id);

    const std::string& problem = state_.problem_order[c.active_index];
    const Problem* p = pack_->find(problem);
    int pi = problem_index(state_, problem);
    int64_t taken = c.per_problem[pi].hints_taken;
    if (taken >= (int64_t)p->hints.size())
        throw ContestError(Ec::no_more_hints, problem);

    // Hints are authored most-important-first and served in that order.
    const Hint& hint = p->hints[taken];

    ContestEvent ev = make_event(EventKind::HintRequested, now);
    ev.contestant = id;
    ev.problem = problem;
    ev.hint_index = hint.index;
    commit(ev);

    HintView view;
    view.index = hint.index;
    view.body = hint.body;
    view.problem = problem;
    view.hints_taken = c.per_problem[pi].hints_taken;
    view.hint_penalty_min = pack_->config.hint_penalty_min;
    for (const auto& prog : c.per_problem) view.hints_total += prog.hints_taken;
    return view;
}

StatusView Contest::status(const std::string& id) const {
    std::lock_guard lock(mu_);
    const ContestantState& c = need_contestant(id);

    StatusView view;
    view.contestant = id;
    view.finished = c.finished;
    view.elapsed_s = std::max(opt_.clock(), state_.now_s);
    view.duration_s = state_.duration_s;
    view.ended = state_.ended || view.elapsed_s >= state_.duration_s;
    view.penalty_seconds = penalty_seconds_for(c, pack_->config);
    for (const auto& p : c.per_problem)
        if (p.solved_at) view.solved++;
    if (!c.finished) {
        const std::string& problem = state_.problem_order[c.active_index];
        const Problem* p = pack_->find(problem);
        view.active_problem = problem;
        view.active_index = c.active_index;
        view.active_title = p->title;
        view.active_statement = p->statement;
        view.failed_attempts_active = c.per_problem[c.active_index].failed_attempts;
        view.hints_taken_active = c.per_problem[c.active_index].hints_taken;
        view.hints_available_active = (int64_t)p->hints.size();
    }
    return view;
}

std::vector<fs::path> Contest::sync_workspace(const std::string& id) {
    std::lock_guard lock(mu_);
    need_contestant(id);
    if (opt_.workspace_root.empty())
        throw ContestError(Ec::workspace_write_failure, "workspace root not configured");
    return sync_workspace_locked(id);
}

std::vector<fs::path> Contest::sync_workspace_locked(const std::string& id) {
    const ContestantState& c = state_.contestants.at(id);
    size_t unlocked = c.finished ? state_.problem_order.size()
                                 : std::min(c.active_index + 1, state_.problem_order.size());
    std::string files_path =
        pack_->shared_files.empty() ? std::string() : fs::absolute(pack_->shared_files).string();

    auto write_if_changed = [](const fs::path& p, const std::string& content) {
        std::error_code ec;
        if (fs::exists(p, ec) && fs::file_size(p, ec) == content.size() &&
            util::read_file(p) == content)
            return;
        util::write_file(p, content);
    };

    std::vector<fs::path> dirs;
    try {
        fs::path root = opt_.workspace_root / id;
        fs::create_directories(root);
        for (size_t i = 0; i < unlocked; i++) {
            const Problem& p = pack_->problems[i];
            char prefix[24];
            std::snprintf(prefix, sizeof(prefix), "%02zu", i + 1);
            fs::path pdir = root / (std::string(prefix) + "-" + p.id);
            fs::create_directories(pdir / "public");
            write_if_changed(pdir / "statement.txt", p.statement);
            for (const auto& tc : p.public_cases) {
                if (!tc.argv.empty()) {
                    std::string args;
                    for (const auto& a : tc.argv)
                        args += util::replace_all(a, "{FILES}", files_path) + "\n";
                    write_if_changed(pdir / "public" / (tc.id + ".args"), args);
                }
                if (!tc.stdin_bytes.empty())
                    write_if_changed(pdir / "public" / (tc.id + ".stdin"), tc.stdin_bytes);
                write_if_changed(pdir / "public" / (tc.id + ".out"), tc.expected_stdout);
            }
            dirs.push_back(pdir);
        }
    } catch (const std::exception& e) {
        throw ContestError(Ec::workspace_write_failure, e.what());
    }
    return dirs;
}

void Contest::end() {
    std::lock_guard lock(mu_);
    if (!state_.started || state_.ended) return;
    commit(make_event(EventKind::ContestEnded, now_rel()));
}

bool Contest::clock_expired() const {
    std::lock_guard lock(mu_);
    return state_.started && std::max(opt_.clock(), state_.now_s) >= state_.duration_s;
}

ContestSnapshot Contest::snapshot() const {
    std::lock_guard lock(mu_);
    return state_;
}

std::vector<ContestEvent> Contest::events_copy() const {
    std::lock_guard lock(mu_);
    return mem_events_;
}

ContestSnapshot replay(const std::vector<ContestEvent>& events, const ContestPack& pack) {
    ContestSnapshot s;
    s.problem_order = pack.config.problem_order;
    s.tallies.resize(pack.problems.size());
    s.contest_name = pack.config.name;
    s.pack_digest = pack.digest;
    s.duration_s = pack.config.duration_min * 60;

    int64_t expect = 1;
    for (const auto& ev : events) {
        if (ev.seq != expect)
            throw ContestError(Ec::sequence_gap, std::to_string(expect));
        expect++;
        if (ev.kind == EventKind::ContestStarted && ev.pack_digest != pack.digest)
            throw ContestError(Ec::pack_digest_mismatch,
                               "log " + ev.pack_digest + " vs pack " + pack.digest);
        if (ev.seq == 1 && ev.kind != EventKind::ContestStarted)
            throw ContestError(Ec::corrupt_log, "log must begin with ContestStarted");
        apply_event(s, ev);
    }
    return s;
}

} // namespace shelljudge
