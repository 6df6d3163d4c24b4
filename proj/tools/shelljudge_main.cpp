#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "shelljudge/analytics.hpp"
#include "shelljudge/errors.hpp"
#include "shelljudge/events.hpp"
#include "shelljudge/pack.hpp"
#include "shelljudge/scoring.hpp"
#include "shelljudge/service.hpp"
#include "shelljudge/state.hpp"
#include "shelljudge/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace shelljudge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitTransport = 2;

// ---------------------------------------------------------------------------
// contestant-side configuration: flags > env > ~/.shelljudge

struct ClientConfig {
    std::string socket;
    std::string id;
    std::string token;
    fs::path config_file;
};

fs::path default_config_path() {
    if (const char* c = std::getenv("SHELLJUDGE_CONFIG")) return c;
    if (const char* home = std::getenv("HOME")) return fs::path(home) / ".shelljudge";
    return ".shelljudge";
}

std::map<std::string, std::string> read_config_file(const fs::path& p) {
    std::map<std::string, std::string> kv;
    if (!fs::exists(p)) return kv;
    for (const auto& line : util::split_lines(util::read_file(p))) {
        size_t eq = line.find('=');
        if (eq == std::string::npos || line.empty() || line[0] == '#') continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return kv;
}

ClientConfig resolve_config(const std::string& flag_socket, const std::string& flag_id,
                            const std::string& flag_token, const std::string& flag_config) {
    ClientConfig cfg;
    cfg.config_file = flag_config.empty() ? default_config_path() : fs::path(flag_config);
    auto file = read_config_file(cfg.config_file);

    auto pick = [&](const std::string& flag, const char* env, const char* key) {
        if (!flag.empty()) return flag;
        if (const char* v = std::getenv(env)) return std::string(v);
        auto it = file.find(key);
        return it == file.end() ? std::string() : it->second;
    };
    cfg.socket = pick(flag_socket, "SHELLJUDGE_SOCKET", "SHELLJUDGE_SOCKET");
    cfg.id = pick(flag_id, "SHELLJUDGE_ID", "SHELLJUDGE_ID");
    cfg.token = pick(flag_token, "SHELLJUDGE_TOKEN", "SHELLJUDGE_TOKEN");
    return cfg;
}

json wire_call(const ClientConfig& cfg, const std::string& op, json payload) {
    if (cfg.socket.empty())
        throw TransportError("no daemon socket configured (flag --socket, env SHELLJUDGE_SOCKET, "
                             "or register first)");
    WireClient client(cfg.socket);
    return client.call(op, cfg.id, cfg.token, std::move(payload));
}

// Returns the `data` object; on {"ok":false} throws ContestError so the exit
// code mapping stays in one place.
json expect_ok(const json& resp) {
    if (resp.value("ok", false)) return resp.value("data", json::object());
    std::string error = resp.value("error", "internal");
    std::string message = resp.value("message", "");
    if (error == "auth") throw ContestError(Ec::auth, message);
    for (Ec c : {Ec::bad_request, Ec::unknown_op, Ec::duplicate_contestant, Ec::not_registered,
                 Ec::contest_not_running, Ec::contest_ended, Ec::already_finished,
                 Ec::no_more_hints, Ec::busy, Ec::no_public_cases, Ec::unknown_problem})
        if (error == ec_name(c)) throw ContestError(c, message);
    throw ContestError(Ec::internal, error + ": " + message);
}

int exit_code_for(const ContestError& e) {
    return e.code == Ec::auth ? kExitTransport : kExitRejected;
}

// ---------------------------------------------------------------------------
// small line-based unified diff for check output

void print_unified_diff(const std::string& expected, const std::string& produced) {
    auto a = util::split_lines(expected);
    auto b = util::split_lines(produced);
    const size_t cap = 200; // keep terminal output sane for huge outputs
    bool truncated = a.size() > cap || b.size() > cap;
    if (a.size() > cap) a.resize(cap);
    if (b.size() > cap) b.resize(cap);

    size_t n = a.size(), m = b.size();
    std::vector<std::vector<uint32_t>> lcs(n + 1, std::vector<uint32_t>(m + 1, 0));
    for (size_t i = n; i-- > 0;)
        for (size_t j = m; j-- > 0;)
            lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1
                                     : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    std::printf("    --- expected\n    +++ produced\n");
    size_t i = 0, j = 0;
    while (i < n && j < m) {
        if (a[i] == b[j]) {
            std::printf("     %s\n", a[i].c_str());
            i++, j++;
        } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
            std::printf("    -%s\n", a[i].c_str());
            i++;
        } else {
            std::printf("    +%s\n", b[j].c_str());
            j++;
        }
    }
    for (; i < n; i++) std::printf("    -%s\n", a[i].c_str());
    for (; j < m; j++) std::printf("    +%s\n", b[j].c_str());
    if (truncated) std::printf("    (diff truncated)\n");
}

// ---------------------------------------------------------------------------
// contestant verbs

int cmd_register(const ClientConfig& cfg0, const std::string& id) {
    ClientConfig cfg = cfg0;
    cfg.id = id;
    json data = expect_ok(wire_call(cfg, "register", json::object()));

    std::string token = data.at("token").get<std::string>();
    std::string content = "SHELLJUDGE_SOCKET=" + cfg.socket + "\n" +
                          "SHELLJUDGE_ID=" + id + "\n" +
                          "SHELLJUDGE_TOKEN=" + token + "\n";
    util::write_file(cfg.config_file, content);
    std::printf("registered %s for contest \"%s\"\n", id.c_str(),
                data.value("contest", std::string()).c_str());
    std::printf("first problem: %s\n", data.value("active_problem", std::string()).c_str());
    if (data.contains("workspace"))
        std::printf("workspace: %s\n", data["workspace"].get<std::string>().c_str());
    std::printf("credentials saved to %s\n", cfg.config_file.string().c_str());
    return kExitOk;
}

int cmd_submit(const ClientConfig& cfg, const std::string& script_path) {
    std::string script = util::read_file(script_path);
    json data = expect_ok(wire_call(cfg, "submit", json{{"script", util::base64_encode(script)}}));

    std::string verdict = data.at("verdict").get<std::string>();
    if (verdict == "Accepted") {
        if (data.value("finished", false)) {
            std::printf("Accepted — contest finished, congratulations!\n");
        } else {
            std::printf("Accepted — problem %lld unlocked\n",
                        (long long)data.value("unlocked_index", int64_t{0}));
        }
        std::printf("penalty: %s min\n", data.value("penalty_minutes", std::string()).c_str());
        return kExitOk;
    }
    auto v = verdict_from_name(verdict);
    std::printf("%s (attempt %lld)\n", v ? verdict_display(*v) : verdict.c_str(),
                (long long)data.value("attempt", int64_t{0}));
    std::printf("penalty: %s min\n", data.value("penalty_minutes", std::string()).c_str());
    return kExitRejected;
}

int cmd_check(const ClientConfig& cfg, const std::string& script_path) {
    std::string script = util::read_file(script_path);
    json data = expect_ok(wire_call(cfg, "check", json{{"script", util::base64_encode(script)}}));

    bool all_ok = true;
    std::printf("public cases for %s:\n", data.value("problem", std::string()).c_str());
    for (const auto& c : data.at("cases")) {
        std::string verdict = c.at("verdict").get<std::string>();
        bool ok = verdict == "Accepted";
        all_ok = all_ok && ok;
        auto v = verdict_from_name(verdict);
        std::printf("  case %s: %s (%lld ms)\n", c.at("case").get<std::string>().c_str(),
                    ok ? "ok" : verdict_display(v.value_or(Verdict::JudgeError)),
                    (long long)c.value("wall_ms", int64_t{0}));
        if (!ok && c.contains("expected") && c.contains("produced")) {
            auto expected = util::base64_decode(c["expected"].get<std::string>());
            auto produced = util::base64_decode(c["produced"].get<std::string>());
            if (expected && produced) print_unified_diff(*expected, *produced);
        }
    }
    std::printf(all_ok ? "all public cases pass (no penalty)\n"
                       : "some public cases fail (no penalty)\n");
    return all_ok ? kExitOk : kExitRejected;
}

int cmd_hint(const ClientConfig& cfg) {
    json data = expect_ok(wire_call(cfg, "hint", json::object()));
    std::printf("hint %d for %s:\n%s\n", data.value("index", 0),
                data.value("problem", std::string()).c_str(),
                data.value("body", std::string()).c_str());
    std::printf("penalty +%lld min (hints taken on this problem: %lld)\n",
                (long long)data.value("hint_penalty_min", int64_t{0}),
                (long long)data.value("hints_taken", int64_t{0}));
    return kExitOk;
}

int cmd_status(const ClientConfig& cfg) {
    json data = expect_ok(wire_call(cfg, "status", json::object()));
    std::printf("contestant: %s\n", data.value("contestant", std::string()).c_str());
    std::printf("elapsed: %lld s of %lld s%s\n", (long long)data.value("elapsed_s", int64_t{0}),
                (long long)data.value("duration_s", int64_t{0}),
                data.value("ended", false) ? " (contest over)" : "");
    std::printf("solved: %lld, penalty: %s min\n", (long long)data.value("solved", int64_t{0}),
                data.value("penalty_minutes", std::string()).c_str());
    if (data.value("finished", false)) {
        std::printf("all problems solved — you are done\n");
    } else if (data.contains("active_problem")) {
        std::printf("active problem %lld: %s (%s)\n",
                    (long long)data.value("active_index", int64_t{0}) + 1,
                    data.value("active_problem", std::string()).c_str(),
                    data.value("active_title", std::string()).c_str());
        std::printf("failed attempts: %lld, hints: %lld of %lld\n",
                    (long long)data.value("failed_attempts", int64_t{0}),
                    (long long)data.value("hints_taken", int64_t{0}),
                    (long long)data.value("hints_available", int64_t{0}));
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// admin verbs

int cmd_pack_validate(const std::string& pack_dir, const std::string& solutions_dir) {
    ContestPack pack = load_pack(pack_dir);
    std::map<std::string, std::string> solutions;
    if (!solutions_dir.empty()) {
        for (const auto& e : fs::directory_iterator(solutions_dir)) {
            if (!e.is_regular_file()) continue;
            std::string stem = e.path().stem().string();
            if (pack.find(stem)) solutions[stem] = util::read_file(e.path());
        }
    }
    ValidationReport report = validate_pack(pack, solutions);
    std::fputs(report.to_string().c_str(), stdout);
    return report.ok() ? kExitOk : kExitRejected;
}

std::atomic<bool> g_stop{false};

void handle_stop_signal(int) { g_stop = true; }

int cmd_serve(ServiceOptions opt) {
    Service service(std::move(opt));
    service.start();

    std::printf("contest \"%s\" started: %lld problems, %lld minutes\n",
                service.pack().config.name.c_str(), (long long)service.pack().problems.size(),
                (long long)service.pack().config.duration_min);
    IsolationReport iso = service.sandbox().capabilities();
    std::printf("sandbox: %s backend, fs scope %s\n", iso.backend.c_str(), iso.fs_scope.c_str());
    for (const auto& w : iso.warnings) std::printf("warning: %s\n", w.c_str());
    std::printf("wire socket: %s\n", service.listen_target().c_str());
    if (service.http_port() > 0)
        std::printf("scoreboard: http://127.0.0.1:%d/\n", service.http_port());
    std::fflush(stdout);

    struct sigaction sa {};
    sa.sa_handler = handle_stop_signal;
    sigaction(SIGINT, &sa, nullptr);
    sigaction(SIGTERM, &sa, nullptr);

    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    std::printf("shutting down\n");
    service.stop();
    return kExitOk;
}

int cmd_export(const std::string& log, const std::string& pack_dir, const std::string& out_csv,
               const std::string& problems_csv) {
    ContestPack pack = load_pack(pack_dir);
    int64_t rows = export_results(log, pack, out_csv);
    std::printf("%s: %lld rows\n", out_csv.c_str(), (long long)rows);
    if (!problems_csv.empty()) {
        int64_t prows = export_problem_stats(log, pack, problems_csv);
        std::printf("%s: %lld rows\n", problems_csv.c_str(), (long long)prows);
    }
    return kExitOk;
}

int cmd_replay(const std::string& log, const std::string& pack_dir) {
    ContestPack pack = load_pack(pack_dir);
    auto events = EventLog::read_file(log);
    ContestSnapshot snap = replay(events, pack);
    std::fputs(format_ranking(score(snap, pack.config)).c_str(), stdout);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shelljudge: a judge daemon and CLI for timed shell-scripting contests"};
    app.require_subcommand(1);

    std::string flag_socket, flag_id, flag_token, flag_config;
    app.add_option("--socket", flag_socket, "daemon socket (unix path or tcp:HOST:PORT)");
    app.add_option("--id", flag_id, "contestant id");
    app.add_option("--token", flag_token, "contestant token");
    app.add_option("--config", flag_config, "credentials file (default ~/.shelljudge)");

    std::string reg_id;
    auto* reg = app.add_subcommand("register", "join the contest and save credentials");
    reg->add_option("id", reg_id, "contestant id")->required();

    std::string submit_file;
    auto* submit = app.add_subcommand("submit", "judge a script against the active problem");
    submit->add_option("file", submit_file, "script file")->required();

    std::string check_file;
    auto* check = app.add_subcommand("check", "run a script against the public cases (no penalty)");
    check->add_option("file", check_file, "script file")->required();

    auto* hint = app.add_subcommand("hint", "request the next hint for the active problem");
    auto* status = app.add_subcommand("status", "show contest progress");

    auto* admin = app.add_subcommand("admin", "operator verbs");
    admin->require_subcommand(1);

    std::string pv_dir, pv_solutions;
    auto* pack_validate = admin->add_subcommand("pack-validate", "lint a contest pack");
    pack_validate->add_option("dir", pv_dir, "pack directory")->required();
    pack_validate->add_option("--solutions", pv_solutions,
                              "directory of reference scripts named <problem-id>.sh");

    ServiceOptions serve_opt;
    std::string serve_pack, serve_run_dir = "shelljudge-run";
    int64_t serve_duration_override = 0;
    auto* serve = admin->add_subcommand("serve", "run the contest daemon");
    serve->add_option("--pack", serve_pack, "contest pack directory")->required();
    serve->add_option("--socket", serve_opt.listen, "unix socket path or tcp:HOST:PORT");
    serve->add_option("--http", serve_opt.http_addr, "scoreboard address HOST:PORT");
    serve->add_option("--duration-override", serve_duration_override,
                      "override contest duration (minutes)");
    serve->add_option("--backend", serve_opt.backend, "sandbox backend: portable | strict");
    serve->add_option("--run-dir", serve_run_dir, "state directory (event log, workspaces, logs)");
    serve->add_option("--workers", serve_opt.workers, "evaluation pool size (default 2 x cpus)");

    std::string exp_csv, exp_log, exp_pack, exp_problems;
    auto* exp = admin->add_subcommand("export", "export contest results as CSV");
    exp->add_option("csv", exp_csv, "output CSV for per-contestant results")->required();
    exp->add_option("--log", exp_log, "event log (events.jsonl)")->required();
    exp->add_option("--pack", exp_pack, "contest pack directory")->required();
    exp->add_option("--problem-stats", exp_problems, "also write per-problem stats CSV");

    std::string rp_log, rp_pack;
    auto* replay_cmd = admin->add_subcommand("replay", "rebuild state from a log, print ranking");
    replay_cmd->add_option("log", rp_log, "event log (events.jsonl)")->required();
    replay_cmd->add_option("--pack", rp_pack, "contest pack directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        ClientConfig cfg = resolve_config(flag_socket, flag_id, flag_token, flag_config);
        if (reg->parsed()) return cmd_register(cfg, reg_id);
        if (submit->parsed()) return cmd_submit(cfg, submit_file);
        if (check->parsed()) return cmd_check(cfg, check_file);
        if (hint->parsed()) return cmd_hint(cfg);
        if (status->parsed()) return cmd_status(cfg);
        if (pack_validate->parsed()) return cmd_pack_validate(pv_dir, pv_solutions);
        if (serve->parsed()) {
            serve_opt.pack_dir = serve_pack;
            serve_opt.run_dir = serve_run_dir;
            if (serve_duration_override > 0) serve_opt.duration_override_min = serve_duration_override;
            if (serve_opt.listen.empty())
                serve_opt.listen = (fs::path(serve_run_dir) / "daemon.sock").string();
            return cmd_serve(std::move(serve_opt));
        }
        if (exp->parsed()) return cmd_export(exp_log, exp_pack, exp_csv, exp_problems);
        if (replay_cmd->parsed()) return cmd_replay(rp_log, rp_pack);
    } catch (const TransportError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitTransport;
    } catch (const ContestError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRejected;
    }
    return kExitOk;
}
