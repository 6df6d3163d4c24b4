#include "shelljudge/service.hpp"

#include <cerrno>
#include <condition_variable>
#include <cstring>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <httplib.h>

#include "shelljudge/errors.hpp"
#include "shelljudge/scoring.hpp"
#include "shelljudge/util.hpp"

namespace shelljudge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr size_t kMaxLine = 8u << 20; // scripts travel base64-encoded

struct TcpTarget {
    std::string host;
    int port = 0;
};

std::optional<TcpTarget> parse_tcp(const std::string& target) {
    if (target.rfind("tcp:", 0) != 0) return std::nullopt;
    std::string rest = target.substr(4);
    size_t colon = rest.rfind(':');
    if (colon == std::string::npos) return std::nullopt;
    TcpTarget t;
    t.host = rest.substr(0, colon);
    t.port = std::atoi(rest.c_str() + colon + 1);
    return t;
}

int connect_target(const std::string& target) {
    if (auto tcp = parse_tcp(target)) {
        int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (fd < 0) throw TransportError(std::strerror(errno));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<uint16_t>(tcp->port));
        if (::inet_pton(AF_INET, tcp->host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            throw TransportError("bad address: " + tcp->host);
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
            int e = errno;
            ::close(fd);
            throw TransportError("connect " + target + ": " + std::strerror(e));
        }
        return fd;
    }
    int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (fd < 0) throw TransportError(std::strerror(errno));
    sockaddr_un addr{};
    addr.sun_family = AF_UNIX;
    if (target.size() >= sizeof(addr.sun_path))
        throw TransportError("socket path too long: " + target);
    std::strncpy(addr.sun_path, target.c_str(), sizeof(addr.sun_path) - 1);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int e = errno;
        ::close(fd);
        throw TransportError("connect " + target + ": " + std::strerror(e));
    }
    return fd;
}

void send_all(int fd, const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("send: ") + std::strerror(errno));
        }
        off += static_cast<size_t>(n);
    }
}

json error_response(Ec code, const std::string& message) {
    return json{{"ok", false}, {"error", ec_name(code)}, {"message", message}};
}

json ok_response(json data) { return json{{"ok", true}, {"data", std::move(data)}}; }

} // namespace

// ---------------------------------------------------------------------------
// WireClient

WireClient::WireClient(const std::string& target) : fd_(connect_target(target)) {}

WireClient::~WireClient() {
    if (fd_ >= 0) ::close(fd_);
}

json WireClient::call(const std::string& op, const std::string& contestant,
                      const std::string& token, json payload) {
    json req{{"op", op}, {"contestant", contestant}, {"token", token},
             {"payload", std::move(payload)}};
    send_all(fd_, req.dump() + "\n");

    while (true) {
        size_t nl = rxbuf_.find('\n');
        if (nl != std::string::npos) {
            std::string line = rxbuf_.substr(0, nl);
            rxbuf_.erase(0, nl + 1);
            try {
                return json::parse(line);
            } catch (const json::exception& e) {
                throw TransportError(std::string("bad response: ") + e.what());
            }
        }
        char tmp[65536];
        ssize_t n = ::recv(fd_, tmp, sizeof(tmp), 0);
        if (n == 0) throw TransportError("connection closed");
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("recv: ") + std::strerror(errno));
        }
        rxbuf_.append(tmp, static_cast<size_t>(n));
    }
}

// ---------------------------------------------------------------------------
// Evaluation pool: a plain slot counter; evaluations run on the connection
// thread, the counter only bounds how many sandboxes run at once.

class Service::EvalSlots {
  public:
    explicit EvalSlots(int n) : free_(n) {}
    void acquire() {
        std::unique_lock lock(mu_);
        cv_.wait(lock, [&] { return free_ > 0; });
        free_--;
    }
    void release() {
        std::lock_guard lock(mu_);
        free_++;
        cv_.notify_one();
    }

  private:
    std::mutex mu_;
    std::condition_variable cv_;
    int free_;
};

struct Service::HttpState {
    httplib::Server server;
    std::thread thread;
};

// ---------------------------------------------------------------------------
// Service

Service::Service(ServiceOptions opt) : opt_(std::move(opt)) {}

Service::~Service() { stop(); }

void Service::start() {
    pack_ = load_pack(opt_.pack_dir);
    if (opt_.duration_override_min) pack_.config.duration_min = *opt_.duration_override_min;

    Sandbox::Options sb_opt = Sandbox::options_from_env();
    if (!opt_.backend.empty()) sb_opt.backend = opt_.backend;
    sandbox_ = std::make_unique<Sandbox>(sb_opt);

    fs::create_directories(opt_.run_dir);
    judge_ = std::make_unique<Judge>(*sandbox_, opt_.run_dir / "scratch");

    Contest::Options copt;
    copt.event_log_file = opt_.run_dir / "events.jsonl";
    copt.workspace_root = opt_.run_dir / "workspaces";
    copt.instructor_log_root = opt_.run_dir / "logs";
    if (opt_.clock) {
        copt.clock = opt_.clock;
    } else {
        int64_t started_at = util::steady_ms();
        copt.clock = [started_at] { return (util::steady_ms() - started_at) / 1000; };
    }
    contest_ = std::make_unique<Contest>(pack_, *judge_, std::move(copt));
    contest_->start();

    int workers = opt_.workers > 0
                      ? opt_.workers
                      : 2 * std::max(1u, std::thread::hardware_concurrency());
    slots_ = std::make_unique<EvalSlots>(workers);

    // wire listener
    if (auto tcp = parse_tcp(opt_.listen)) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (listen_fd_ < 0) throw ContestError(Ec::bind_failure, std::strerror(errno));
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<uint16_t>(tcp->port));
        if (::inet_pton(AF_INET, tcp->host.c_str(), &addr.sin_addr) != 1)
            throw ContestError(Ec::bind_failure, "bad address: " + tcp->host);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
            ::listen(listen_fd_, 64) != 0)
            throw ContestError(Ec::bind_failure, opt_.listen + ": " + std::strerror(errno));
        if (tcp->port == 0) { // learn the ephemeral port so clients can reach us
            sockaddr_in bound{};
            socklen_t len = sizeof(bound);
            if (::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len) == 0)
                opt_.listen = "tcp:" + tcp->host + ":" + std::to_string(ntohs(bound.sin_port));
        }
    } else {
        ::unlink(opt_.listen.c_str()); // stale socket from a previous run
        listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
        if (listen_fd_ < 0) throw ContestError(Ec::bind_failure, std::strerror(errno));
        sockaddr_un addr{};
        addr.sun_family = AF_UNIX;
        if (opt_.listen.size() >= sizeof(addr.sun_path))
            throw ContestError(Ec::bind_failure, "socket path too long: " + opt_.listen);
        std::strncpy(addr.sun_path, opt_.listen.c_str(), sizeof(addr.sun_path) - 1);
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
            ::listen(listen_fd_, 64) != 0)
            throw ContestError(Ec::bind_failure, opt_.listen + ": " + std::strerror(errno));
    }

    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
    if (!opt_.http_addr.empty()) setup_http();
}

void Service::setup_http() {
    size_t colon = opt_.http_addr.rfind(':');
    if (colon == std::string::npos)
        throw ContestError(Ec::bind_failure, "http address must be HOST:PORT");
    std::string host = opt_.http_addr.substr(0, colon);
    int port = std::atoi(opt_.http_addr.c_str() + colon + 1);

    http_ = std::make_unique<HttpState>();
    auto& svr = http_->server;

    svr.Get("/api/ranking", [this](const httplib::Request&, httplib::Response& res) {
        ContestSnapshot snap = contest_->snapshot();
        res.set_content(ranking_json(snap, pack_.config).dump(2) + "\n", "application/json");
    });
    svr.Get("/api/problems", [this](const httplib::Request&, httplib::Response& res) {
        ContestSnapshot snap = contest_->snapshot();
        res.set_content(problem_stats_json(snap).dump(2) + "\n", "application/json");
    });
    svr.Get("/", [this](const httplib::Request&, httplib::Response& res) {
        ContestSnapshot snap = contest_->snapshot();
        res.set_content(scoreboard_html(snap, pack_.config), "text/html; charset=utf-8");
    });

    if (port == 0) {
        http_port_ = svr.bind_to_any_port(host);
        if (http_port_ <= 0) throw ContestError(Ec::bind_failure, "http bind failed on " + host);
    } else {
        if (!svr.bind_to_port(host, port))
            throw ContestError(Ec::bind_failure, "http bind failed on " + opt_.http_addr);
        http_port_ = port;
    }
    http_->thread = std::thread([this] { http_->server.listen_after_bind(); });
}

void Service::stop() {
    bool was_running = running_.exchange(false);
    if (!was_running && !contest_) return;

    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    {
        std::lock_guard lock(conn_mu_);
        for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    for (auto& t : conn_threads_)
        if (t.joinable()) t.join();
    conn_threads_.clear();
    if (http_) {
        http_->server.stop();
        if (http_->thread.joinable()) http_->thread.join();
        http_.reset();
    }
    if (contest_ && contest_->clock_expired()) contest_->end();
}

void Service::accept_loop() {
    while (running_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break; // listener closed
        }
        std::lock_guard lock(conn_mu_);
        conn_fds_.insert(fd);
        conn_threads_.emplace_back([this, fd] { connection_loop(fd); });
    }
}

void Service::connection_loop(int fd) {
    std::string buf;
    bool draining = false; // discarding an oversized line
    char tmp[65536];
    while (running_) {
        ssize_t n = ::recv(fd, tmp, sizeof(tmp), 0);
        if (n == 0) break;
        if (n < 0) {
            if (errno == EINTR) continue;
            break;
        }
        buf.append(tmp, static_cast<size_t>(n));

        size_t nl;
        while ((nl = buf.find('\n')) != std::string::npos) {
            std::string line = buf.substr(0, nl);
            buf.erase(0, nl + 1);
            if (draining) {
                draining = false; // the remainder of the oversized line ended here
                continue;
            }
            json resp = handle_request_line(line);
            try {
                send_all(fd, resp.dump() + "\n");
            } catch (const TransportError&) {
                goto done;
            }
        }
        if (buf.size() > kMaxLine) {
            buf.clear();
            draining = true;
            try {
                send_all(fd, error_response(Ec::bad_request, "request line too long").dump() + "\n");
            } catch (const TransportError&) {
                break;
            }
        }
    }
done:
    ::close(fd);
    std::lock_guard lock(conn_mu_);
    conn_fds_.erase(fd);
}

json Service::handle_request_line(const std::string& line) {
    json req;
    try {
        req = json::parse(line);
    } catch (const json::exception& e) {
        return error_response(Ec::bad_request, std::string("not valid JSON: ") + e.what());
    }
    if (!req.is_object()) return error_response(Ec::bad_request, "request must be an object");
    try {
        return dispatch(req);
    } catch (const ContestError& e) {
        return error_response(e.code, e.what());
    } catch (const std::exception& e) {
        return error_response(Ec::internal, e.what());
    }
}

json Service::dispatch(const json& req) {
    std::string op = req.value("op", std::string());
    std::string contestant = req.value("contestant", std::string());
    std::string token = req.value("token", std::string());
    json payload = req.value("payload", json::object());

    if (op == "register") {
        RegistrationView view = contest_->register_contestant(contestant);
        json data{{"token", view.token},
                  {"active_problem", view.active_problem},
                  {"contest", pack_.config.name}};
        if (!view.workspace.empty()) data["workspace"] = view.workspace.string();
        return ok_response(data);
    }

    if (op != "submit" && op != "check" && op != "hint" && op != "status")
        return error_response(Ec::unknown_op, op.empty() ? "missing op" : op);

    if (!contest_->verify_token(contestant, token))
        return error_response(Ec::auth, "unknown contestant or bad token");

    if (op == "hint") {
        HintView view = contest_->request_hint(contestant);
        return ok_response(json{{"index", view.index},
                                {"body", view.body},
                                {"problem", view.problem},
                                {"hints_taken", view.hints_taken},
                                {"hint_penalty_min", view.hint_penalty_min},
                                {"hints_total", view.hints_total}});
    }

    if (op == "status") {
        StatusView view = contest_->status(contestant);
        json data{{"contestant", view.contestant},
                  {"finished", view.finished},
                  {"solved", view.solved},
                  {"penalty_seconds", view.penalty_seconds},
                  {"penalty_minutes", format_penalty_minutes(view.penalty_seconds)},
                  {"elapsed_s", view.elapsed_s},
                  {"duration_s", view.duration_s},
                  {"ended", view.ended}};
        if (view.active_problem) {
            data["active_problem"] = *view.active_problem;
            data["active_index"] = view.active_index;
            data["active_title"] = view.active_title;
            data["active_statement"] = view.active_statement;
            data["failed_attempts"] = view.failed_attempts_active;
            data["hints_taken"] = view.hints_taken_active;
            data["hints_available"] = view.hints_available_active;
        }
        return ok_response(data);
    }

    // submit / check carry the script as base64
    if (!payload.contains("script") || !payload["script"].is_string())
        return error_response(Ec::bad_request, "payload.script (base64) required");
    auto script = util::base64_decode(payload["script"].get<std::string>());
    if (!script) return error_response(Ec::bad_request, "payload.script is not valid base64");

    if (op == "submit") {
        slots_->acquire();
        SubmitView view;
        try {
            view = contest_->submit(contestant, *script);
        } catch (...) {
            slots_->release();
            throw;
        }
        slots_->release();
        json data{{"verdict", verdict_name(view.aggregate)},
                  {"problem", view.problem},
                  {"attempt", view.attempt},
                  {"finished", view.finished},
                  {"penalty_seconds", view.penalty_seconds},
                  {"penalty_minutes", format_penalty_minutes(view.penalty_seconds)}};
        if (view.unlocked) {
            data["unlocked"] = *view.unlocked;
            data["unlocked_index"] = pack_.index_of(*view.unlocked) + 1; // 1-based
        }
        if (view.solved_at >= 0) data["solved_at"] = view.solved_at;
        return ok_response(data);
    }

    // check
    slots_->acquire();
    CheckView view;
    try {
        view = contest_->check(contestant, *script);
    } catch (...) {
        slots_->release();
        throw;
    }
    slots_->release();

    const Problem* problem = pack_.find(view.problem);
    json cases = json::array();
    for (const auto& tr : view.result.per_test) {
        json c{{"case", tr.case_id},
               {"verdict", verdict_name(tr.verdict)},
               {"wall_ms", tr.wall_ms},
               {"produced", util::base64_encode(tr.produced_stdout)}};
        if (problem) {
            for (const auto& tc : problem->public_cases)
                if (tc.id == tr.case_id) c["expected"] = util::base64_encode(tc.expected_stdout);
        }
        cases.push_back(std::move(c));
    }
    return ok_response(json{{"aggregate", verdict_name(view.result.aggregate)},
                            {"problem", view.problem},
                            {"cases", cases}});
}

// ---------------------------------------------------------------------------
// Scoreboard renderings

json ranking_json(const ContestSnapshot& snap, const ContestConfig& cfg) {
    auto rows = score(snap, cfg);
    json out;
    out["contest"] = json{{"name", snap.contest_name},
                          {"elapsed_s", snap.now_s},
                          {"duration_s", snap.duration_s},
                          {"ended", snap.ended}};
    json jrows = json::array();
    for (size_t i = 0; i < rows.size(); i++) {
        const auto& r = rows[i];
        json cells = json::array();
        for (const auto& c : r.cells) {
            json cell{{"problem", c.problem},
                      {"solved", c.solved},
                      {"attempts", c.attempts},
                      {"hints", c.hints}};
            if (c.solved) {
                cell["solved_at_s"] = c.solved_at;
                cell["solved_minute"] = format_penalty_minutes(c.solved_at);
            }
            cells.push_back(std::move(cell));
        }
        jrows.push_back(json{{"rank", i + 1},
                             {"contestant", r.contestant},
                             {"solved", r.solved},
                             {"penalty_seconds", r.penalty_seconds},
                             {"penalty_minutes", format_penalty_minutes(r.penalty_seconds)},
                             {"last_accept_s", r.last_accept_s},
                             {"problems", std::move(cells)}});
    }
    out["ranking"] = std::move(jrows);
    return out;
}

json problem_stats_json(const ContestSnapshot& snap) {
    json rows = json::array();
    for (const auto& r : problem_stats(snap))
        rows.push_back(json{{"problem", r.problem},
                            {"correct", r.correct},
                            {"failed", r.failed},
                            {"hints", r.hints},
                            {"checks", r.checks},
                            {"stopped_here", r.stopped_here}});
    return json{{"problems", std::move(rows)}};
}

namespace {

std::string html_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace

std::string scoreboard_html(const ContestSnapshot& snap, const ContestConfig& cfg) {
    auto rows = score(snap, cfg);
    auto stats = problem_stats(snap);

    std::string h;
    h += "<!doctype html>\n<html><head><meta charset=\"utf-8\">\n";
    h += "<meta http-equiv=\"refresh\" content=\"10\">\n";
    h += "<title>" + html_escape(snap.contest_name) + "</title>\n";
    h += "<style>body{font-family:monospace;margin:2em}table{border-collapse:collapse}"
         "td,th{border:1px solid #999;padding:4px 10px;text-align:left}"
         ".ok{background:#e6ffe6}</style>\n</head><body>\n";
    h += "<h1>" + html_escape(snap.contest_name) + "</h1>\n";
    h += "<p>elapsed " + format_penalty_minutes(snap.now_s) + " min of " +
         format_penalty_minutes(snap.duration_s) + " min" +
         (snap.ended ? " (contest over)" : "") + "</p>\n";

    h += "<table>\n<tr><th>#</th><th>contestant</th><th>solved</th><th>penalty</th>";
    for (const auto& p : snap.problem_order) h += "<th>" + html_escape(p) + "</th>";
    h += "</tr>\n";
    for (size_t i = 0; i < rows.size(); i++) {
        const auto& r = rows[i];
        h += "<tr><td>" + std::to_string(i + 1) + "</td><td>" + html_escape(r.contestant) +
             "</td><td>" + std::to_string(r.solved) + "</td><td>" +
             format_penalty_minutes(r.penalty_seconds) + "</td>";
        for (const auto& c : r.cells) {
            if (c.solved) {
                h += "<td class=\"ok\">+" + format_penalty_minutes(c.solved_at) + " (" +
                     std::to_string(c.attempts) + "f," + std::to_string(c.hints) + "h)</td>";
            } else if (c.attempts > 0 || c.hints > 0) {
                h += "<td>-" + std::to_string(c.attempts) + "f," + std::to_string(c.hints) +
                     "h</td>";
            } else {
                h += "<td></td>";
            }
        }
        h += "</tr>\n";
    }
    h += "</table>\n";

    h += "<h2>problems</h2>\n<table>\n<tr><th>problem</th><th>correct</th><th>failed</th>"
         "<th>hints</th><th>checks</th><th>stopped here</th></tr>\n";
    for (const auto& s : stats) {
        h += "<tr><td>" + html_escape(s.problem) + "</td><td>" + std::to_string(s.correct) +
             "</td><td>" + std::to_string(s.failed) + "</td><td>" + std::to_string(s.hints) +
             "</td><td>" + std::to_string(s.checks) + "</td><td>" +
             std::to_string(s.stopped_here) + "</td></tr>\n";
    }
    h += "</table>\n</body></html>\n";
    return h;
}

} // namespace shelljudge
