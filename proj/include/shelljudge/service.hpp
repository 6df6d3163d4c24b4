#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "shelljudge/judge.hpp"
#include "shelljudge/pack.hpp"
#include "shelljudge/sandbox.hpp"
#include "shelljudge/state.hpp"

namespace shelljudge {

struct ServiceOptions {
    std::filesystem::path pack_dir;
    std::string listen;    // unix socket path, or "tcp:HOST:PORT"
    std::string http_addr; // "HOST:PORT", empty disables the scoreboard
    std::optional<int64_t> duration_override_min;
    std::string backend;              // empty: SHELLJUDGE_BACKEND / default
    std::filesystem::path run_dir;    // events.jsonl, workspaces/, logs/, scratch/
    int workers = 0;                  // evaluation pool size; 0 = 2 x hw threads
    std::function<int64_t()> clock;   // injectable for tests; default: steady since start()
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One line of UTF-8 JSON per request and per response:
//   {"op":..., "contestant":..., "token":..., "payload":{...}}
//   {"ok":true, "data":{...}} | {"ok":false, "error":..., "message":...}
class WireClient {
  public:
    // target: unix socket path or "tcp:HOST:PORT"
    explicit WireClient(const std::string& target);
    ~WireClient();
    WireClient(const WireClient&) = delete;
    WireClient& operator=(const WireClient&) = delete;

    nlohmann::json call(const std::string& op, const std::string& contestant,
                        const std::string& token, nlohmann::json payload);

  private:
    int fd_ = -1;
    std::string rxbuf_;
};

// Owns pack, sandbox, judge, contest and clock; serves the wire protocol and
// the read-only HTTP scoreboard until stop().
class Service {
  public:
    explicit Service(ServiceOptions opt);
    ~Service();

    void start(); // loads pack, starts contest, binds listeners; throws on failure
    void stop();  // graceful: closes listeners, joins workers, ends contest if expired

    const std::string& listen_target() const { return opt_.listen; }
    int http_port() const { return http_port_; }
    Contest& contest() { return *contest_; }
    const ContestPack& pack() const { return pack_; }
    const Sandbox& sandbox() const { return *sandbox_; }

    // Exposed for tests: exactly what a connection handler does for one line.
    nlohmann::json handle_request_line(const std::string& line);

  private:
    ServiceOptions opt_;
    ContestPack pack_;
    std::unique_ptr<Sandbox> sandbox_;
    std::unique_ptr<Judge> judge_;
    std::unique_ptr<Contest> contest_;

    std::atomic<bool> running_{false};
    int listen_fd_ = -1;
    std::thread accept_thread_;
    std::vector<std::thread> conn_threads_;
    std::mutex conn_mu_;
    std::set<int> conn_fds_;

    class EvalSlots;
    std::unique_ptr<EvalSlots> slots_;

    struct HttpState;
    std::unique_ptr<HttpState> http_;
    int http_port_ = 0;

    void accept_loop();
    void connection_loop(int fd);
    nlohmann::json dispatch(const nlohmann::json& req);
    void setup_http();
};

// Scoreboard renderings shared by the HTTP handlers (and their tests).
nlohmann::json ranking_json(const ContestSnapshot& snap, const ContestConfig& cfg);
nlohmann::json problem_stats_json(const ContestSnapshot& snap);
std::string scoreboard_html(const ContestSnapshot& snap, const ContestConfig& cfg);

} // namespace shelljudge
