#pragma once

#include <atomic>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "iolts.hpp"
#include "simulator.hpp"

namespace ioco {

// Serves simulator sessions over the line protocol. Each accepted
// connection gets its own Simulator (seeded per session) and its own
// thread; sessions share nothing but the immutable model.
//
//   client:  INPUT <name> | POLL | POLL <millis> | RESET | BYE
//   server:  OK | OUTPUT <name> | QUIESCENT | ERR <reason>
//
// Lines are UTF-8, LF-terminated (a trailing CR is tolerated); every
// request gets exactly one response line.
class TcpServer {
public:
    TcpServer(Iolts model, TimeMode mode, std::uint64_t seed);
    ~TcpServer();

    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    // Binds and listens; port 0 picks an ephemeral port. Returns the bound
    // port. Call once, before serve_forever/start.
    std::uint16_t listen(const std::string& host, std::uint16_t port);

    // Accept loop in a background thread; returns immediately.
    void start();

    // Accept loop on the calling thread; returns after stop().
    void serve_forever();

    // Shuts the listener down and joins every session thread.
    void stop();

    std::uint16_t port() const { return port_; }

private:
    void accept_loop();
    void session(int fd);

    Iolts model_;
    TimeMode mode_;
    std::uint64_t seed_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> next_session_{0};
    std::thread accept_thread_;
    std::mutex sessions_mutex_;
    std::vector<std::thread> sessions_;
    std::set<int> session_fds_;  // live connections, for shutdown on stop()
};

// SutPort backed by one protocol connection. Requests and responses are
// strictly alternating, so the port is as synchronous as the in-process
// simulator. Protocol or socket trouble raises TransportError.
class TcpPort : public SutPort {
public:
    TcpPort(const std::string& host, std::uint16_t port);
    ~TcpPort();

    TcpPort(const TcpPort&) = delete;
    TcpPort& operator=(const TcpPort&) = delete;

    void send(const std::string& input) override;
    std::optional<std::string> receive(std::chrono::milliseconds timeout) override;
    void reset() override;

    // Polite shutdown; the destructor calls it when still connected.
    void bye();

private:
    std::string request(const std::string& line);

    int fd_ = -1;
    std::string buffer_;
};

}  // namespace ioco
