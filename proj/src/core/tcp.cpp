#include "tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <utility>

#include "rng.hpp"

namespace ioco {

namespace {

void write_all(int fd, const std::string& data) {
    std::size_t done = 0;
    while (done < data.size()) {
        // MSG_NOSIGNAL: a vanished peer must surface as EPIPE, not SIGPIPE.
        const ssize_t n = ::send(fd, data.data() + done, data.size() - done, MSG_NOSIGNAL);
        if (n <= 0) {
            if (n < 0 && errno == EINTR) continue;
            throw TransportError("socket write failed: " + std::string(std::strerror(errno)));
        }
        done += static_cast<std::size_t>(n);
    }
}

// Pulls the next LF-terminated line out of (fd, buffer); false on EOF.
// A trailing CR is stripped so telnet-style clients work too.
bool read_line(int fd, std::string& buffer, std::string& line) {
    for (;;) {
        const auto pos = buffer.find('\n');
        if (pos != std::string::npos) {
            line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        char chunk[4096];
        const ssize_t n = ::read(fd, chunk, sizeof chunk);
        if (n == 0) return false;
        if (n < 0) {
            if (errno == EINTR) continue;
            throw TransportError("socket read failed: " + std::string(std::strerror(errno)));
        }
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

struct Request {
    std::string verb;
    std::string arg;
};

Request split(const std::string& line) {
    const auto space = line.find(' ');
    if (space == std::string::npos) return {line, ""};
    return {line.substr(0, space), line.substr(space + 1)};
}

}  // namespace

TcpServer::TcpServer(Iolts model, TimeMode mode, std::uint64_t seed)
    : model_(std::move(model)), mode_(mode), seed_(seed) {}

TcpServer::~TcpServer() { stop(); }

std::uint16_t TcpServer::listen(const std::string& host, std::uint16_t port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw TransportError("socket: " + std::string(std::strerror(errno)));
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw TransportError("bad listen address: " + host);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0)
        throw TransportError("bind: " + std::string(std::strerror(errno)));
    if (::listen(listen_fd_, 16) < 0)
        throw TransportError("listen: " + std::string(std::strerror(errno)));

    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    return port_;
}

void TcpServer::start() {
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void TcpServer::serve_forever() { accept_loop(); }

void TcpServer::accept_loop() {
    for (;;) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return;  // listener shut down
        }
        std::lock_guard lock(sessions_mutex_);
        if (stopping_) {
            ::close(fd);
            return;
        }
        session_fds_.insert(fd);
        sessions_.emplace_back([this, fd] { session(fd); });
    }
}

void TcpServer::session(int fd) {
    Simulator sim(model_, derive_seed(seed_, next_session_.fetch_add(1), 0, 0), mode_);
    std::string buffer;
    std::string line;
    try {
        while (read_line(fd, buffer, line)) {
            const Request req = split(line);
            std::string reply;
            if (req.verb == "INPUT") {
                if (!sim.input_known(req.arg)) {
                    reply = "ERR unknown-input";
                } else {
                    // Inputs the current state does not enable are absorbed
                    // silently: the implementation is input-enabled.
                    sim.try_send(req.arg);
                    reply = "OK";
                }
            } else if (req.verb == "POLL") {
                std::uint64_t millis = 0;
                if (!req.arg.empty()) {
                    if (req.arg.find_first_not_of("0123456789") != std::string::npos) {
                        write_all(fd, "ERR bad-request\n");
                        continue;
                    }
                    millis = std::strtoull(req.arg.c_str(), nullptr, 10);
                }
                const auto got = sim.receive(std::chrono::milliseconds(millis));
                reply = got ? "OUTPUT " + *got : "QUIESCENT";
            } else if (req.verb == "RESET" && req.arg.empty()) {
                sim.reset();
                reply = "OK";
            } else if (req.verb == "BYE" && req.arg.empty()) {
                write_all(fd, "OK\n");
                break;
            } else {
                reply = "ERR bad-request";
            }
            write_all(fd, reply + "\n");
        }
    } catch (const TransportError&) {
        // Peer vanished mid-line; nothing to clean up beyond the socket.
    }
    {
        // Unregister before closing so stop() never touches a recycled fd.
        std::lock_guard lock(sessions_mutex_);
        session_fds_.erase(fd);
    }
    ::close(fd);
}

void TcpServer::stop() {
    if (stopping_.exchange(true)) {
        if (accept_thread_.joinable()) accept_thread_.join();
        return;
    }
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    std::vector<std::thread> sessions;
    {
        std::lock_guard lock(sessions_mutex_);
        // Kick sessions parked in read(); they unregister and exit.
        for (int fd : session_fds_) ::shutdown(fd, SHUT_RDWR);
        sessions.swap(sessions_);
    }
    for (auto& t : sessions) t.join();
}

TcpPort::TcpPort(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw TransportError("socket: " + std::string(std::strerror(errno)));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        // Not a literal address; resolve it.
        addrinfo hints{};
        hints.ai_family = AF_INET;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* found = nullptr;
        if (::getaddrinfo(host.c_str(), nullptr, &hints, &found) != 0 || found == nullptr) {
            ::close(fd_);
            fd_ = -1;
            throw TransportError("cannot resolve host: " + host);
        }
        addr.sin_addr = reinterpret_cast<sockaddr_in*>(found->ai_addr)->sin_addr;
        ::freeaddrinfo(found);
    }
    if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0) {
        const std::string reason = std::strerror(errno);
        ::close(fd_);
        fd_ = -1;
        throw TransportError("connect " + host + ":" + std::to_string(port) + ": " + reason);
    }
}

TcpPort::~TcpPort() {
    if (fd_ >= 0) {
        try {
            bye();
        } catch (const TransportError&) {
            // Best effort; the session dies with the socket either way.
        }
    }
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

std::string TcpPort::request(const std::string& line) {
    if (fd_ < 0) throw TransportError("connection already closed");
    write_all(fd_, line + "\n");
    std::string reply;
    if (!read_line(fd_, buffer_, reply)) throw TransportError("server closed the connection");
    return reply;
}

void TcpPort::send(const std::string& input) {
    const std::string reply = request("INPUT " + input);
    if (reply != "OK") throw TransportError("INPUT " + input + " rejected: " + reply);
}

std::optional<std::string> TcpPort::receive(std::chrono::milliseconds timeout) {
    const std::string verb =
        timeout.count() > 0 ? "POLL " + std::to_string(timeout.count()) : "POLL";
    const std::string reply = request(verb);
    if (reply == "QUIESCENT") return std::nullopt;
    if (reply.rfind("OUTPUT ", 0) == 0) return reply.substr(7);
    throw TransportError("unexpected POLL reply: " + reply);
}

void TcpPort::reset() {
    const std::string reply = request("RESET");
    if (reply != "OK") throw TransportError("RESET rejected: " + reply);
}

void TcpPort::bye() {
    const std::string reply = request("BYE");
    ::close(fd_);
    fd_ = -1;
    if (reply != "OK") throw TransportError("BYE rejected: " + reply);
}

}  // namespace ioco
