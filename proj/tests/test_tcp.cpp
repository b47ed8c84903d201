#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <string>

#include "core/engine.hpp"
#include "core/tcp.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace ioco;

namespace {

// Bare-bones protocol client for wire-level checks; no parsing beyond
// line splitting, so replies can be compared byte for byte.
class RawClient {
public:
    explicit RawClient(std::uint16_t port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd_ >= 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    }

    ~RawClient() { close(); }

    void close() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

    void send_raw(const std::string& bytes) {
        REQUIRE(::send(fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL) ==
                static_cast<ssize_t>(bytes.size()));
    }

    // Next LF-terminated line, excluding the LF; empty string on EOF.
    std::string read_line() {
        for (;;) {
            const auto pos = buffer_.find('\n');
            if (pos != std::string::npos) {
                std::string line = buffer_.substr(0, pos);
                buffer_.erase(0, pos + 1);
                return line;
            }
            char chunk[512];
            const ssize_t n = ::read(fd_, chunk, sizeof chunk);
            if (n <= 0) return "";
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    std::string roundtrip(const std::string& request) {
        send_raw(request + "\n");
        return read_line();
    }

private:
    int fd_ = -1;
    std::string buffer_;
};

}  // namespace

TEST_CASE("scripted session, byte for byte") {
    TcpServer server(fixtures::make_toy1(), TimeMode::Logical, 7);
    const std::uint16_t port = server.listen("127.0.0.1", 0);
    REQUIRE(port != 0);
    server.start();

    RawClient client(port);
    CHECK(client.roundtrip("INPUT a") == "OK");
    CHECK(client.roundtrip("POLL") == "OUTPUT x");
    CHECK(client.roundtrip("POLL") == "QUIESCENT");
    CHECK(client.roundtrip("INPUT bogus") == "ERR unknown-input");
    CHECK(client.roundtrip("INPUT b") == "OK");
    CHECK(client.roundtrip("POLL 25") == "QUIESCENT");
    CHECK(client.roundtrip("INPUT a") == "OK");
    CHECK(client.roundtrip("RESET") == "OK");
    CHECK(client.roundtrip("POLL") == "QUIESCENT");  // reset cleared the queue

    SUBCASE("malformed requests get ERR bad-request") {
        CHECK(client.roundtrip("POLL -3") == "ERR bad-request");
        CHECK(client.roundtrip("POLL soon") == "ERR bad-request");
        CHECK(client.roundtrip("RESET now") == "ERR bad-request");
        CHECK(client.roundtrip("FLUSH") == "ERR bad-request");
        CHECK(client.roundtrip("") == "ERR bad-request");
        CHECK(client.roundtrip("input a") == "ERR bad-request");  // verbs are case-sensitive
    }

    SUBCASE("a known input that is not enabled is absorbed") {
        CHECK(client.roundtrip("RESET") == "OK");
        CHECK(client.roundtrip("INPUT b") == "OK");      // state 0 does not enable b
        CHECK(client.roundtrip("POLL") == "QUIESCENT");  // and nothing happened
        CHECK(client.roundtrip("INPUT a") == "OK");
        CHECK(client.roundtrip("POLL") == "OUTPUT x");
    }

    SUBCASE("CRLF requests work") {
        client.send_raw("RESET\r\nINPUT a\r\nPOLL\r\n");
        CHECK(client.read_line() == "OK");
        CHECK(client.read_line() == "OK");
        CHECK(client.read_line() == "OUTPUT x");
    }

    CHECK(client.roundtrip("BYE") == "OK");
    CHECK(client.read_line() == "");  // server closed the session

    server.stop();
}

TEST_CASE("sessions are independent") {
    TcpServer server(fixtures::make_toy1(), TimeMode::Logical, 7);
    const std::uint16_t port = server.listen("127.0.0.1", 0);
    server.start();

    RawClient first(port);
    RawClient second(port);
    CHECK(first.roundtrip("INPUT a") == "OK");
    // The other session still sits in the initial state with an empty queue.
    CHECK(second.roundtrip("POLL") == "QUIESCENT");
    CHECK(second.roundtrip("INPUT b") == "OK");
    CHECK(first.roundtrip("POLL") == "OUTPUT x");
    CHECK(second.roundtrip("POLL") == "QUIESCENT");
    server.stop();
}

TEST_CASE("stop unblocks idle sessions") {
    TcpServer server(fixtures::make_toy1(), TimeMode::Logical, 7);
    const std::uint16_t port = server.listen("127.0.0.1", 0);
    server.start();
    RawClient idle(port);
    CHECK(idle.roundtrip("INPUT a") == "OK");
    server.stop();  // must not hang on the connected, silent client
    CHECK(idle.read_line() == "");
}

TEST_CASE("the port speaks the protocol for the engine") {
    TcpServer server(fixtures::make_toy1(), TimeMode::Logical, 7);
    const std::uint16_t port = server.listen("127.0.0.1", 0);
    server.start();

    SUBCASE("manual drive") {
        TcpPort sut("127.0.0.1", port);
        sut.send("a");
        CHECK(sut.receive(std::chrono::milliseconds{0}) == "x");
        CHECK(sut.receive(std::chrono::milliseconds{40}) == std::nullopt);
        sut.send("b");
        sut.reset();
        CHECK(sut.receive(std::chrono::milliseconds{0}) == std::nullopt);
        CHECK_THROWS_AS(sut.send("bogus"), TransportError);
        sut.bye();
        CHECK_THROWS_AS(sut.reset(), TransportError);
    }

    SUBCASE("a full engine run over the wire") {
        TcpPort sut("127.0.0.1", port);
        EngineConfig cfg;
        cfg.strategy = StrategyKind::Greedy;
        cfg.depth = 2;
        cfg.input_bias = 1.0;
        const RunReport report = run(fixtures::make_toy1(), sut, cfg);
        CHECK(report.verdict == Verdict::CoverageReached);
        CHECK(report.transitions_taken == 3);
    }

    SUBCASE("hostname resolution") {
        TcpPort sut("localhost", port);
        sut.send("a");
        CHECK(sut.receive(std::chrono::milliseconds{0}) == "x");
    }

    server.stop();
}

TEST_CASE("connecting to a dead port fails loudly") {
    std::uint16_t unused_port;
    {
        TcpServer probe(fixtures::make_toy1(), TimeMode::Logical, 1);
        unused_port = probe.listen("127.0.0.1", 0);
    }  // closed again; nothing listens there now
    CHECK_THROWS_AS(TcpPort("127.0.0.1", unused_port), TransportError);
}
