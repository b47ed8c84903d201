#pragma once

#include <chrono>
#include <optional>
#include <string>

namespace ioco {

// The implementation side seen by the MBT engine: stimuli go in with send,
// responses come back in FIFO order through receive, and a quiescent SUT is
// signalled by an empty receive. Errors at the transport level (not verdicts)
// are raised as TransportError.
class SutPort {
public:
    virtual ~SutPort() = default;

    // Delivers one input stimulus by name. A SUT that does not enable the
    // input in its current state ignores it; that is not observable here.
    virtual void send(const std::string& input) = 0;

    // Next queued output name, or nullopt for quiescence. Ports with a
    // wall-clock notion of time wait up to `timeout` before concluding
    // quiescence; logical-time ports conclude it immediately.
    virtual std::optional<std::string> receive(std::chrono::milliseconds timeout) = 0;

    virtual void reset() = 0;
};

}  // namespace ioco
