#pragma once

#include <deque>
#include <mutex>
#include <random>
#include <string>

#include "iolts.hpp"
#include "sut.hpp"

namespace ioco {

// A single behavioral deviation from a model. Applying a fault produces the
// mutated model: Redirect changes one transition's target, RelabelOutput
// swaps one output transition's name for another declared output, DropOutput
// silences one emission (the transition becomes internal).
struct FaultSpec {
    enum class Kind { Redirect, RelabelOutput, DropOutput };

    Kind kind;
    StateId src = 0;
    ActionLabel label;       // the affected transition's label
    StateId old_target = 0;  // Redirect
    StateId new_target = 0;  // Redirect
    std::string new_name;    // RelabelOutput

    std::string describe() const;
};

// Throws IocoError when the fault references a missing transition, state, or
// (for RelabelOutput) a name outside the model's outputs.
Iolts apply_fault(const Iolts& m, const FaultSpec& fault);

enum class TimeMode {
    Logical,    // empty queue means quiescent immediately; benchmark default
    WallClock,  // empty queue waits out the timeout before quiescence
};

// Plays the implementation: tracks a current state, accepts enabled inputs,
// and eagerly runs each accepted input to completion, emitting the output
// burst into a FIFO queue. Multiple enabled outputs are resolved uniformly
// at random under the session seed, so a fixed seed replays exactly.
class Simulator : public SutPort {
public:
    Simulator(Iolts model, std::uint64_t seed, TimeMode mode = TimeMode::Logical);

    // Takes the input transition if enabled and runs the autonomous phase.
    // Returns false (state unchanged) when the input is not enabled; unknown
    // names are treated the same way.
    bool try_send(const std::string& input);

    // Installs a behavioral fault; the simulator thereafter follows the
    // mutated model. Current state and queue are preserved.
    void mutate(const FaultSpec& fault);

    // SutPort interface.
    void send(const std::string& input) override { try_send(input); }
    std::optional<std::string> receive(std::chrono::milliseconds timeout) override;
    void reset() override;

    const Iolts& model() const { return model_; }
    StateId current() const { return current_; }
    std::size_t queued() const;
    bool input_known(const std::string& name) const { return model_.inputs().count(name) != 0; }

private:
    void run_to_completion();

    Iolts model_;
    StateId current_;
    std::uint64_t seed_;
    std::mt19937_64 rng_;
    TimeMode mode_;
    std::deque<std::string> queue_;
    mutable std::mutex queue_mutex_;
};

}  // namespace ioco
