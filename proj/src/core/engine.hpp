#pragma once

#include <optional>
#include <vector>

#include "iolts.hpp"
#include "strategy.hpp"
#include "sut.hpp"

namespace ioco {

enum class StrategyKind { Random, Greedy };

struct EngineConfig {
    StrategyKind strategy = StrategyKind::Random;
    std::uint32_t depth = 5;            // greedy lookahead horizon n
    double coverage_target = 1.0;       // fraction of states, in (0, 1]
    std::uint64_t max_transitions = 0;  // 0 = no budget
    std::uint32_t timeout_millis = 0;   // passed through to SutPort::receive
    double input_bias = 0.5;            // P(send) when both directions are open
    std::uint64_t seed = 1;
};

enum class Verdict {
    CoverageReached,
    FailUnexpectedOutput,
    FailUnexpectedQuiescence,
    BudgetExhausted,
};

// Hyphenated form used in reports and on the wire: "coverage-reached" etc.
const char* verdict_name(Verdict v);

struct CurvePoint {
    std::uint64_t transitions;
    std::uint32_t states_visited;
};

struct RunReport {
    Verdict verdict;
    std::uint64_t transitions_taken = 0;
    std::vector<ActionLabel> trace;          // executed actions; excludes the offender
    std::optional<ActionLabel> offending;    // the disallowed observation on fail-*
    std::vector<CurvePoint> coverage_curve;  // (transitions so far, |visited|)
};

enum class Branch { Send, Listen };

// Resolution of the send-or-listen choice: forced when only one direction
// is enabled, otherwise a p_in-biased coin.
Branch choose_branch(bool inputs_enabled, bool observations_possible, double input_bias,
                     std::mt19937_64& rng);

// One on-line test run: drive `port` with inputs chosen by the configured
// strategy, check every observation against `m`, and stop at the coverage
// target, the budget, or the first conformance violation. `m` must carry
// its quiescence self-loops already; a model with none at all is completed
// here as a convenience. Transport failures propagate as TransportError.
RunReport run(const Iolts& m, SutPort& port, const EngineConfig& cfg);

}  // namespace ioco
