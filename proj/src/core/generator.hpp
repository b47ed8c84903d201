#pragma once

#include <random>
#include <utility>
#include <vector>

#include "iolts.hpp"
#include "simulator.hpp"

namespace ioco {

// Abstract statespace skeleton: edges carry opaque action ids, globally
// unique across every component of one generation attempt so that parallel
// composition never synchronizes and stays deterministic.
struct Digraph {
    struct Edge {
        std::uint32_t src;
        std::uint64_t action;
        std::uint32_t dst;
    };

    std::uint32_t states = 0;
    std::vector<Edge> edges;
};

// Random component: every state gets exactly `degree` outgoing edges with
// uniformly drawn targets; `next_action` hands out the fresh action ids.
Digraph gen_component(std::uint32_t states, std::uint32_t degree, std::mt19937_64& rng,
                      std::uint64_t& next_action);

// Interleaving parallel composition restricted to the part reachable from
// the all-zeros tuple. State numbering follows discovery order, so equal
// inputs give identical outputs.
Digraph compose(const std::vector<Digraph>& components);

// Run-to-completion expansion: each skeleton edge becomes one input
// transition followed by a chain of `outputs_per_input` output transitions
// through fresh states. With alphabet_size = 0 every edge gets its own
// input/output names (derived from the action id); a positive value draws
// names from that many symbols instead, which can introduce nondeterminism
// and so make generation retry. The result carries its quiescence loops.
Iolts expand_rtc(const Digraph& g, std::uint32_t outputs_per_input, std::mt19937_64& rng,
                 std::uint32_t alphabet_size = 0);

struct GenParams {
    std::uint32_t states = 10;            // per component
    std::uint32_t degree = 6;             // out-edges per skeleton state
    std::uint32_t outputs_per_input = 1;  // emissions following each input
    std::uint32_t components = 1;
    std::uint64_t seed = 1;
    std::uint32_t max_attempts = 32;
    std::uint32_t alphabet_size = 0;  // 0 = fresh names per action
};

struct GenResult {
    Iolts model;
    std::uint64_t accepted_seed = 0;  // seed of the accepted attempt
    std::uint32_t attempts = 0;       // attempts consumed, accepted one included
};

// Component generation, composition, and expansion under seed + attempt
// index, retried until the result passes strict validation (determinism,
// strong connectivity). Throws after max_attempts, naming the last failure.
GenResult gen_model(const GenParams& params);

// True when some suspension trace of bounded length separates the two
// models: one enables an observation (input, output, or quiescence) after
// a common trace that the other refuses. Quiescence is judged from state
// structure, not from stored delta loops, so mutants of completed models
// are compared by their real behavior.
bool distinguishable(const Iolts& a, const Iolts& b, std::size_t depth_bound);

// Draws single-fault mutants of `model`, keeping only those distinguishable
// from it within depth 2·|Q|. Throws when the draw budget runs out before
// `count` qualifying mutants are found.
std::vector<std::pair<Iolts, FaultSpec>> gen_mutants(const Iolts& model, std::size_t count,
                                                     std::mt19937_64& rng);

}  // namespace ioco
