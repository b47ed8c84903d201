#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "core/iolts.hpp"
#include "core/rng.hpp"
#include "core/strategy.hpp"

namespace fixtures {

// Three-state request/response loop: 0 -?a-> 1 -!x-> 2 -?b-> 0, quiescence
// loops on 0 and 2. Output y is declared but never emitted, which leaves
// room for relabel faults whose wrong output is still in the alphabet.
inline ioco::Iolts make_toy1() {
    ioco::IoltsBuilder b(3, 0);
    b.declare_output("y");
    b.input(0, "a", 1);
    b.output(1, "x", 2);
    b.input(2, "b", 0);
    b.delta(0);
    b.delta(2);
    return std::move(b).build();
}

// Lookahead testbed with two corridors from state 0: a short fresh one
// through 1,2,3 and a longer, mostly explored one through 4..7. Every edge
// toward state k is the unique input "tok", so branches are addressable by
// name.
inline ioco::Iolts make_fig1() {
    ioco::IoltsBuilder b(8, 0);
    b.input(0, "to1", 1);
    b.input(1, "to2", 2);
    b.input(2, "to3", 3);
    b.input(0, "to4", 4);
    b.input(4, "to5", 5);
    b.input(5, "to6", 6);
    b.input(5, "to7", 7);
    return std::move(b).build();
}

inline ioco::VisitedSet make_visited(std::size_t universe,
                                     std::initializer_list<ioco::StateId> members) {
    ioco::VisitedSet v(universe);
    for (ioco::StateId q : members) v.insert(q);
    return v;
}

inline ioco::VisitedSet fig1_visited() { return make_visited(8, {0, 3, 4, 5, 7}); }

// Arbitrary little model for oracle sweeps: 2..50 states, up to 4 out-edges
// each, mixed inputs and outputs with per-edge names. Shape is unconstrained
// (may be disconnected or nondeterministic); the value oracles hold anyway.
inline ioco::Iolts make_random_model(std::uint64_t seed) {
    auto rng = ioco::make_rng(seed);
    const auto states = static_cast<std::uint32_t>(2 + ioco::uniform_index(rng, 49));
    ioco::IoltsBuilder b(states, 0);
    for (std::uint32_t s = 0; s < states; ++s) {
        const std::size_t degree = 1 + ioco::uniform_index(rng, 4);
        for (std::size_t k = 0; k < degree; ++k) {
            const auto dst = static_cast<ioco::StateId>(ioco::uniform_index(rng, states));
            const std::string name = std::to_string(s) + "_" + std::to_string(k);
            if (ioco::bernoulli(rng, 0.5))
                b.input(s, "i" + name, dst);
            else
                b.output(s, "o" + name, dst);
        }
    }
    return std::move(b).build();
}

inline ioco::VisitedSet random_visited(std::size_t states, std::mt19937_64& rng,
                                       double density) {
    ioco::VisitedSet v(states);
    for (std::size_t q = 0; q < states; ++q)
        if (ioco::bernoulli(rng, density)) v.insert(static_cast<ioco::StateId>(q));
    return v;
}

// Reference for grown values: the best per-node covered() sum over all
// explicit input/output paths of exactly `steps` further transitions,
// found by plain enumeration with no memoization or pruning.
inline std::uint32_t best_path_value(const ioco::Iolts& m, ioco::StateId from,
                                     std::uint32_t steps, const ioco::VisitedSet& visited) {
    if (steps == 0) return 0;
    std::uint32_t best = 0;
    auto [it, end] = m.row(from);
    for (; it != end; ++it) {
        const auto kind = m.label(it->label).kind;
        if (kind != ioco::ActionKind::Input && kind != ioco::ActionKind::Output) continue;
        best = std::max(best, ioco::covered(it->dst, visited) +
                                  best_path_value(m, it->dst, steps - 1, visited));
    }
    return best;
}

}  // namespace fixtures
