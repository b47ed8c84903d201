#pragma once

#include <memory>
#include <random>
#include <vector>

#include "iolts.hpp"

namespace ioco {

// Memoized lookahead node: taking `action` lands in `state`; `children` are
// the continuations over input/output transitions from `state`. After a
// grow to depth n, `value` is the best per-step sum of covered() over all
// length-n action sequences starting with this node's action, and
// `value_max` the best child value among the fully grown children.
struct PathTree {
    LabelId action;
    StateId state;
    std::vector<PathTree> children;
    std::uint32_t depth;
    std::uint32_t value;
    std::uint32_t value_max;

    static PathTree leaf(LabelId action, StateId state, const VisitedSet& visited);
};

inline std::uint32_t covered(StateId q, const VisitedSet& visited) {
    return visited.contains(q) ? 0u : 1u;
}

struct GrowStats {
    std::uint64_t grow_calls = 0;  // recursive grow invocations (pruned children excluded)
    std::uint64_t expansions = 0;  // nodes whose children were materialized
};

struct GreedyOptions {
    std::uint32_t depth = 5;
    bool prune = true;  // disable only to measure the pruning test itself
};

// Extends pt in place to depth n, recomputing values bottom-up against the
// current visited set. Children are expanded lazily; a child is descended
// into only while its stored value plus remaining headroom can still reach
// the best fully grown sibling. Stored values from earlier, smaller visited
// sets are upper bounds, which keeps that test exact.
void grow(const Iolts& m, PathTree& pt, std::uint32_t n, const VisitedSet& visited,
          const GreedyOptions& opt = {}, GrowStats* stats = nullptr);

struct PickResult {
    std::vector<LabelId> pref;  // sorted; nonempty whenever options is
    std::uint32_t v_best = 0;
};

// Greedy test case selection with incremental reuse across steps. The
// engine calls pick() with the enabled inputs, performs one of the returned
// actions, and reports every executed action (inputs, outputs, and delta
// observations alike) through advance().
class GreedySelector {
public:
    explicit GreedySelector(GreedyOptions opt = {}) : opt_(opt) {}

    // Keeps only the path-trees rooted at an option, reseeds depth-1 roots
    // from qs when none remain, grows every root to the configured depth,
    // and returns the options attaining the best root value.
    PickResult pick(const Iolts& m, const StateSet& qs, const std::vector<LabelId>& options,
                    const VisitedSet& visited, GrowStats* stats = nullptr);

    // Replaces the roots with the children of the roots labeled `action`,
    // reusing their grown subtrees. An action matching no root clears the
    // set; the next pick reseeds.
    void advance(LabelId action);

    void clear() { paths_.clear(); }
    const std::vector<PathTree>& paths() const { return paths_; }

private:
    GreedyOptions opt_;
    std::vector<PathTree> paths_;
};

// Uniform draw from a nonempty option set; the random baseline strategy and
// the tie-break rule share it.
LabelId random_pick(const std::vector<LabelId>& options, std::mt19937_64& rng);

// Input selection policy as used by the engine: random baseline or greedy
// with uniform tie-breaking over the preferred set.
class InputChooser {
public:
    virtual ~InputChooser() = default;
    virtual LabelId choose(const Iolts& m, const StateSet& qs,
                           const std::vector<LabelId>& options, const VisitedSet& visited) = 0;
    virtual void on_action(LabelId action) {}
};

class RandomChooser : public InputChooser {
public:
    explicit RandomChooser(std::uint64_t seed);
    LabelId choose(const Iolts&, const StateSet&, const std::vector<LabelId>& options,
                   const VisitedSet&) override;

private:
    std::mt19937_64 rng_;
};

class GreedyChooser : public InputChooser {
public:
    GreedyChooser(std::uint64_t seed, GreedyOptions opt);
    LabelId choose(const Iolts& m, const StateSet& qs, const std::vector<LabelId>& options,
                   const VisitedSet& visited) override;
    void on_action(LabelId action) override;

private:
    GreedySelector selector_;
    std::mt19937_64 rng_;
};

}  // namespace ioco
