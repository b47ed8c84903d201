#include "strategy.hpp"

#include <algorithm>

#include "rng.hpp"

namespace ioco {

PathTree PathTree::leaf(LabelId action, StateId state, const VisitedSet& visited) {
    return PathTree{action, state, {}, 1, covered(state, visited), 0};
}

namespace {

// Depth-1 trees for every input/output transition enabled in `state`.
// Quiescence and internal steps carry no coverage of their own and are not
// worth scheduling, so they never appear as children.
std::vector<PathTree> expand(const Iolts& m, StateId state, const VisitedSet& visited) {
    std::vector<PathTree> children;
    auto [it, end] = m.row(state);
    for (; it != end; ++it) {
        const ActionKind kind = m.label(it->label).kind;
        if (kind != ActionKind::Input && kind != ActionKind::Output) continue;
        children.push_back(PathTree::leaf(it->label, it->dst, visited));
    }
    return children;
}

void grow_rec(const Iolts& m, PathTree& pt, std::uint32_t n, const VisitedSet& visited,
              const GreedyOptions& opt, GrowStats* stats) {
    if (stats) ++stats->grow_calls;
    const std::uint32_t own = covered(pt.state, visited);
    if (n == 1) {
        // Horizon frontier. Recomputing the node's own coverage here is
        // what refreshes reused subtrees after the visited set has grown:
        // the recursion touches exactly the nodes whose stored values are
        // one pick old.
        pt.depth = 1;
        pt.value = own;
        pt.value_max = 0;
        return;
    }
    if (pt.depth >= n) return;  // already grown this deep under this visited set
    if (pt.children.empty()) {
        pt.children = expand(m, pt.state, visited);
        if (stats) ++stats->expansions;
    }
    if (pt.children.empty()) {
        // Sink for observable behaviour: the path cannot be extended, so
        // its value is just this node's own coverage.
        pt.depth = n;
        pt.value = own;
        pt.value_max = 0;
        return;
    }
    // Stored child values may stem from an earlier grow against a smaller
    // visited set; they only ever shrink on regrowth, so they are upper
    // bounds. Restarting best from 0 therefore never prunes a child that
    // could still win, while stale high bounds would.
    const std::uint32_t horizon = n - 1;
    std::uint32_t best = 0;
    for (PathTree& child : pt.children) {
        // A child whose optimistic ceiling (current value plus one point
        // per remaining level) cannot beat the best grown sibling keeps
        // its stale shape; it is re-examined on the next grow.
        const std::uint32_t headroom = horizon > child.depth ? horizon - child.depth : 0;
        if (opt.prune && child.value + headroom < best) continue;
        grow_rec(m, child, horizon, visited, opt, stats);
        best = std::max(best, child.value);
    }
    pt.depth = n;
    pt.value = own + best;
    pt.value_max = best;
}

}  // namespace

void grow(const Iolts& m, PathTree& pt, std::uint32_t n, const VisitedSet& visited,
          const GreedyOptions& opt, GrowStats* stats) {
    if (n == 0) throw IocoError("grow: depth must be at least 1");
    grow_rec(m, pt, n, visited, opt, stats);
}

PickResult GreedySelector::pick(const Iolts& m, const StateSet& qs,
                                const std::vector<LabelId>& options, const VisitedSet& visited,
                                GrowStats* stats) {
    if (options.empty()) throw IocoError("pick: no options to choose from");

    // Drop trees whose root action is no longer on offer; their subtrees
    // describe futures the engine can no longer start.
    std::erase_if(paths_, [&](const PathTree& pt) {
        return std::find(options.begin(), options.end(), pt.action) == options.end();
    });

    if (paths_.empty()) {
        for (LabelId action : options) {
            for (StateId q : qs) {
                auto [it, end] = m.row(q);
                for (; it != end; ++it) {
                    if (it->label != action) continue;
                    paths_.push_back(PathTree::leaf(action, it->dst, visited));
                }
            }
        }
    }
    if (paths_.empty()) throw IocoError("pick: no option is enabled in the current state set");

    for (PathTree& pt : paths_) grow(m, pt, opt_.depth, visited, opt_, stats);

    PickResult result;
    for (const PathTree& pt : paths_) result.v_best = std::max(result.v_best, pt.value);
    for (LabelId action : options) {
        const bool best = std::any_of(paths_.begin(), paths_.end(), [&](const PathTree& pt) {
            return pt.action == action && pt.value == result.v_best;
        });
        if (best) result.pref.push_back(action);
    }
    // All roots scoring zero means the lookahead sees nothing new anywhere;
    // every option is then equally (un)attractive, including options whose
    // root was not carried over by reuse.
    if (result.v_best == 0) result.pref = options;
    std::sort(result.pref.begin(), result.pref.end());
    result.pref.erase(std::unique(result.pref.begin(), result.pref.end()), result.pref.end());
    return result;
}

void GreedySelector::advance(LabelId action) {
    std::vector<PathTree> next;
    for (PathTree& pt : paths_) {
        if (pt.action != action) continue;
        for (PathTree& child : pt.children) next.push_back(std::move(child));
    }
    paths_ = std::move(next);
}

LabelId random_pick(const std::vector<LabelId>& options, std::mt19937_64& rng) {
    if (options.empty()) throw IocoError("random_pick: empty option set");
    return options[uniform_index(rng, options.size())];
}

RandomChooser::RandomChooser(std::uint64_t seed) : rng_(make_rng(seed)) {}

LabelId RandomChooser::choose(const Iolts&, const StateSet&, const std::vector<LabelId>& options,
                              const VisitedSet&) {
    return random_pick(options, rng_);
}

GreedyChooser::GreedyChooser(std::uint64_t seed, GreedyOptions opt)
    : selector_(opt), rng_(make_rng(seed)) {}

LabelId GreedyChooser::choose(const Iolts& m, const StateSet& qs,
                              const std::vector<LabelId>& options, const VisitedSet& visited) {
    const PickResult result = selector_.pick(m, qs, options, visited);
    return random_pick(result.pref, rng_);
}

void GreedyChooser::on_action(LabelId action) { selector_.advance(action); }

}  // namespace ioco
