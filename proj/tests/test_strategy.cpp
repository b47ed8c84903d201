#include <algorithm>
#include <map>

#include "core/rng.hpp"
#include "core/strategy.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace ioco;

namespace {

LabelId lid(const Iolts& m, const std::string& input_name) {
    auto id = m.find_label(ActionLabel::input(input_name));
    REQUIRE(id.has_value());
    return *id;
}

bool tree_equal(const PathTree& a, const PathTree& b) {
    if (a.action != b.action || a.state != b.state || a.depth != b.depth ||
        a.value != b.value || a.value_max != b.value_max ||
        a.children.size() != b.children.size())
        return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!tree_equal(a.children[i], b.children[i])) return false;
    return true;
}

// Labels of kind input/output enabled somewhere in qs.
std::vector<LabelId> walk_options(const Iolts& m, const StateSet& qs) {
    std::vector<LabelId> options;
    for (LabelId a : m.next_actions(qs)) {
        const ActionKind kind = m.label(a).kind;
        if (kind == ActionKind::Input || kind == ActionKind::Output) options.push_back(a);
    }
    return options;
}

// What pick() must report for fresh (non-reused) roots, by brute force.
PickResult oracle_pick(const Iolts& m, const StateSet& qs, const std::vector<LabelId>& options,
                       const VisitedSet& visited, std::uint32_t depth) {
    PickResult expected;
    std::map<LabelId, std::uint32_t> root_value;
    for (LabelId action : options) {
        for (StateId q : qs) {
            auto [it, end] = m.row(q);
            for (; it != end; ++it) {
                if (it->label != action) continue;
                const std::uint32_t v = covered(it->dst, visited) +
                                        fixtures::best_path_value(m, it->dst, depth - 1, visited);
                auto [slot, fresh] = root_value.try_emplace(action, v);
                if (!fresh) slot->second = std::max(slot->second, v);
            }
        }
    }
    for (const auto& [action, v] : root_value) expected.v_best = std::max(expected.v_best, v);
    if (expected.v_best == 0) {
        expected.pref = options;
        std::sort(expected.pref.begin(), expected.pref.end());
        expected.pref.erase(std::unique(expected.pref.begin(), expected.pref.end()),
                            expected.pref.end());
    } else {
        for (const auto& [action, v] : root_value)
            if (v == expected.v_best) expected.pref.push_back(action);
    }
    return expected;
}

}  // namespace

TEST_CASE("covered is the fresh-state indicator") {
    const VisitedSet v = fixtures::fig1_visited();
    CHECK(covered(6, v) == 1);
    CHECK(covered(0, v) == 0);
    CHECK(covered(3, v) == 0);
    CHECK(covered(99, v) == 1);  // out of universe means never visited
}

TEST_CASE("grow on the two-corridor model") {
    const Iolts m = fixtures::make_fig1();
    const VisitedSet visited = fixtures::fig1_visited();

    SUBCASE("fresh corridor scores both unexplored states") {
        PathTree pt = PathTree::leaf(lid(m, "to1"), 1, visited);
        grow(m, pt, 3, visited);
        CHECK(pt.value == 2);
        CHECK(pt.depth == 3);
        CHECK(pt.value_max == 1);
    }

    SUBCASE("explored corridor reaches one fresh state") {
        PathTree pt = PathTree::leaf(lid(m, "to4"), 4, visited);
        grow(m, pt, 3, visited);
        CHECK(pt.value == 1);
        CHECK(pt.depth == 3);
    }

    SUBCASE("regrowing at the same depth leaves the tree unchanged") {
        PathTree pt = PathTree::leaf(lid(m, "to1"), 1, visited);
        grow(m, pt, 3, visited);
        PathTree again = pt;
        grow(m, again, 3, visited);
        CHECK(tree_equal(pt, again));
    }

    SUBCASE("value never exceeds depth") {
        for (std::uint32_t n = 1; n <= 6; ++n) {
            PathTree pt = PathTree::leaf(lid(m, "to1"), 1, VisitedSet(8));
            grow(m, pt, n, VisitedSet(8));
            CHECK(pt.value <= n);
        }
    }

    SUBCASE("value is monotone in depth") {
        std::uint32_t previous = 0;
        for (std::uint32_t n = 1; n <= 6; ++n) {
            PathTree pt = PathTree::leaf(lid(m, "to4"), 4, visited);
            grow(m, pt, n, visited);
            CHECK(pt.value >= previous);
            previous = pt.value;
        }
    }

    SUBCASE("depth zero is rejected") {
        PathTree pt = PathTree::leaf(lid(m, "to1"), 1, visited);
        CHECK_THROWS_AS(grow(m, pt, 0, visited), IocoError);
    }
}

TEST_CASE("pick prefers the corridor with more coverage") {
    const Iolts m = fixtures::make_fig1();
    const VisitedSet visited = fixtures::fig1_visited();
    GreedySelector sel(GreedyOptions{3, true});
    const PickResult r = sel.pick(m, {0}, {lid(m, "to1"), lid(m, "to4")}, visited);
    CHECK(r.pref == std::vector<LabelId>{lid(m, "to1")});
    CHECK(r.v_best == 2);
}

TEST_CASE("pick on the request/response loop") {
    const Iolts m = fixtures::make_toy1();
    const LabelId a = lid(m, "a");
    const VisitedSet visited = fixtures::make_visited(3, {0});
    GreedySelector sel(GreedyOptions{2, true});
    const PickResult r = sel.pick(m, {0}, {a}, visited);
    CHECK(r.pref == std::vector<LabelId>{a});
    CHECK(r.v_best == 2);  // states 1 and 2 are both fresh
}

TEST_CASE("pick with nothing fresh returns every option") {
    const Iolts m = fixtures::make_fig1();
    const VisitedSet all = fixtures::make_visited(8, {0, 1, 2, 3, 4, 5, 6, 7});
    GreedySelector sel(GreedyOptions{4, true});
    const PickResult r = sel.pick(m, {0}, {lid(m, "to4"), lid(m, "to1")}, all);
    CHECK(r.v_best == 0);
    CHECK(r.pref == std::vector<LabelId>{lid(m, "to1"), lid(m, "to4")});
}

TEST_CASE("pick argument validation") {
    const Iolts m = fixtures::make_fig1();
    GreedySelector sel;
    CHECK_THROWS_AS(sel.pick(m, {0}, {}, VisitedSet(8)), IocoError);
    // to3 is only enabled from state 2, so from state 0 nothing seeds.
    GreedySelector sel2;
    CHECK_THROWS_AS(sel2.pick(m, {0}, {lid(m, "to3")}, VisitedSet(8)), IocoError);
}

TEST_CASE("advance keeps the chosen subtree") {
    const Iolts m = fixtures::make_fig1();
    const VisitedSet visited = fixtures::fig1_visited();
    GreedySelector sel(GreedyOptions{3, true});
    sel.pick(m, {0}, {lid(m, "to1"), lid(m, "to4")}, visited);
    REQUIRE(sel.paths().size() == 2);

    sel.advance(lid(m, "to1"));
    REQUIRE(sel.paths().size() == 1);
    CHECK(sel.paths()[0].action == lid(m, "to2"));
    CHECK(sel.paths()[0].state == 2);
    // The reused subtree keeps its grown value: fresh state 2 plus the
    // already-explored state 3 behind it.
    CHECK(sel.paths()[0].value == 1);
    CHECK(sel.paths()[0].depth == 2);

    SUBCASE("an action matching no root clears the paths") {
        sel.advance(lid(m, "to4"));
        CHECK(sel.paths().empty());
        // And the next pick recovers by reseeding.
        const PickResult r = sel.pick(m, {2}, {lid(m, "to3")}, visited);
        CHECK(r.pref == std::vector<LabelId>{lid(m, "to3")});
    }
}

TEST_CASE("grown values match brute-force enumeration") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const Iolts m = fixtures::make_random_model(seed);
        auto rng = make_rng(seed ^ 0xc0ffee);
        const VisitedSet visited = fixtures::random_visited(m.state_count(), rng, 0.5);

        for (std::uint32_t depth = 1; depth <= 6; ++depth) {
            // Sample a handful of transitions as roots.
            for (int sample = 0; sample < 8; ++sample) {
                const auto q = static_cast<StateId>(uniform_index(rng, m.state_count()));
                auto [it, end] = m.row(q);
                if (it == end) continue;
                const Transition& t = it[uniform_index(rng, static_cast<std::size_t>(end - it))];
                PathTree pt = PathTree::leaf(t.label, t.dst, visited);
                grow(m, pt, depth, visited);
                const std::uint32_t expected =
                    covered(t.dst, visited) + fixtures::best_path_value(m, t.dst, depth - 1, visited);
                CHECK(pt.value == expected);
            }
        }
    }
}

TEST_CASE("pick matches the oracle on fresh roots") {
    for (std::uint64_t seed = 31; seed <= 50; ++seed) {
        const Iolts m = fixtures::make_random_model(seed);
        auto rng = make_rng(seed * 977);
        const VisitedSet visited = fixtures::random_visited(m.state_count(), rng, 0.4);
        const auto q = static_cast<StateId>(uniform_index(rng, m.state_count()));
        const StateSet qs = {q};
        const std::vector<LabelId> options = walk_options(m, qs);
        if (options.empty()) continue;

        for (std::uint32_t depth : {1u, 2u, 4u}) {
            GreedySelector sel(GreedyOptions{depth, true});
            const PickResult got = sel.pick(m, qs, options, visited);
            const PickResult expected = oracle_pick(m, qs, options, visited, depth);
            CHECK(got.pref == expected.pref);
            CHECK(got.v_best == expected.v_best);
        }
    }
}

TEST_CASE("pruning changes work, not results") {
    std::uint64_t pruned_calls = 0, full_calls = 0;
    for (std::uint64_t seed = 51; seed <= 65; ++seed) {
        const Iolts m = fixtures::make_random_model(seed);
        auto rng = make_rng(seed + 17);
        const VisitedSet visited = fixtures::random_visited(m.state_count(), rng, 0.6);
        const std::vector<LabelId> options = walk_options(m, {m.initial()});
        if (options.empty()) continue;

        GrowStats on, off;
        GreedySelector with_prune(GreedyOptions{5, true});
        GreedySelector without(GreedyOptions{5, false});
        const PickResult a = with_prune.pick(m, {m.initial()}, options, visited, &on);
        const PickResult b = without.pick(m, {m.initial()}, options, visited, &off);
        CHECK(a.pref == b.pref);
        CHECK(a.v_best == b.v_best);
        CHECK(on.grow_calls <= off.grow_calls);
        CHECK(on.expansions <= off.expansions);
        pruned_calls += on.grow_calls;
        full_calls += off.grow_calls;
    }
    // Across the batch the pruning must actually save work.
    CHECK(pruned_calls < full_calls);
}

TEST_CASE("reuse across steps is equivalent to a fresh selector") {
    for (std::uint64_t seed = 70; seed <= 75; ++seed) {
        const Iolts m = fixtures::make_random_model(seed);
        auto rng = make_rng(seed * 13 + 1);
        const std::uint32_t depth = 2 + static_cast<std::uint32_t>(uniform_index(rng, 3));

        GreedySelector reused(GreedyOptions{depth, true});
        VisitedSet visited(m.state_count());
        StateSet qs = {m.initial()};
        for (StateId q : qs) visited.insert(q);

        for (int step = 0; step < 200; ++step) {
            const std::vector<LabelId> options = walk_options(m, qs);
            if (options.empty()) break;

            const PickResult incremental = reused.pick(m, qs, options, visited);
            GreedySelector scratch(GreedyOptions{depth, true});
            const PickResult fresh = scratch.pick(m, qs, options, visited);
            REQUIRE(incremental.pref == fresh.pref);
            REQUIRE(incremental.v_best == fresh.v_best);

            const LabelId action = random_pick(incremental.pref, rng);
            reused.advance(action);
            qs = m.after(qs, action);
            REQUIRE(!qs.empty());
            for (StateId q : qs) visited.insert(q);
        }
    }
}

TEST_CASE("random_pick") {
    auto rng = make_rng(42);
    CHECK(random_pick({7}, rng) == 7);
    CHECK_THROWS_AS(random_pick({}, rng), IocoError);

    SUBCASE("two options are drawn evenly") {
        auto coin = make_rng(7);
        int first = 0;
        const int trials = 10000;
        for (int i = 0; i < trials; ++i)
            if (random_pick({3, 9}, coin) == 3) ++first;
        CHECK(first > trials / 2 - 150);
        CHECK(first < trials / 2 + 150);
    }

    SUBCASE("fixed seed replays the sequence") {
        auto r1 = make_rng(99), r2 = make_rng(99);
        for (int i = 0; i < 100; ++i)
            CHECK(random_pick({1, 2, 3, 4, 5}, r1) == random_pick({1, 2, 3, 4, 5}, r2));
    }
}

TEST_CASE("choosers return an offered option") {
    const Iolts m = fixtures::make_fig1();
    const VisitedSet visited(8);
    const std::vector<LabelId> options = {lid(m, "to1"), lid(m, "to4")};

    RandomChooser random(5);
    GreedyChooser greedy(5, GreedyOptions{3, true});
    for (int i = 0; i < 20; ++i) {
        const LabelId r = random.choose(m, {0}, options, visited);
        CHECK(std::find(options.begin(), options.end(), r) != options.end());
        const LabelId g = greedy.choose(m, {0}, options, visited);
        CHECK(std::find(options.begin(), options.end(), g) != options.end());
        greedy.on_action(g);
        // Feed an action that cannot match so the selector reseeds.
        greedy.on_action(lid(m, "to3"));
    }
}
