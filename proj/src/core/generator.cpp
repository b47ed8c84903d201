#include "generator.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>

#include "rng.hpp"

namespace ioco {

Digraph gen_component(std::uint32_t states, std::uint32_t degree, std::mt19937_64& rng,
                      std::uint64_t& next_action) {
    if (states == 0 || degree == 0)
        throw IocoError("gen_component: states and degree must be positive");
    Digraph g;
    g.states = states;
    g.edges.reserve(static_cast<std::size_t>(states) * degree);
    for (std::uint32_t s = 0; s < states; ++s) {
        for (std::uint32_t k = 0; k < degree; ++k) {
            const auto dst = static_cast<std::uint32_t>(uniform_index(rng, states));
            g.edges.push_back({s, next_action++, dst});
        }
    }
    return g;
}

Digraph compose(const std::vector<Digraph>& components) {
    if (components.empty()) throw IocoError("compose: no components");
    if (components.size() == 1) return components[0];

    // Per-component adjacency, preserving edge insertion order.
    std::vector<std::vector<std::vector<Digraph::Edge>>> adj(components.size());
    for (std::size_t c = 0; c < components.size(); ++c) {
        adj[c].resize(components[c].states);
        for (const auto& e : components[c].edges) adj[c][e.src].push_back(e);
    }

    std::map<std::vector<std::uint32_t>, std::uint32_t> index;
    std::deque<std::vector<std::uint32_t>> queue;
    const std::vector<std::uint32_t> start(components.size(), 0);
    index.emplace(start, 0);
    queue.push_back(start);

    Digraph product;
    product.states = 1;
    while (!queue.empty()) {
        const std::vector<std::uint32_t> tuple = std::move(queue.front());
        queue.pop_front();
        const std::uint32_t src = index.at(tuple);
        for (std::size_t c = 0; c < components.size(); ++c) {
            for (const auto& e : adj[c][tuple[c]]) {
                std::vector<std::uint32_t> next = tuple;
                next[c] = e.dst;
                auto [it, fresh] = index.emplace(next, product.states);
                if (fresh) {
                    ++product.states;
                    queue.push_back(std::move(next));
                }
                product.edges.push_back({src, e.action, it->second});
            }
        }
    }
    return product;
}

Iolts expand_rtc(const Digraph& g, std::uint32_t outputs_per_input, std::mt19937_64& rng,
                 std::uint32_t alphabet_size) {
    const std::size_t total =
        g.states + static_cast<std::size_t>(outputs_per_input) * g.edges.size();
    IoltsBuilder b(total, 0);
    auto input_name = [&](const Digraph::Edge& e) {
        return alphabet_size ? "a" + std::to_string(uniform_index(rng, alphabet_size))
                             : "in" + std::to_string(e.action);
    };
    auto output_name = [&](const Digraph::Edge& e, std::uint32_t j) {
        return alphabet_size ? "x" + std::to_string(uniform_index(rng, alphabet_size))
                             : "out" + std::to_string(e.action) + "_" + std::to_string(j);
    };

    auto fresh = static_cast<StateId>(g.states);
    for (const auto& e : g.edges) {
        if (outputs_per_input == 0) {
            b.input(e.src, input_name(e), e.dst);
            continue;
        }
        b.input(e.src, input_name(e), fresh);
        StateId prev = fresh++;
        for (std::uint32_t j = 1; j <= outputs_per_input; ++j) {
            const StateId dst = j == outputs_per_input ? e.dst : fresh;
            b.output(prev, output_name(e, j), dst);
            if (j != outputs_per_input) prev = fresh++;
        }
    }
    return delta_completion(std::move(b).build());
}

GenResult gen_model(const GenParams& params) {
    if (params.states == 0 || params.degree == 0 || params.components == 0)
        throw IocoError("gen_model: states, degree, and components must be positive");
    if (params.max_attempts == 0) throw IocoError("gen_model: max_attempts must be positive");

    std::string last_reason = "none";
    for (std::uint32_t attempt = 0; attempt < params.max_attempts; ++attempt) {
        const std::uint64_t seed = params.seed + attempt;
        auto rng = make_rng(seed);
        std::uint64_t next_action = 0;
        std::vector<Digraph> components;
        components.reserve(params.components);
        for (std::uint32_t c = 0; c < params.components; ++c)
            components.push_back(gen_component(params.states, params.degree, rng, next_action));
        Iolts model = expand_rtc(compose(components), params.outputs_per_input, rng,
                                 params.alphabet_size);
        const auto violations = validate(model, /*strict=*/true);
        if (!has_errors(violations)) return {std::move(model), seed, attempt + 1};
        for (const auto& v : violations) {
            if (v.severity == Severity::Error) {
                last_reason = violation_code_name(v.code);
                break;
            }
        }
    }
    throw IocoError("gen_model: no valid model after " + std::to_string(params.max_attempts) +
                    " attempts; last violation: " + last_reason);
}

namespace {

// Suspension-step semantics with quiescence taken from state structure.
// Stored delta loops are skipped entirely: a mutation can silence a state's
// only output, leaving a completed model's loop behind on a state that is
// quiescent now for a different reason (or vice versa).
std::vector<ActionLabel> susp_menu(const Iolts& m, const StateSet& qs) {
    std::vector<ActionLabel> menu;
    bool quiet = false;
    for (StateId q : qs) {
        if (m.quiescent(q)) quiet = true;
        auto [it, end] = m.row(q);
        for (; it != end; ++it) {
            const ActionLabel& l = m.label(it->label);
            if (l.kind == ActionKind::Input || l.kind == ActionKind::Output) menu.push_back(l);
        }
    }
    if (quiet) menu.push_back(ActionLabel::delta());
    std::sort(menu.begin(), menu.end(), [](const ActionLabel& a, const ActionLabel& b) {
        return std::pair(a.kind, a.name) < std::pair(b.kind, b.name);
    });
    menu.erase(std::unique(menu.begin(), menu.end()), menu.end());
    return menu;
}

StateSet susp_after(const Iolts& m, const StateSet& qs, const ActionLabel& l) {
    if (l.kind == ActionKind::Delta) {
        StateSet quiet;
        for (StateId q : qs)
            if (m.quiescent(q)) quiet.push_back(q);
        return m.epsilon_closure(quiet);
    }
    const auto id = m.find_label(l);
    if (!id) return {};
    return m.after(qs, *id);
}

}  // namespace

bool distinguishable(const Iolts& a, const Iolts& b, std::size_t depth_bound) {
    using Pair = std::pair<StateSet, StateSet>;
    std::set<Pair> seen;
    std::deque<std::pair<Pair, std::size_t>> queue;
    const Pair start{a.epsilon_closure({a.initial()}), b.epsilon_closure({b.initial()})};
    seen.insert(start);
    queue.push_back({start, 0});

    while (!queue.empty()) {
        auto [pair, depth] = std::move(queue.front());
        queue.pop_front();
        const auto menu_a = susp_menu(a, pair.first);
        const auto menu_b = susp_menu(b, pair.second);
        if (menu_a != menu_b) return true;
        if (depth >= depth_bound) continue;
        for (const ActionLabel& l : menu_a) {
            Pair next{susp_after(a, pair.first, l), susp_after(b, pair.second, l)};
            if (seen.insert(next).second) queue.push_back({std::move(next), depth + 1});
        }
    }
    return false;
}

std::vector<std::pair<Iolts, FaultSpec>> gen_mutants(const Iolts& model, std::size_t count,
                                                     std::mt19937_64& rng) {
    std::vector<std::pair<Iolts, FaultSpec>> mutants;
    if (count == 0) return mutants;

    std::vector<Transition> redirectable;  // inputs and outputs
    std::vector<Transition> outputs;
    for (const Transition& t : model.transitions()) {
        const ActionKind k = model.label(t.label).kind;
        if (k == ActionKind::Input || k == ActionKind::Output) redirectable.push_back(t);
        if (k == ActionKind::Output) outputs.push_back(t);
    }
    const std::vector<std::string> output_names(model.outputs().begin(), model.outputs().end());

    const std::size_t budget = std::max<std::size_t>(200, 80 * count);
    const std::size_t bound = 2 * model.state_count();
    std::set<std::string> drawn;
    for (std::size_t i = 0; i < budget && mutants.size() < count; ++i) {
        FaultSpec f;
        switch (uniform_index(rng, 3)) {
            case 0: {
                if (redirectable.empty() || model.state_count() < 2) continue;
                const Transition& t = redirectable[uniform_index(rng, redirectable.size())];
                auto target = static_cast<StateId>(uniform_index(rng, model.state_count() - 1));
                if (target >= t.dst) ++target;  // anything but the present target
                f = {FaultSpec::Kind::Redirect, t.src, model.label(t.label), t.dst, target, ""};
                break;
            }
            case 1: {
                if (outputs.empty() || output_names.size() < 2) continue;
                const Transition& t = outputs[uniform_index(rng, outputs.size())];
                std::string fresh = output_names[uniform_index(rng, output_names.size())];
                if (fresh == model.label(t.label).name) continue;
                f = {FaultSpec::Kind::RelabelOutput, t.src, model.label(t.label),
                     t.dst,                          t.dst, std::move(fresh)};
                break;
            }
            default: {
                if (outputs.empty()) continue;
                const Transition& t = outputs[uniform_index(rng, outputs.size())];
                f = {FaultSpec::Kind::DropOutput, t.src, model.label(t.label), t.dst, t.dst, ""};
                break;
            }
        }
        if (!drawn.insert(f.describe()).second) continue;
        Iolts mutant = apply_fault(model, f);
        if (!distinguishable(model, mutant, bound)) continue;
        mutants.emplace_back(std::move(mutant), std::move(f));
    }
    if (mutants.size() < count)
        throw IocoError("gen_mutants: found " + std::to_string(mutants.size()) + " of " +
                        std::to_string(count) + " distinguishable mutants within the draw budget");
    return mutants;
}

}  // namespace ioco
