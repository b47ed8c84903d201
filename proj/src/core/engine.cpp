#include "engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>

#include "rng.hpp"

namespace ioco {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::CoverageReached: return "coverage-reached";
        case Verdict::FailUnexpectedOutput: return "fail-unexpected-output";
        case Verdict::FailUnexpectedQuiescence: return "fail-unexpected-quiescence";
        case Verdict::BudgetExhausted: return "budget-exhausted";
    }
    return "unknown";
}

Branch choose_branch(bool inputs_enabled, bool observations_possible, double input_bias,
                     std::mt19937_64& rng) {
    if (!inputs_enabled && !observations_possible)
        throw IocoError("choose_branch: no action enabled");
    if (!inputs_enabled) return Branch::Listen;
    if (!observations_possible) return Branch::Send;
    return bernoulli(rng, input_bias) ? Branch::Send : Branch::Listen;
}

namespace {

std::uint32_t states_needed(double target, std::uint32_t n) {
    if (target <= 0.0) return 0;
    // Smallest k with k/n >= target; the epsilon absorbs representation
    // error in products like 0.9 * 10.
    const double raw = std::ceil(target * static_cast<double>(n) - 1e-9);
    return static_cast<std::uint32_t>(std::min<double>(raw, n));
}

std::unique_ptr<InputChooser> make_chooser(const EngineConfig& cfg) {
    const std::uint64_t seed = derive_seed(cfg.seed, 0x5e1ec7, 0, 0);
    if (cfg.strategy == StrategyKind::Greedy)
        return std::make_unique<GreedyChooser>(seed, GreedyOptions{cfg.depth, true});
    return std::make_unique<RandomChooser>(seed);
}

}  // namespace

RunReport run(const Iolts& m, SutPort& port, const EngineConfig& cfg) {
    if (cfg.coverage_target <= 0.0 || cfg.coverage_target > 1.0)
        throw IocoError("run: coverage_target must be in (0, 1]");
    if (cfg.input_bias < 0.0 || cfg.input_bias > 1.0)
        throw IocoError("run: input_bias must be in [0, 1]");

    // Quiescence observations need their self-loops in the model; absence
    // of any delta transition means the caller skipped completion.
    const Iolts model = m.has_delta() ? m : delta_completion(m);

    const std::uint32_t needed = states_needed(cfg.coverage_target, model.state_count());
    auto chooser = make_chooser(cfg);
    auto branch_rng = make_rng(derive_seed(cfg.seed, 0xb4a9c4, 0, 0));

    RunReport report;
    report.verdict = Verdict::CoverageReached;
    VisitedSet visited(model.state_count());
    StateSet qs = model.epsilon_closure({model.initial()});
    std::uint64_t t = 0;

    auto mark = [&] {
        for (StateId q : qs) visited.insert(q);
    };
    auto curve_point = [&] {
        const CurvePoint point{t, static_cast<std::uint32_t>(visited.count())};
        auto& curve = report.coverage_curve;
        if (!curve.empty() && curve.back().transitions == point.transitions &&
            curve.back().states_visited == point.states_visited)
            return;
        curve.push_back(point);
    };
    auto finish = [&](Verdict v) {
        // States entered by the last step have not been marked yet; fold
        // them in so the final curve point reflects the whole run.
        mark();
        curve_point();
        report.verdict = v;
        report.transitions_taken = t;
        return report;
    };

    for (;;) {
        if (visited.count() >= needed) return finish(Verdict::CoverageReached);
        if (cfg.max_transitions != 0 && t >= cfg.max_transitions)
            return finish(Verdict::BudgetExhausted);
        mark();
        curve_point();

        std::vector<LabelId> inputs;
        std::vector<LabelId> outputs;  // stays sorted: filtered from a sorted list
        bool delta_enabled = false;
        for (LabelId a : model.next_actions(qs)) {
            switch (model.label(a).kind) {
                case ActionKind::Input: inputs.push_back(a); break;
                case ActionKind::Output: outputs.push_back(a); break;
                case ActionKind::Delta: delta_enabled = true; break;
                case ActionKind::Tau: break;
            }
        }

        const Branch branch = choose_branch(!inputs.empty(), !outputs.empty() || delta_enabled,
                                            cfg.input_bias, branch_rng);

        if (branch == Branch::Send) {
            const LabelId a = chooser->choose(model, qs, inputs, visited);
            port.send(model.label(a).name);
            report.trace.push_back(model.label(a));
            qs = model.after(qs, a);
            ++t;
            chooser->on_action(a);
            continue;
        }

        const auto received = port.receive(std::chrono::milliseconds(cfg.timeout_millis));
        LabelId observed;
        if (received) {
            const auto id = model.find_label(ActionLabel::output(*received));
            if (!id || !std::binary_search(outputs.begin(), outputs.end(), *id)) {
                report.offending = ActionLabel::output(*received);
                return finish(Verdict::FailUnexpectedOutput);
            }
            observed = *id;
        } else {
            if (!delta_enabled) {
                report.offending = ActionLabel::delta();
                return finish(Verdict::FailUnexpectedQuiescence);
            }
            observed = *model.delta_id();
        }
        report.trace.push_back(model.label(observed));
        qs = model.after(qs, observed);
        ++t;
        chooser->on_action(observed);
    }
}

}  // namespace ioco
