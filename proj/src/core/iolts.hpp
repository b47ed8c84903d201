#pragma once

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "types.hpp"

namespace ioco {

struct Transition {
    StateId src;
    LabelId label;
    StateId dst;

    auto operator<=>(const Transition&) const = default;
};

class IoltsBuilder;

// An input-output labeled transition system: states are dense ids
// 0..state_count-1, labels are interned per model, transitions are stored
// sorted by (src, label, dst) with a CSR index by source state. Immutable
// after construction; all semantic operations are const and safe to call
// concurrently.
class Iolts {
public:
    std::size_t state_count() const { return state_count_; }
    StateId initial() const { return initial_; }
    std::size_t transition_count() const { return transitions_.size(); }
    const std::vector<Transition>& transitions() const { return transitions_; }

    // Declared alphabets (may include names with no transitions).
    const std::set<std::string>& inputs() const { return inputs_; }
    const std::set<std::string>& outputs() const { return outputs_; }

    const ActionLabel& label(LabelId id) const { return labels_[id]; }
    std::size_t label_count() const { return labels_.size(); }
    std::optional<LabelId> find_label(const ActionLabel& l) const;
    std::optional<LabelId> tau_id() const { return opt(tau_id_); }
    std::optional<LabelId> delta_id() const { return opt(delta_id_); }
    bool has_tau() const { return tau_id_ != kNoLabel; }
    bool has_delta() const { return delta_id_ != kNoLabel; }

    // Outgoing transitions of q as a contiguous, (label, dst)-sorted range.
    std::pair<const Transition*, const Transition*> row(StateId q) const {
        return {transitions_.data() + row_offsets_[q],
                transitions_.data() + row_offsets_[q + 1]};
    }

    // True iff q enables no output and no tau transition (Def. 1's condition
    // for carrying a delta self-loop).
    bool quiescent(StateId q) const { return quiescent_[q] != 0; }

    // Smallest superset of qs closed under tau transitions.
    StateSet epsilon_closure(const StateSet& qs) const;

    // Labels enabled from at least one state of qs; tau never included.
    // Expects qs epsilon-closed.
    std::vector<LabelId> next_actions(const StateSet& qs) const;

    // Epsilon-closed set of states reachable from qs via one observable
    // step of `label` (inputs, outputs, or delta). Empty when not enabled.
    StateSet after(const StateSet& qs, LabelId label) const;

    // Output-kind labels enabled from some state of qs.
    std::vector<LabelId> out(const StateSet& qs) const;

private:
    friend class IoltsBuilder;

    std::optional<LabelId> opt(LabelId id) const {
        return id == kNoLabel ? std::nullopt : std::optional<LabelId>(id);
    }

    std::size_t state_count_ = 0;
    StateId initial_ = 0;
    std::set<std::string> inputs_;
    std::set<std::string> outputs_;
    std::vector<ActionLabel> labels_;
    std::unordered_map<std::string, LabelId> label_index_;  // keyed by rendering
    LabelId tau_id_ = kNoLabel;
    LabelId delta_id_ = kNoLabel;
    std::vector<Transition> transitions_;
    std::vector<std::uint32_t> row_offsets_;
    std::vector<char> quiescent_;
};

// Accumulates states, alphabets and transitions, then checks the structural
// invariants (alphabet disjointness, id ranges, delta placement) in build().
class IoltsBuilder {
public:
    explicit IoltsBuilder(std::size_t state_count, StateId initial = 0);

    IoltsBuilder& declare_input(const std::string& name);
    IoltsBuilder& declare_output(const std::string& name);
    IoltsBuilder& add_transition(StateId src, const ActionLabel& label, StateId dst);

    // Convenience forms; input/output names are declared implicitly.
    IoltsBuilder& input(StateId src, const std::string& name, StateId dst) {
        return add_transition(src, ActionLabel::input(name), dst);
    }
    IoltsBuilder& output(StateId src, const std::string& name, StateId dst) {
        return add_transition(src, ActionLabel::output(name), dst);
    }
    IoltsBuilder& tau(StateId src, StateId dst) {
        return add_transition(src, ActionLabel::tau(), dst);
    }
    IoltsBuilder& delta(StateId q) {
        return add_transition(q, ActionLabel::delta(), q);
    }

    // Throws IocoError on any structural violation.
    Iolts build() &&;

private:
    std::size_t state_count_;
    StateId initial_;
    std::set<std::string> inputs_;
    std::set<std::string> outputs_;
    std::vector<std::pair<Transition, ActionLabel>> staged_;  // label id unresolved
    std::vector<ActionLabel> labels_;
    std::unordered_map<std::string, LabelId> label_index_;
    LabelId intern(const ActionLabel& label);
};

// Adds a delta self-loop to every quiescent state; everything else is kept.
// Rejects models that already contain delta transitions.
Iolts delta_completion(const Iolts& m);

enum class ViolationCode {
    Nondeterminism,        // D: two transitions from one state with equal label
    TauPresent,            // T: tau transitions exist (strict mode only)
    NotStronglyConnected,  // C: over the non-delta transition graph
    MixedChoice,           // I: a state enabling both inputs and outputs (warning)
    IncompleteDelta,       // W: partially delta-completed or misplaced delta
};

enum class Severity { Error, Warning };

struct Violation {
    ViolationCode code;
    Severity severity;
    StateId state;      // representative state, when meaningful
    std::string label;  // rendered label, when meaningful
    std::string message;
};

const char* violation_code_name(ViolationCode code);

// Checks the model requirements for testing: determinism, absence of tau
// (strict mode), strong connectivity over non-delta transitions, internal
// choice (warning level), and consistent delta placement. Reports every
// violation found; never throws. A model with no error-level violations is
// accepted for greedy testing.
std::vector<Violation> validate(const Iolts& m, bool strict = true);

inline bool has_errors(const std::vector<Violation>& vs) {
    for (const auto& v : vs)
        if (v.severity == Severity::Error) return true;
    return false;
}

namespace set_ops {

// Inserts into a sorted unique vector, preserving order.
void insert(StateSet& set, StateId q);
bool contains(const StateSet& set, StateId q);
void sort_unique(StateSet& set);

}  // namespace set_ops

}  // namespace ioco
