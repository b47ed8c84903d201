#include "simulator.hpp"

#include <algorithm>
#include <thread>

#include "rng.hpp"

namespace ioco {

std::string FaultSpec::describe() const {
    switch (kind) {
        case Kind::Redirect:
            return "redirect " + std::to_string(src) + " -" + to_string(label) + "-> " +
                   std::to_string(old_target) + " to " + std::to_string(new_target);
        case Kind::RelabelOutput:
            return "relabel " + std::to_string(src) + " -" + to_string(label) + "-> to !" +
                   new_name;
        case Kind::DropOutput:
            return "drop " + std::to_string(src) + " -" + to_string(label) + "->";
    }
    return "?";
}

Iolts apply_fault(const Iolts& m, const FaultSpec& fault) {
    if (fault.src >= m.state_count())
        throw IocoError("fault references state " + std::to_string(fault.src) + " out of range");
    auto id = m.find_label(fault.label);
    if (!id) throw IocoError("fault references unknown label " + to_string(fault.label));

    auto matches = [&](const Transition& t) {
        if (t.src != fault.src || t.label != *id) return false;
        return fault.kind != FaultSpec::Kind::Redirect || t.dst == fault.old_target;
    };
    bool found = false;

    IoltsBuilder b(m.state_count(), m.initial());
    for (const auto& name : m.inputs()) b.declare_input(name);
    for (const auto& name : m.outputs()) b.declare_output(name);
    for (const auto& t : m.transitions()) {
        if (!found && matches(t)) {
            found = true;
            switch (fault.kind) {
                case FaultSpec::Kind::Redirect:
                    if (fault.new_target >= m.state_count())
                        throw IocoError("fault redirect target out of range");
                    b.add_transition(t.src, m.label(t.label), fault.new_target);
                    break;
                case FaultSpec::Kind::RelabelOutput:
                    if (m.label(t.label).kind != ActionKind::Output)
                        throw IocoError("relabel fault on a non-output transition");
                    if (!m.outputs().count(fault.new_name))
                        throw IocoError("relabel target '" + fault.new_name +
                                        "' is not a declared output");
                    b.output(t.src, fault.new_name, t.dst);
                    break;
                case FaultSpec::Kind::DropOutput:
                    if (m.label(t.label).kind != ActionKind::Output)
                        throw IocoError("drop fault on a non-output transition");
                    b.tau(t.src, t.dst);
                    break;
            }
            continue;
        }
        b.add_transition(t.src, m.label(t.label), t.dst);
    }
    if (!found) throw IocoError("fault matches no transition: " + fault.describe());
    return std::move(b).build();
}

Simulator::Simulator(Iolts model, std::uint64_t seed, TimeMode mode)
    : model_(std::move(model)),
      current_(model_.initial()),
      seed_(seed),
      rng_(make_rng(seed)),
      mode_(mode) {
    run_to_completion();
}

bool Simulator::try_send(const std::string& input) {
    auto id = model_.find_label(ActionLabel::input(input));
    if (!id) return false;
    std::vector<StateId> targets;
    auto [it, end] = model_.row(current_);
    for (; it != end; ++it) {
        if (it->label == *id) targets.push_back(it->dst);
    }
    if (targets.empty()) return false;
    current_ = targets.size() == 1 ? targets[0]
                                   : targets[uniform_index(rng_, targets.size())];
    run_to_completion();
    return true;
}

void Simulator::run_to_completion() {
    // Autonomous phase: follow output and internal transitions until a
    // quiescent state. A walk longer than the state count cannot terminate
    // on a deterministic model, so it is reported as a model defect.
    std::size_t steps = 0;
    for (;;) {
        std::vector<const Transition*> enabled;
        auto [it, end] = model_.row(current_);
        for (; it != end; ++it) {
            ActionKind k = model_.label(it->label).kind;
            if (k == ActionKind::Output || k == ActionKind::Tau) enabled.push_back(it);
        }
        if (enabled.empty()) return;
        if (++steps > model_.state_count())
            throw IocoError("model defect: autonomous output cycle at state " +
                            std::to_string(current_));
        const Transition* t = enabled.size() == 1
                                  ? enabled[0]
                                  : enabled[uniform_index(rng_, enabled.size())];
        if (model_.label(t->label).kind == ActionKind::Output) {
            std::lock_guard lock(queue_mutex_);
            queue_.push_back(model_.label(t->label).name);
        }
        current_ = t->dst;
    }
}

std::optional<std::string> Simulator::receive(std::chrono::milliseconds timeout) {
    {
        std::lock_guard lock(queue_mutex_);
        if (!queue_.empty()) {
            std::string head = std::move(queue_.front());
            queue_.pop_front();
            return head;
        }
    }
    // Nothing queued: emission happens eagerly at send time, so nothing can
    // arrive while we wait. Wall-clock mode still honors the timeout.
    if (mode_ == TimeMode::WallClock && timeout.count() > 0)
        std::this_thread::sleep_for(timeout);
    return std::nullopt;
}

void Simulator::reset() {
    {
        std::lock_guard lock(queue_mutex_);
        queue_.clear();
    }
    current_ = model_.initial();
    rng_ = make_rng(seed_);
    // The initial state may be non-quiescent; replay its burst.
    run_to_completion();
}

std::size_t Simulator::queued() const {
    std::lock_guard lock(queue_mutex_);
    return queue_.size();
}

void Simulator::mutate(const FaultSpec& fault) {
    model_ = apply_fault(model_, fault);
}

}  // namespace ioco
