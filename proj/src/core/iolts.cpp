#include "iolts.hpp"

#include <algorithm>
#include <deque>

namespace ioco {

std::string to_string(const ActionLabel& label) {
    switch (label.kind) {
        case ActionKind::Input: return "?" + label.name;
        case ActionKind::Output: return "!" + label.name;
        case ActionKind::Tau: return "tau";
        case ActionKind::Delta: return "delta";
    }
    return "?";
}

namespace set_ops {

void insert(StateSet& set, StateId q) {
    auto it = std::lower_bound(set.begin(), set.end(), q);
    if (it == set.end() || *it != q) set.insert(it, q);
}

bool contains(const StateSet& set, StateId q) {
    return std::binary_search(set.begin(), set.end(), q);
}

void sort_unique(StateSet& set) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
}

}  // namespace set_ops

std::optional<LabelId> Iolts::find_label(const ActionLabel& l) const {
    auto it = label_index_.find(to_string(l));
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
}

StateSet Iolts::epsilon_closure(const StateSet& qs) const {
    if (tau_id_ == kNoLabel) return qs;
    StateSet result = qs;
    std::deque<StateId> work(qs.begin(), qs.end());
    while (!work.empty()) {
        StateId q = work.front();
        work.pop_front();
        auto [it, end] = row(q);
        for (; it != end; ++it) {
            if (it->label != tau_id_) continue;
            if (!set_ops::contains(result, it->dst)) {
                set_ops::insert(result, it->dst);
                work.push_back(it->dst);
            }
        }
    }
    return result;
}

std::vector<LabelId> Iolts::next_actions(const StateSet& qs) const {
    std::vector<LabelId> result;
    for (StateId q : qs) {
        auto [it, end] = row(q);
        for (; it != end; ++it) {
            if (it->label != tau_id_) result.push_back(it->label);
        }
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

StateSet Iolts::after(const StateSet& qs, LabelId label) const {
    StateSet hit;
    for (StateId q : qs) {
        auto [it, end] = row(q);
        for (; it != end; ++it) {
            if (it->label == label) hit.push_back(it->dst);
        }
    }
    set_ops::sort_unique(hit);
    return epsilon_closure(hit);
}

std::vector<LabelId> Iolts::out(const StateSet& qs) const {
    std::vector<LabelId> result;
    for (StateId q : qs) {
        auto [it, end] = row(q);
        for (; it != end; ++it) {
            if (labels_[it->label].kind == ActionKind::Output) result.push_back(it->label);
        }
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

IoltsBuilder::IoltsBuilder(std::size_t state_count, StateId initial)
    : state_count_(state_count), initial_(initial) {}

IoltsBuilder& IoltsBuilder::declare_input(const std::string& name) {
    inputs_.insert(name);
    return *this;
}

IoltsBuilder& IoltsBuilder::declare_output(const std::string& name) {
    outputs_.insert(name);
    return *this;
}

LabelId IoltsBuilder::intern(const ActionLabel& label) {
    auto key = to_string(label);
    auto it = label_index_.find(key);
    if (it != label_index_.end()) return it->second;
    LabelId id = static_cast<LabelId>(labels_.size());
    labels_.push_back(label);
    label_index_.emplace(std::move(key), id);
    return id;
}

IoltsBuilder& IoltsBuilder::add_transition(StateId src, const ActionLabel& label, StateId dst) {
    if (label.kind == ActionKind::Input) inputs_.insert(label.name);
    if (label.kind == ActionKind::Output) outputs_.insert(label.name);
    staged_.push_back({Transition{src, kNoLabel, dst}, label});
    return *this;
}

Iolts IoltsBuilder::build() && {
    if (state_count_ == 0) throw IocoError("model must have at least one state");
    if (initial_ >= state_count_) throw IocoError("initial state out of range");
    for (const auto& name : inputs_) {
        if (outputs_.count(name))
            throw IocoError("label '" + name + "' declared as both input and output");
    }

    Iolts m;
    m.state_count_ = state_count_;
    m.initial_ = initial_;
    m.inputs_ = std::move(inputs_);
    m.outputs_ = std::move(outputs_);

    for (auto& [t, label] : staged_) {
        if (t.src >= state_count_ || t.dst >= state_count_)
            throw IocoError("transition references state out of range");
        t.label = intern(label);
    }
    m.labels_ = std::move(labels_);
    m.label_index_ = std::move(label_index_);
    for (LabelId id = 0; id < m.labels_.size(); ++id) {
        if (m.labels_[id].kind == ActionKind::Tau) m.tau_id_ = id;
        if (m.labels_[id].kind == ActionKind::Delta) m.delta_id_ = id;
    }

    m.transitions_.reserve(staged_.size());
    for (const auto& [t, label] : staged_) m.transitions_.push_back(t);
    std::sort(m.transitions_.begin(), m.transitions_.end());
    m.transitions_.erase(std::unique(m.transitions_.begin(), m.transitions_.end()),
                         m.transitions_.end());

    m.row_offsets_.assign(state_count_ + 1, 0);
    for (const auto& t : m.transitions_) ++m.row_offsets_[t.src + 1];
    for (std::size_t q = 0; q < state_count_; ++q) m.row_offsets_[q + 1] += m.row_offsets_[q];

    m.quiescent_.assign(state_count_, 1);
    for (const auto& t : m.transitions_) {
        ActionKind k = m.labels_[t.label].kind;
        if (k == ActionKind::Output || k == ActionKind::Tau) m.quiescent_[t.src] = 0;
    }
    for (const auto& t : m.transitions_) {
        if (m.labels_[t.label].kind != ActionKind::Delta) continue;
        if (t.src != t.dst)
            throw IocoError("delta transition from state " + std::to_string(t.src) +
                            " is not a self-loop");
        if (!m.quiescent_[t.src])
            throw IocoError("delta transition on non-quiescent state " + std::to_string(t.src));
    }
    return m;
}

Iolts delta_completion(const Iolts& m) {
    if (m.has_delta()) throw IocoError("model already contains delta transitions");
    IoltsBuilder b(m.state_count(), m.initial());
    for (const auto& name : m.inputs()) b.declare_input(name);
    for (const auto& name : m.outputs()) b.declare_output(name);
    for (const auto& t : m.transitions()) b.add_transition(t.src, m.label(t.label), t.dst);
    for (StateId q = 0; q < m.state_count(); ++q) {
        if (m.quiescent(q)) b.delta(q);
    }
    return std::move(b).build();
}

const char* violation_code_name(ViolationCode code) {
    switch (code) {
        case ViolationCode::Nondeterminism: return "nondeterminism";
        case ViolationCode::TauPresent: return "tau-present";
        case ViolationCode::NotStronglyConnected: return "not-strongly-connected";
        case ViolationCode::MixedChoice: return "mixed-choice";
        case ViolationCode::IncompleteDelta: return "incomplete-delta";
    }
    return "unknown";
}

namespace {

// Iterative Tarjan over the transition graph with delta edges ignored.
// Returns true iff all states form one strongly connected component.
bool strongly_connected(const Iolts& m) {
    const std::size_t n = m.state_count();
    if (n <= 1) return true;

    std::vector<std::uint32_t> index(n, UINT32_MAX), lowlink(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<StateId> stack;
    std::uint32_t next_index = 0;
    std::size_t scc_count = 0;

    struct Frame {
        StateId q;
        const Transition* it;
        const Transition* end;
    };
    std::vector<Frame> frames;

    auto skip_delta = [&](const Transition*& it, const Transition* end) {
        while (it != end && m.label(it->label).kind == ActionKind::Delta) ++it;
    };

    for (StateId root = 0; root < n; ++root) {
        if (index[root] != UINT32_MAX) continue;
        auto [it, end] = m.row(root);
        skip_delta(it, end);
        index[root] = lowlink[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        frames.push_back({root, it, end});

        while (!frames.empty()) {
            Frame& f = frames.back();
            if (f.it != f.end) {
                StateId w = f.it->dst;
                ++f.it;
                skip_delta(f.it, f.end);
                if (index[w] == UINT32_MAX) {
                    auto [wit, wend] = m.row(w);
                    skip_delta(wit, wend);
                    index[w] = lowlink[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.push_back({w, wit, wend});
                } else if (on_stack[w]) {
                    lowlink[f.q] = std::min(lowlink[f.q], index[w]);
                }
            } else {
                StateId q = f.q;
                frames.pop_back();
                if (!frames.empty())
                    lowlink[frames.back().q] = std::min(lowlink[frames.back().q], lowlink[q]);
                if (lowlink[q] == index[q]) {
                    ++scc_count;
                    if (scc_count > 1) return false;
                    StateId w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                    } while (w != q);
                }
            }
        }
    }
    return scc_count == 1;
}

}  // namespace

std::vector<Violation> validate(const Iolts& m, bool strict) {
    std::vector<Violation> out;

    // D: duplicate (state, label) pairs. Transitions are sorted, so equal
    // pairs are adjacent.
    const auto& ts = m.transitions();
    for (std::size_t i = 1; i < ts.size(); ++i) {
        if (ts[i].src == ts[i - 1].src && ts[i].label == ts[i - 1].label &&
            (i < 2 || ts[i - 2].src != ts[i].src || ts[i - 2].label != ts[i].label)) {
            out.push_back({ViolationCode::Nondeterminism, Severity::Error, ts[i].src,
                           to_string(m.label(ts[i].label)),
                           "state " + std::to_string(ts[i].src) + " has multiple transitions for " +
                               to_string(m.label(ts[i].label))});
        }
    }

    if (strict && m.has_tau()) {
        StateId q = 0;
        for (const auto& t : ts) {
            if (m.label(t.label).kind == ActionKind::Tau) {
                q = t.src;
                break;
            }
        }
        out.push_back({ViolationCode::TauPresent, Severity::Error, q, "tau",
                       "model contains tau transitions"});
    }

    if (!strongly_connected(m)) {
        out.push_back({ViolationCode::NotStronglyConnected, Severity::Error, 0, "",
                       "model is not strongly connected over non-delta transitions"});
    }

    for (StateId q = 0; q < m.state_count(); ++q) {
        bool in = false, outp = false;
        auto [it, end] = m.row(q);
        for (; it != end; ++it) {
            ActionKind k = m.label(it->label).kind;
            in = in || k == ActionKind::Input;
            outp = outp || k == ActionKind::Output;
        }
        if (in && outp) {
            out.push_back({ViolationCode::MixedChoice, Severity::Warning, q, "",
                           "state " + std::to_string(q) + " enables both inputs and outputs"});
        }
    }

    // W: delta placement. Misplaced deltas cannot pass the builder, but a
    // model carrying some deltas while other quiescent states have none is a
    // partial completion and gets flagged.
    if (m.has_delta()) {
        LabelId delta = *m.delta_id();
        for (StateId q = 0; q < m.state_count(); ++q) {
            bool has_loop = false;
            auto [it, end] = m.row(q);
            for (; it != end; ++it) {
                if (it->label == delta) {
                    has_loop = true;
                    if (it->dst != q || !m.quiescent(q)) {
                        out.push_back({ViolationCode::IncompleteDelta, Severity::Error, q, "delta",
                                       "misplaced delta on state " + std::to_string(q)});
                    }
                }
            }
            if (m.quiescent(q) && !has_loop) {
                out.push_back({ViolationCode::IncompleteDelta, Severity::Error, q, "delta",
                               "quiescent state " + std::to_string(q) + " lacks a delta loop"});
            }
        }
    }

    return out;
}

}  // namespace ioco
