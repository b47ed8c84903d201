#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ioco {

using StateId = std::uint32_t;
using LabelId = std::uint32_t;

inline constexpr LabelId kNoLabel = UINT32_MAX;

// All core errors derive from this; the C API maps them to status codes.
class IocoError : public std::runtime_error {
public:
    explicit IocoError(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public IocoError {
public:
    ParseError(std::size_t line, const std::string& what)
        : IocoError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class TransportError : public IocoError {
public:
    using IocoError::IocoError;
};

enum class ActionKind : std::uint8_t {
    Input,
    Output,
    Tau,
    Delta,
};

// One observable (or internal) action. Tau and delta carry no name; equality
// is over (kind, name).
struct ActionLabel {
    ActionKind kind = ActionKind::Tau;
    std::string name;

    static ActionLabel input(std::string n) { return {ActionKind::Input, std::move(n)}; }
    static ActionLabel output(std::string n) { return {ActionKind::Output, std::move(n)}; }
    static ActionLabel tau() { return {ActionKind::Tau, {}}; }
    static ActionLabel delta() { return {ActionKind::Delta, {}}; }

    bool operator==(const ActionLabel&) const = default;
    bool is_observable() const { return kind != ActionKind::Tau; }
};

// Canonical rendering, shared with the .aut convention: "?name", "!name",
// "tau", "delta".
std::string to_string(const ActionLabel& label);

// Sorted vector of unique state ids; the working representation of the
// engine's qs and of all set-valued semantic operations.
using StateSet = std::vector<StateId>;

// Membership bitmap over a model's states with a running popcount, used for
// coverage accounting and the strategy's covered() lookups.
class VisitedSet {
public:
    VisitedSet() = default;
    explicit VisitedSet(std::size_t universe) : bits_(universe, 0) {}

    bool contains(StateId q) const { return q < bits_.size() && bits_[q] != 0; }

    void insert(StateId q) {
        if (!bits_[q]) {
            bits_[q] = 1;
            ++count_;
        }
    }

    std::uint64_t count() const { return count_; }
    std::size_t universe() const { return bits_.size(); }

private:
    std::vector<char> bits_;
    std::uint64_t count_ = 0;
};

}  // namespace ioco
