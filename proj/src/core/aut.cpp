#include "aut.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace ioco {

namespace {

struct Cursor {
    std::string_view line;
    std::size_t pos = 0;
    std::size_t line_no;

    void skip_ws() {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    }

    void expect(char c, const char* what) {
        skip_ws();
        if (pos >= line.size() || line[pos] != c)
            throw ParseError(line_no, std::string("expected '") + c + "' " + what);
        ++pos;
    }

    std::uint64_t number(const char* what) {
        skip_ws();
        std::uint64_t value = 0;
        auto begin = line.data() + pos;
        auto end = line.data() + line.size();
        auto [ptr, ec] = std::from_chars(begin, end, value);
        if (ec != std::errc() || ptr == begin)
            throw ParseError(line_no, std::string("expected number for ") + what);
        pos += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    std::string quoted_label() {
        expect('"', "before label");
        auto close = line.find('"', pos);
        if (close == std::string_view::npos)
            throw ParseError(line_no, "unterminated label string");
        std::string label(line.substr(pos, close - pos));
        pos = close + 1;
        return label;
    }

    void end_of_line(const char* what) {
        skip_ws();
        if (pos < line.size())
            throw ParseError(line_no, std::string("trailing characters after ") + what);
    }
};

ActionLabel classify(const std::string& raw, const AutConventions& conv, std::size_t line_no) {
    for (const auto& t : conv.tau_names)
        if (raw == t) return ActionLabel::tau();
    for (const auto& d : conv.delta_names)
        if (raw == d) return ActionLabel::delta();
    if (!conv.input_marker.empty() && raw.starts_with(conv.input_marker))
        return ActionLabel::input(raw.substr(conv.input_marker.size()));
    if (!conv.output_marker.empty() && raw.starts_with(conv.output_marker))
        return ActionLabel::output(raw.substr(conv.output_marker.size()));
    throw ParseError(line_no, "unmarked label \"" + raw + "\" (expected '" + conv.input_marker +
                                  "' or '" + conv.output_marker + "' prefix, tau, or delta)");
}

std::string_view chomp(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.remove_suffix(1);
    return line;
}

}  // namespace

Iolts parse_aut(std::string_view text, const AutConventions& conv) {
    std::size_t line_no = 0;
    std::size_t offset = 0;

    auto next_line = [&](std::string_view& out) -> bool {
        if (offset >= text.size()) return false;
        auto nl = text.find('\n', offset);
        if (nl == std::string_view::npos) nl = text.size();
        out = chomp(text.substr(offset, nl - offset));
        offset = nl + 1;
        ++line_no;
        return true;
    };

    std::string_view header;
    do {
        if (!next_line(header)) throw ParseError(line_no, "empty document, expected 'des' header");
    } while (chomp(header).empty());

    Cursor h{header, 0, line_no};
    h.skip_ws();
    if (!header.substr(h.pos).starts_with("des"))
        throw ParseError(line_no, "expected 'des' header");
    h.pos += 3;
    h.expect('(', "after 'des'");
    std::uint64_t first = h.number("first state");
    h.expect(',', "after first state");
    std::uint64_t trans_count = h.number("transition count");
    h.expect(',', "after transition count");
    std::uint64_t state_count = h.number("state count");
    h.expect(')', "after state count");
    h.end_of_line("header");

    if (state_count == 0) throw ParseError(line_no, "state count must be positive");
    if (first >= state_count) throw ParseError(line_no, "first state out of range");

    IoltsBuilder b(state_count, static_cast<StateId>(first));
    std::uint64_t seen = 0;
    std::string_view line;
    while (next_line(line)) {
        if (line.empty()) continue;
        Cursor c{line, 0, line_no};
        c.expect('(', "at start of transition");
        std::uint64_t src = c.number("source state");
        c.expect(',', "after source state");
        std::string raw = c.quoted_label();
        c.expect(',', "after label");
        std::uint64_t dst = c.number("target state");
        c.expect(')', "after target state");
        c.end_of_line("transition");
        if (src >= state_count || dst >= state_count)
            throw ParseError(line_no, "state id out of range (state count is " +
                                          std::to_string(state_count) + ")");
        b.add_transition(static_cast<StateId>(src), classify(raw, conv, line_no),
                         static_cast<StateId>(dst));
        ++seen;
    }
    if (seen != trans_count)
        throw ParseError(line_no, "header declares " + std::to_string(trans_count) +
                                      " transitions but " + std::to_string(seen) + " found");

    try {
        return std::move(b).build();
    } catch (const IocoError& e) {
        throw ParseError(line_no, e.what());
    }
}

std::string write_aut(const Iolts& m) {
    std::vector<std::pair<std::string, const Transition*>> rendered;
    rendered.reserve(m.transition_count());
    for (const auto& t : m.transitions()) rendered.push_back({to_string(m.label(t.label)), &t});
    std::sort(rendered.begin(), rendered.end(), [](const auto& a, const auto& b) {
        if (a.second->src != b.second->src) return a.second->src < b.second->src;
        if (a.first != b.first) return a.first < b.first;
        return a.second->dst < b.second->dst;
    });

    std::ostringstream os;
    os << "des (" << m.initial() << ',' << m.transition_count() << ',' << m.state_count() << ")\n";
    for (const auto& [label, t] : rendered)
        os << '(' << t->src << ",\"" << label << "\"," << t->dst << ")\n";
    return os.str();
}

Iolts load_aut_file(const std::string& path, const AutConventions& conv) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IocoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_aut(buf.str(), conv);
    } catch (const ParseError& e) {
        throw IocoError(path + ": " + e.what());
    }
}

void save_aut_file(const Iolts& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IocoError("cannot open " + path + " for writing");
    out << write_aut(m);
    if (!out) throw IocoError("write to " + path + " failed");
}

}  // namespace ioco
