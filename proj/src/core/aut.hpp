#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "iolts.hpp"

namespace ioco {

// Label naming convention used when reading Aldebaran files. Labels are
// classified in order: exact tau name, exact delta name, input marker prefix,
// output marker prefix; anything else is rejected as unmarked. The defaults
// match the convention this tool writes.
struct AutConventions {
    std::string input_marker = "?";
    std::string output_marker = "!";
    std::vector<std::string> tau_names = {"tau", "i"};
    std::vector<std::string> delta_names = {"delta"};
};

// Parses an Aldebaran document: a 'des (first,transitions,states)' header
// followed by one '(src,"label",dst)' line per transition. Accepts LF and
// CRLF, tolerates whitespace between tokens. Does not delta-complete.
// Throws ParseError with a line number on malformed input.
Iolts parse_aut(std::string_view text, const AutConventions& conv = {});

// Canonical serialization: LF line endings, transitions sorted by
// (source, rendered label, target). parse_aut(write_aut(m)) reproduces m
// with identical state numbering, and write o parse is byte-identical on
// canonical text.
std::string write_aut(const Iolts& m);

Iolts load_aut_file(const std::string& path, const AutConventions& conv = {});
void save_aut_file(const Iolts& m, const std::string& path);

}  // namespace ioco
