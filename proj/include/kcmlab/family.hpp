#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "kcmlab/geom.hpp"

namespace kcmlab {

// Largest supported |offset coordinate|; bounds all window sizes downstream.
inline constexpr std::int64_t kMaxRuleRadius = 64;

struct FamilyParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One update rule: a finite set of nonzero offsets. A site x becomes infected
// when all of X + x is infected for some rule X. Offsets are kept sorted
// lexicographically and duplicate-free, so equal rules compare equal.
struct UpdateRule {
    std::vector<Vec> offsets;

    friend bool operator==(const UpdateRule&, const UpdateRule&) = default;
    friend auto operator<=>(const UpdateRule&, const UpdateRule&) = default;
};

struct UpdateFamily {
    std::string name;
    std::vector<UpdateRule> rules;

    // Largest |coordinate| over all offsets.
    std::int64_t radius() const;

    friend bool operator==(const UpdateFamily& a, const UpdateFamily& b) {
        return a.name == b.name && a.rules == b.rules;
    }
};

// Family file format (UTF-8): optional "name: <id>" header; one line per rule,
//   rule: dx1,dy1 dx2,dy2 ...
// '#' starts a comment; blank lines and extra whitespace are ignored.
UpdateFamily parse_family(const std::string& text);
std::string serialize_family(const UpdateFamily& f);

UpdateFamily load_family_file(const std::string& path);

// Canonical builtin families.
UpdateFamily builtin_family(const std::string& name);
std::vector<std::string> builtin_family_names();

}  // namespace kcmlab
