#include "kcmlab/family.hpp"

#include <algorithm>

#include "doctest.h"

using namespace kcmlab;

TEST_CASE("builtin catalog") {
    auto names = builtin_family_names();
    for (const char* expected :
         {"east1d-embedded", "east2d", "fa1f", "fa2f", "duarte", "anisotropic"}) {
        CHECK(std::find(names.begin(), names.end(), expected) != names.end());
    }
    CHECK(builtin_family("east1d-embedded").rules.size() == 1);
    CHECK(builtin_family("east2d").rules.size() == 2);
    CHECK(builtin_family("fa1f").rules.size() == 4);
    CHECK(builtin_family("fa2f").rules.size() == 6);
    CHECK(builtin_family("duarte").rules.size() == 3);
    CHECK(builtin_family("anisotropic").rules.size() == 20);
    CHECK(builtin_family("duarte").radius() == 1);
    CHECK(builtin_family("anisotropic").radius() == 2);
    CHECK_THROWS_WITH_AS(builtin_family("nope"), doctest::Contains("unknown builtin"),
                         FamilyParseError);
}

TEST_CASE("duarte rules are the three 2-subsets of left, up, down") {
    UpdateFamily duarte = builtin_family("duarte");
    std::vector<UpdateRule> expected = {
        UpdateRule{{Vec{-1, 0}, Vec{0, -1}}},
        UpdateRule{{Vec{-1, 0}, Vec{0, 1}}},
        UpdateRule{{Vec{0, -1}, Vec{0, 1}}},
    };
    std::vector<UpdateRule> got = duarte.rules;
    std::sort(got.begin(), got.end());
    std::sort(expected.begin(), expected.end());
    CHECK(got == expected);
}

TEST_CASE("serialize then parse is the identity") {
    for (const auto& name : builtin_family_names()) {
        UpdateFamily fam = builtin_family(name);
        UpdateFamily back = parse_family(serialize_family(fam));
        CHECK(back == fam);
    }
}

TEST_CASE("parsing normalizes offset order and rejects duplicates") {
    UpdateFamily a = parse_family("name: x\nrule: 1,0 0,1\n");
    UpdateFamily b = parse_family("name: x\nrule: 0,1 1,0\n");
    CHECK(a == b);
    CHECK_THROWS_WITH_AS(parse_family("rule: 0,1 1,0 0,1\n"), doctest::Contains("duplicate"),
                         FamilyParseError);
    CHECK_THROWS_WITH_AS(parse_family("rule: 1,0\nrule: 1,0\n"), doctest::Contains("duplicate"),
                         FamilyParseError);
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_family("rule: 0,0\n"), doctest::Contains("line 1"),
                         FamilyParseError);
    CHECK_THROWS_WITH_AS(parse_family("rule: 1,0\nrule: nonsense\n"), doctest::Contains("line 2"),
                         FamilyParseError);
    CHECK_THROWS_AS(parse_family(""), FamilyParseError);
    CHECK_THROWS_AS(parse_family("rule: 100,0\n"), FamilyParseError);  // beyond radius cap
}
