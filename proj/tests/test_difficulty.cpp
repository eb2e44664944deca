#include "kcmlab/difficulty.hpp"

#include "doctest.h"

using namespace kcmlab;

namespace {

DifficultyReport report_for(const std::string& name, const OracleParams& params = {}) {
    UpdateFamily fam = builtin_family(name);
    StableSet s = stable_set(fam);
    Classification cls = classify_tri(s);
    return family_difficulties(fam, s, cls, params);
}

UpdateFamily mirror_x(const UpdateFamily& fam) {
    UpdateFamily out;
    out.name = fam.name + "-mirror";
    for (const UpdateRule& rule : fam.rules) {
        UpdateRule r;
        for (Vec off : rule.offsets) r.offsets.push_back(Vec{-off.x, off.y});
        out.rules.push_back(r);
    }
    return parse_family(serialize_family(out));
}

}  // namespace

TEST_CASE("difficulty value ordering and formatting") {
    auto f1 = DifficultyValue::finite(1);
    auto f3 = DifficultyValue::finite(3);
    auto e4 = DifficultyValue::exceeds(4);
    CHECK(difficulty_less(f1, f3));
    CHECK(difficulty_less(f3, e4));
    CHECK_FALSE(difficulty_less(e4, f3));
    CHECK(difficulty_max(f1, e4) == e4);
    CHECK(difficulty_min(f3, e4) == f3);
    CHECK(f1.to_string() == "1");
    CHECK(e4.to_string() == ">4");
}

TEST_CASE("single-direction helper search") {
    SUBCASE("unstable directions need no help") {
        UpdateFamily fam = builtin_family("fa1f");
        DirectionDifficulty d = alpha_of_direction(fam, Vec{1, 0});
        CHECK(d.value == DifficultyValue::finite(0));
    }

    SUBCASE("duarte needs one helper towards the isolated direction") {
        UpdateFamily fam = builtin_family("duarte");
        DirectionDifficulty d = alpha_of_direction(fam, Vec{1, 0});
        CHECK(d.value == DifficultyValue::finite(1));
        REQUIRE(d.plus_size.has_value());
        REQUIRE(d.minus_size.has_value());
        CHECK(*d.plus_size == 1);
        CHECK(*d.minus_size == 1);
        CHECK(d.plus_certificate.size() == 1);
        CHECK(d.minus_certificate.size() == 1);
    }

    SUBCASE("fa2f needs one helper along each axis") {
        UpdateFamily fam = builtin_family("fa2f");
        for (Vec u : {Vec{1, 0}, Vec{0, 1}, Vec{-1, 0}, Vec{0, -1}}) {
            DirectionDifficulty d = alpha_of_direction(fam, u);
            CAPTURE(u.x);
            CAPTURE(u.y);
            CHECK(d.value == DifficultyValue::finite(1));
        }
    }

    SUBCASE("the anisotropic family is harder vertically than horizontally") {
        UpdateFamily fam = builtin_family("anisotropic");
        CHECK(alpha_of_direction(fam, Vec{1, 0}).value == DifficultyValue::finite(1));
        CHECK(alpha_of_direction(fam, Vec{-1, 0}).value == DifficultyValue::finite(1));
        DirectionDifficulty up = alpha_of_direction(fam, Vec{0, 1});
        CHECK(up.value == DifficultyValue::finite(2));
        CHECK(alpha_of_direction(fam, Vec{0, -1}).value == DifficultyValue::finite(2));
        REQUIRE(up.plus_size.has_value());
        CHECK(*up.plus_size == 2);
    }

    SUBCASE("a starved budget raises an error instead of guessing") {
        UpdateFamily fam = builtin_family("duarte");
        OracleParams p;
        p.budget = 3;
        CHECK_THROWS_AS(alpha_of_direction(fam, Vec{1, 0}, p), OracleBudgetError);
    }
}

TEST_CASE("family-level difficulty reports") {
    SUBCASE("duarte") {
        DifficultyReport r = report_for("duarte");
        CHECK(r.alpha == DifficultyValue::finite(1));
        CHECK(r.beta == DifficultyValue::exceeds(4));
        CHECK(r.alpha_witness == Vec{1, 0});
        CHECK_FALSE(r.balanced);
        CHECK(r.rooted_label == "alpha-rooted");
        REQUIRE(r.per_direction.size() == 1);
        CHECK(r.per_direction[0].u == Vec{1, 0});
    }

    SUBCASE("fa2f") {
        DifficultyReport r = report_for("fa2f");
        CHECK(r.alpha == DifficultyValue::finite(1));
        CHECK(r.beta == DifficultyValue::finite(1));
        CHECK(r.balanced);
        CHECK(r.rooted_label == "beta-unrooted");
        CHECK(r.per_direction.size() == 4);
        const DirectionDifficulty* d = r.find(Vec{0, -1});
        REQUIRE(d != nullptr);
        CHECK(d->value == DifficultyValue::finite(1));
    }

    SUBCASE("anisotropic") {
        DifficultyReport r = report_for("anisotropic");
        CHECK(r.alpha == DifficultyValue::finite(1));
        CHECK(r.beta == DifficultyValue::finite(1));
        CHECK_FALSE(r.balanced);
        CHECK(r.rooted_label == "beta-unrooted");
    }

    SUBCASE("supercritical east2d reports a zero alpha and balance") {
        DifficultyReport r = report_for("east2d");
        CHECK(r.alpha == DifficultyValue::finite(0));
        CHECK(r.balanced);
        CHECK(r.per_direction.empty());
        CHECK(r.rooted_label.empty());
    }

    SUBCASE("fa1f with no stable directions at all") {
        DifficultyReport r = report_for("fa1f");
        CHECK(r.alpha == DifficultyValue::finite(0));
        CHECK(r.beta == DifficultyValue::finite(0));
        CHECK(r.per_direction.empty());
    }
}

TEST_CASE("alpha never exceeds beta") {
    for (const auto& name : {"duarte", "fa2f", "anisotropic"}) {
        DifficultyReport r = report_for(name);
        CAPTURE(name);
        CHECK_FALSE(difficulty_less(r.beta, r.alpha));
    }
}

TEST_CASE("mirroring the family mirrors per-direction difficulties") {
    UpdateFamily fam = builtin_family("anisotropic");
    UpdateFamily mir = mirror_x(fam);
    StableSet sm = stable_set(mir);
    Classification cm = classify_tri(sm);
    DifficultyReport rm = family_difficulties(mir, sm, cm);
    DifficultyReport r = report_for("anisotropic");
    CHECK(rm.alpha == r.alpha);
    CHECK(rm.beta == r.beta);
    for (const DirectionDifficulty& d : r.per_direction) {
        const DirectionDifficulty* twin = rm.find(Vec{-d.u.x, d.u.y});
        REQUIRE(twin != nullptr);
        CHECK(twin->value == d.value);
    }
}
