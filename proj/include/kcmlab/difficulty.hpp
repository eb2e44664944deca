#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kcmlab/direction.hpp"
#include "kcmlab/family.hpp"
#include "kcmlab/geom.hpp"

namespace kcmlab {

// Either an exact finite value or "larger than the search bound".
struct DifficultyValue {
    enum class Kind { finite, exceeds };
    Kind kind = Kind::finite;
    std::int64_t value = 0;

    static DifficultyValue finite(std::int64_t k) { return {Kind::finite, k}; }
    static DifficultyValue exceeds(std::int64_t bound) { return {Kind::exceeds, bound}; }
    bool is_finite() const { return kind == Kind::finite; }
    std::string to_string() const;

    friend bool operator==(const DifficultyValue&, const DifficultyValue&) = default;
};

// exceeds(b) is treated as larger than every finite value (finite values never
// exceed the bound by construction).
bool difficulty_less(const DifficultyValue& a, const DifficultyValue& b);
DifficultyValue difficulty_max(const DifficultyValue& a, const DifficultyValue& b);
DifficultyValue difficulty_min(const DifficultyValue& a, const DifficultyValue& b);

struct OracleParams {
    std::int64_t bound = 4;          // largest helper-set size searched
    std::int64_t window_radius = 0;  // 0 = 8 * family radius
    std::int64_t line_span = 64;     // consecutive line sites required
    std::int64_t budget = 0;         // 0 = default / KCMLAB_BUDGET env
};

struct OracleBudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Result of the bounded search for the smallest seed set letting the
// half-plane advance along its boundary line on each side.
struct DirectionDifficulty {
    Vec u{};
    DifficultyValue value;
    std::optional<std::int64_t> plus_size, minus_size;
    std::vector<Vec> plus_certificate, minus_certificate;
};

// Requires u primitive and either unstable or an isolated stable direction;
// stable directions interior to a stable arc have unbounded difficulty and are
// handled by the family-level aggregation directly.
DirectionDifficulty alpha_of_direction(const UpdateFamily& fam, Vec u,
                                       const OracleParams& params = {});

struct DifficultyReport {
    DifficultyValue alpha, beta;
    Vec alpha_witness{};
    bool balanced = false;
    std::string rooted_label;  // critical families: "alpha-rooted",
                               // "beta-unrooted" or "undecided at bound"
    std::vector<DirectionDifficulty> per_direction;  // one per isolated stable direction

    const DirectionDifficulty* find(Vec u) const;
};

DifficultyReport family_difficulties(const UpdateFamily& fam, const StableSet& s,
                                     const Classification& cls,
                                     const OracleParams& params = {});

std::int64_t oracle_budget_default();

}  // namespace kcmlab
