#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kcmlab/family.hpp"
#include "kcmlab/geom.hpp"

namespace kcmlab {

// Closed counterclockwise arc of directions from a to b (both primitive).
struct Arc {
    Vec a{}, b{};
    friend bool operator==(const Arc&, const Arc&) = default;
};

// The set of stable directions of an update family: a finite union of closed
// arcs and isolated points on the circle of rational directions.
struct StableSet {
    std::vector<Arc> arcs;
    std::vector<Vec> isolated;
    bool full_circle = false;

    bool empty() const { return !full_circle && arcs.empty() && isolated.empty(); }
    bool contains(Vec u) const;  // u need not be primitive
    std::string to_string() const;
};

enum class ClassLabel { supercritical, critical, subcritical };
std::string to_string(ClassLabel label);

struct Classification {
    ClassLabel label = ClassLabel::subcritical;
    bool rooted = false;            // meaningful for supercritical families
    std::optional<Vec> witness;     // supercritical: open semicircle free of
                                    // stable directions (both semicircles free
                                    // when unrooted); critical: open semicircle
                                    // meeting no stable arc
};

// u is unstable iff some rule fits strictly inside the open half-plane
// {x : <x,u> < 0}; this is a one-step exact test.
bool is_unstable(const UpdateFamily& fam, Vec u);

// The open arc of directions destabilised by a single rule (empty when the
// rule never fits inside any open half-plane). Endpoints are primitive and the
// arc is open on both sides.
std::optional<Arc> unstable_arc(const UpdateRule& rule);

StableSet stable_set(const UpdateFamily& fam);

// Candidate semicircle centres sufficient to decide every semicircle predicate
// against the stable set: perpendiculars of all feature directions plus one
// representative inside each gap between consecutive candidates, sorted
// counterclockwise from (1,0). Falls back to {(1,0)} when the set is empty.
std::vector<Vec> semicircle_candidates(const StableSet& s);

// Does the closed arc meet the open semicircle {u : <w,u> > 0}? True iff an
// endpoint lies strictly inside or the arc walks across the whole semicircle.
bool arc_meets_open_semicircle(const Arc& arc, Vec w);

Classification classify_tri(const StableSet& s);

// Directions the half-ring construction must respect inside the open
// semicircle around u: u itself, isolated stable directions, perpendiculars of
// rule offsets, all closed under reflection about u, restricted to the open
// semicircle and sorted clockwise (first element nearest rot90ccw(u)).
// Throws std::invalid_argument when a stable arc meets the open semicircle.
std::vector<Vec> quasi_stable_directions(const UpdateFamily& fam, const StableSet& s, Vec u);

}  // namespace kcmlab
