#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kcmlab/family.hpp"
#include "kcmlab/geom.hpp"

namespace kcmlab {

// Finite region of Z^2: an inclusive box or a torus with sites (x,y),
// 0 <= x < width, 0 <= y < height. An optional restriction marks the sites
// that are allowed to BECOME infected; seeds outside it stay infected and
// still feed rules.
struct Region {
    enum class Shape { box, torus };
    Shape shape = Shape::box;
    std::int64_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // box bounds, inclusive
    std::int64_t width = 0, height = 0;           // torus dimensions
    std::vector<std::uint64_t> restriction;       // empty = unrestricted

    static Region box(std::int64_t x0, std::int64_t y0, std::int64_t x1, std::int64_t y1);
    static Region torus(std::int64_t w, std::int64_t h);

    std::int64_t cols() const { return shape == Shape::box ? x1 - x0 + 1 : width; }
    std::int64_t rows() const { return shape == Shape::box ? y1 - y0 + 1 : height; }
    std::size_t site_count() const { return static_cast<std::size_t>(cols() * rows()); }

    bool in_box(Vec p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
    std::size_t index_of(Vec p) const;
    Vec site_at(std::size_t idx) const;

    bool restricted() const { return !restriction.empty(); }
    bool restriction_allows(std::size_t idx) const {
        return restriction.empty() || ((restriction[idx >> 6] >> (idx & 63)) & 1);
    }
    void allow(Vec p);  // adds p to the restriction set (allocating if needed)
};

// Bit = 1 means infected (equivalently: the site is empty, omega_x = 0).
struct Configuration {
    Region region;
    std::vector<std::uint64_t> bits;

    static Configuration empty_of(Region r);

    bool get(std::size_t idx) const { return (bits[idx >> 6] >> (idx & 63)) & 1; }
    void set(std::size_t idx) { bits[idx >> 6] |= std::uint64_t{1} << (idx & 63); }
    void clear(std::size_t idx) { bits[idx >> 6] &= ~(std::uint64_t{1} << (idx & 63)); }
    bool get(Vec p) const { return get(region.index_of(p)); }
    void set(Vec p) { set(region.index_of(p)); }
    std::size_t count() const;

    friend bool operator==(const Configuration& a, const Configuration& b) {
        return a.bits == b.bits;
    }
};

// How sites outside a box behave: permanently healthy, or infected exactly on
// the open half-plane {x : <x,u> < 0} (used by half-plane probes).
struct Exterior {
    enum class Kind { healthy, half_plane };
    Kind kind = Kind::healthy;
    Vec u{};

    static Exterior healthy() { return {}; }
    static Exterior half_plane(Vec u) { return {Kind::half_plane, u}; }
};

struct ClosureResult {
    Configuration final;
    std::int64_t rounds = 0;
    // Synchronous round at which each site first became infected; -1 = never,
    // 0 = initially infected.
    std::vector<std::int32_t> first_round;

    std::optional<std::int64_t> round_of(Vec p) const {
        std::int32_t r = first_round[final.region.index_of(p)];
        if (r < 0) return std::nullopt;
        return r;
    }
};

// Worklist closure: candidates are the reverse-offset neighbourhoods of newly
// infected sites, re-checked against the previous round and committed
// synchronously, so round tags follow the synchronous process exactly.
ClosureResult closure(const UpdateFamily& fam, const Configuration& start,
                      Exterior ext = Exterior::healthy());

// Reference oracle: the obvious scan-all-sites-until-no-change fixpoint,
// written independently of closure(). Outputs must match bit for bit.
ClosureResult closure_naive(const UpdateFamily& fam, const Configuration& start,
                            Exterior ext = Exterior::healthy());

struct HalfPlaneAdvance {
    bool plus = false;
    bool minus = false;
    // First and last line indices certified on each side (k in site k*r where
    // r = rot90cw(u)); valid when the side is true.
    std::int64_t k_begin = 0, k_end = 0;
};

// Seeds H_u inside a probe box (half-plane exterior pinned infected), adds
// `extra`, closes, and reports whether line_span consecutive sites of l_u
// beyond the window are infected on each side.
HalfPlaneAdvance half_plane_fills(const UpdateFamily& fam, Vec u, const std::vector<Vec>& extra,
                                  std::int64_t window_radius, std::int64_t line_span);

struct TUEstimate {
    double q = 0;
    std::int64_t trials = 0;
    double median_rounds = 0;  // +inf when the median itself is censored
    double ci_low = 0, ci_high = 0;
    std::int64_t censored = 0;
    std::uint64_t seed = 0;
};

// Monte Carlo median infection time of the origin on a torus under Bernoulli(q)
// initial infection, with a seeded percentile-bootstrap confidence interval.
TUEstimate estimate_T_U(const UpdateFamily& fam, double q, std::int64_t torus_w,
                        std::int64_t torus_h, std::int64_t trials, std::int64_t t_max,
                        std::uint64_t seed, unsigned jobs = 1);

}  // namespace kcmlab
