#include "kcmlab/closure.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kcmlab/parallel.hpp"
#include "kcmlab/rng.hpp"

namespace kcmlab {

Region Region::box(std::int64_t x0, std::int64_t y0, std::int64_t x1, std::int64_t y1) {
    if (x1 < x0 || y1 < y0) throw std::invalid_argument("box bounds out of order");
    Region r;
    r.shape = Shape::box;
    r.x0 = x0;
    r.y0 = y0;
    r.x1 = x1;
    r.y1 = y1;
    return r;
}

Region Region::torus(std::int64_t w, std::int64_t h) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("torus dimensions must be positive");
    Region r;
    r.shape = Shape::torus;
    r.width = w;
    r.height = h;
    return r;
}

static std::int64_t wrap(std::int64_t v, std::int64_t m) {
    std::int64_t r = v % m;
    return r < 0 ? r + m : r;
}

std::size_t Region::index_of(Vec p) const {
    if (shape == Shape::box) {
        assert(in_box(p));
        return static_cast<std::size_t>((p.y - y0) * cols() + (p.x - x0));
    }
    return static_cast<std::size_t>(wrap(p.y, height) * width + wrap(p.x, width));
}

Vec Region::site_at(std::size_t idx) const {
    std::int64_t c = cols();
    auto i = static_cast<std::int64_t>(idx);
    if (shape == Shape::box) return {x0 + i % c, y0 + i / c};
    return {i % c, i / c};
}

void Region::allow(Vec p) {
    if (restriction.empty()) restriction.assign((site_count() + 63) / 64, 0);
    std::size_t idx = index_of(p);
    restriction[idx >> 6] |= std::uint64_t{1} << (idx & 63);
}

Configuration Configuration::empty_of(Region r) {
    Configuration c;
    c.region = std::move(r);
    c.bits.assign((c.region.site_count() + 63) / 64, 0);
    return c;
}

std::size_t Configuration::count() const {
    std::size_t n = 0;
    for (std::uint64_t w : bits) n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

namespace {

// State of a site referenced by absolute coordinates, honouring the exterior
// policy for out-of-box references.
bool site_infected(const Configuration& cfg, const Exterior& ext, Vec p) {
    const Region& rg = cfg.region;
    if (rg.shape == Region::Shape::torus) return cfg.get(rg.index_of(p));
    if (rg.in_box(p)) return cfg.get(rg.index_of(p));
    if (ext.kind == Exterior::Kind::half_plane) return dot(p, ext.u) < 0;
    return false;
}

bool rule_fires_at(const UpdateFamily& fam, const Configuration& cfg, const Exterior& ext,
                   Vec x) {
    for (const UpdateRule& rule : fam.rules) {
        bool all = true;
        for (Vec xi : rule.offsets) {
            if (!site_infected(cfg, ext, x + xi)) {
                all = false;
                break;
            }
        }
        if (all) return true;
    }
    return false;
}

}  // namespace

ClosureResult closure(const UpdateFamily& fam, const Configuration& start, Exterior ext) {
    const Region& rg = start.region;
    const std::size_t n = rg.site_count();
    ClosureResult res;
    res.final = start;
    res.first_round.assign(n, -1);

    std::vector<std::uint32_t> frontier;
    frontier.reserve(n / 8 + 8);
    for (std::size_t i = 0; i < n; ++i) {
        if (start.get(i)) {
            res.first_round[i] = 0;
            frontier.push_back(static_cast<std::uint32_t>(i));
        }
    }

    std::vector<std::int32_t> stamp(n, -1);
    std::vector<std::uint32_t> candidates, newly;
    std::int64_t round = 0;
    const std::int64_t radius = fam.radius();

    while (true) {
        candidates.clear();
        auto add_candidate = [&](Vec c) {
            if (rg.shape == Region::Shape::box && !rg.in_box(c)) return;
            std::size_t idx = rg.index_of(c);
            if (res.final.get(idx)) return;
            if (stamp[idx] == static_cast<std::int32_t>(round)) return;
            stamp[idx] = static_cast<std::int32_t>(round);
            candidates.push_back(static_cast<std::uint32_t>(idx));
        };
        for (std::uint32_t f : frontier) {
            Vec fp = rg.site_at(f);
            for (const UpdateRule& rule : fam.rules)
                for (Vec xi : rule.offsets) add_candidate(fp - xi);
        }
        if (round == 0 && rg.shape == Region::Shape::box &&
            ext.kind == Exterior::Kind::half_plane) {
            // Rules reaching outside the box can fire with no interior support;
            // only sites within the rule radius of the border qualify.
            for (std::int64_t y = rg.y0; y <= rg.y1; ++y)
                for (std::int64_t x = rg.x0; x <= rg.x1; ++x)
                    if (x - rg.x0 < radius || rg.x1 - x < radius || y - rg.y0 < radius ||
                        rg.y1 - y < radius)
                        add_candidate({x, y});
        }

        newly.clear();
        for (std::uint32_t c : candidates) {
            if (!rg.restriction_allows(c)) continue;
            if (rule_fires_at(fam, res.final, ext, rg.site_at(c))) newly.push_back(c);
        }
        if (newly.empty()) break;
        ++round;
        for (std::uint32_t c : newly) {
            res.final.set(c);
            res.first_round[c] = static_cast<std::int32_t>(round);
        }
        frontier = newly;
    }
    res.rounds = round;
    return res;
}

ClosureResult closure_naive(const UpdateFamily& fam, const Configuration& start, Exterior ext) {
    const Region& rg = start.region;
    const std::size_t n = rg.site_count();
    ClosureResult res;
    res.final = start;
    res.first_round.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i)
        if (start.get(i)) res.first_round[i] = 0;

    // Full-sweep synchronous fixpoint, deliberately the dumbest correct loop.
    auto infected_abs = [&](const Configuration& cfg, Vec p) -> bool {
        if (rg.shape == Region::Shape::torus) return cfg.get(rg.index_of(p));
        if (rg.in_box(p)) return cfg.get(rg.index_of(p));
        if (ext.kind == Exterior::Kind::half_plane) return dot(p, ext.u) < 0;
        return false;
    };

    std::int64_t round = 0;
    std::vector<std::size_t> changed;
    while (true) {
        changed.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (res.final.get(i) || !rg.restriction_allows(i)) continue;
            Vec x = rg.site_at(i);
            bool fires = false;
            for (const UpdateRule& rule : fam.rules) {
                bool all = true;
                for (Vec xi : rule.offsets)
                    if (!infected_abs(res.final, x + xi)) {
                        all = false;
                        break;
                    }
                if (all) {
                    fires = true;
                    break;
                }
            }
            if (fires) changed.push_back(i);
        }
        if (changed.empty()) break;
        ++round;
        for (std::size_t i : changed) {
            res.final.set(i);
            res.first_round[i] = static_cast<std::int32_t>(round);
        }
    }
    res.rounds = round;
    return res;
}

HalfPlaneAdvance half_plane_fills(const UpdateFamily& fam, Vec u, const std::vector<Vec>& extra,
                                  std::int64_t window_radius, std::int64_t line_span) {
    if (u == Vec{0, 0}) throw std::invalid_argument("direction must be nonzero");
    const Vec r = rot90cw(u);  // positive half-line direction along l_u
    const std::int64_t step = norm_inf(r);
    const std::int64_t B = window_radius + (line_span + 2) * step + fam.radius();
    Configuration cfg = Configuration::empty_of(Region::box(-B, -B, B, B));
    for (std::int64_t y = -B; y <= B; ++y)
        for (std::int64_t x = -B; x <= B; ++x)
            if (dot(Vec{x, y}, u) < 0) cfg.set(Vec{x, y});
    for (Vec z : extra) {
        if (!cfg.region.in_box(z)) throw std::invalid_argument("extra site outside probe box");
        cfg.set(z);
    }
    ClosureResult cl = closure(fam, cfg, Exterior::half_plane(u));

    HalfPlaneAdvance out;
    out.k_begin = window_radius / step + 1;
    out.k_end = out.k_begin + line_span - 1;
    out.plus = true;
    out.minus = true;
    for (std::int64_t k = out.k_begin; k <= out.k_end; ++k) {
        if (!cl.final.get(k * r)) out.plus = false;
        if (!cl.final.get(std::int64_t{-k} * r)) out.minus = false;
        if (!out.plus && !out.minus) break;
    }
    return out;
}

namespace {

// Synchronous bootstrap sweeps on a torus, stopping as soon as the origin is
// infected or the round budget runs out.
std::optional<std::int64_t> origin_infection_round(const UpdateFamily& fam, Configuration& cfg,
                                                   std::int64_t t_max) {
    const Region& rg = cfg.region;
    const std::size_t origin = rg.index_of({0, 0});
    if (cfg.get(origin)) return 0;
    const std::size_t n = rg.site_count();
    std::vector<std::size_t> changed;
    for (std::int64_t t = 1; t <= t_max; ++t) {
        changed.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (cfg.get(i)) continue;
            Vec x = rg.site_at(i);
            for (const UpdateRule& rule : fam.rules) {
                bool all = true;
                for (Vec xi : rule.offsets)
                    if (!cfg.get(x + xi)) {
                        all = false;
                        break;
                    }
                if (all) {
                    changed.push_back(i);
                    break;
                }
            }
        }
        if (changed.empty()) return std::nullopt;  // fixpoint without the origin
        for (std::size_t i : changed) cfg.set(i);
        if (cfg.get(origin)) return t;
    }
    return std::nullopt;
}

double median_of_sorted(const std::vector<double>& v) {
    std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

}  // namespace

TUEstimate estimate_T_U(const UpdateFamily& fam, double q, std::int64_t torus_w,
                        std::int64_t torus_h, std::int64_t trials, std::int64_t t_max,
                        std::uint64_t seed, unsigned jobs) {
    if (trials <= 0) throw std::invalid_argument("trials must be positive");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0,1]");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> rounds(static_cast<std::size_t>(trials), inf);

    parallel_for_indexed(static_cast<std::size_t>(trials), jobs, [&](std::size_t t) {
        auto gen = make_stream(seed, static_cast<std::uint64_t>(t));
        Configuration cfg = Configuration::empty_of(Region::torus(torus_w, torus_h));
        const std::size_t n = cfg.region.site_count();
        for (std::size_t i = 0; i < n; ++i)
            if (sample_bernoulli(gen, q)) cfg.set(i);
        auto r = origin_infection_round(fam, cfg, t_max);
        if (r) rounds[t] = static_cast<double>(*r);
    });

    TUEstimate est;
    est.q = q;
    est.trials = trials;
    est.seed = seed;
    est.censored = static_cast<std::int64_t>(std::count(rounds.begin(), rounds.end(), inf));

    std::vector<double> sorted = rounds;
    std::sort(sorted.begin(), sorted.end());
    est.median_rounds = median_of_sorted(sorted);

    // Percentile bootstrap for the median; a dedicated stream one past the
    // last trial keeps the CI independent of the trial draws.
    const std::size_t B = 1000;
    auto gen = make_stream(seed, static_cast<std::uint64_t>(trials));
    std::vector<double> medians(B);
    std::vector<double> resample(rounds.size());
    for (std::size_t b = 0; b < B; ++b) {
        for (double& v : resample) v = rounds[uniform_below(gen, rounds.size())];
        std::sort(resample.begin(), resample.end());
        medians[b] = median_of_sorted(resample);
    }
    std::sort(medians.begin(), medians.end());
    est.ci_low = medians[static_cast<std::size_t>(0.025 * (B - 1))];
    est.ci_high = medians[static_cast<std::size_t>(std::ceil(0.975 * (B - 1)))];
    return est;
}

}  // namespace kcmlab
