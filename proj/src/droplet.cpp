#include "kcmlab/droplet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>

namespace kcmlab {

std::string to_string(SpreadMode mode) {
    switch (mode) {
        case SpreadMode::advance_one: return "advance-one";
        case SpreadMode::advance_width: return "advance-width";
        case SpreadMode::corollary: return "corollary";
        case SpreadMode::generalized: return "generalized";
    }
    return "?";
}

bool HalfRing::contains(Vec x) const {
    for (const VStrip& s : strips) {
        std::int64_t a = dot(x, s.v), g = dot(x, uperp);
        if (a >= s.A && a <= s.A + s.W && g >= s.Glo && g <= s.Ghi) return true;
    }
    return false;
}

bool HalfRing::gen_contains(Vec x) const {
    for (const VStrip& s : strips) {
        std::int64_t g = dot(x, uperp);
        if (g < s.Glo || g > s.Ghi) continue;
        std::int64_t a = dot(x, s.v);
        // Thirds live on a x3 scaled grid so no divisibility is required.
        bool top_third = 3 * g >= 3 * s.Ghi - (s.Ghi - s.Glo);
        bool in_strip = a >= s.A && a <= s.A + s.W;
        bool notch = in_strip && top_third && 3 * a <= 3 * s.A + s.W;
        bool tab = top_third && 3 * a >= 3 * (s.A + s.W) && 3 * a <= 3 * (s.A + s.W) + s.W;
        if ((in_strip && !notch) || tab) return true;
    }
    return false;
}

HalfRing build_half_ring(const UpdateFamily& fam, const StableSet& s, Vec u, std::int64_t w,
                         std::int64_t ell, Vec anchor, std::int64_t first_ell) {
    if (w < 1 || ell < 1) throw std::invalid_argument("half-ring needs w >= 1 and ell >= 1");
    HalfRing ring;
    ring.u = primitive(u);
    ring.uperp = rot90ccw(ring.u);
    ring.w = w;
    ring.ell = ell;
    Vec P = anchor;
    ring.corners.push_back(P);
    std::vector<Vec> dirs = quasi_stable_directions(fam, s, ring.u);
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        Vec v = dirs[i];
        std::int64_t len = (i == 0 && first_ell > 0) ? first_ell : ell;
        VStrip st;
        st.v = v;
        st.A = dot(P, v);
        st.W = w * dot(ring.u, v);
        st.Ghi = dot(P, ring.uperp);
        st.length = len;
        P = P - len * rot90ccw(v);
        st.Glo = dot(P, ring.uperp);
        ring.strips.push_back(st);
        ring.corners.push_back(P);
    }
    return ring;
}

namespace {

// Lattice point with <z,v> = 1 for primitive v, via the extended gcd.
Vec unit_functional_point(Vec v) {
    std::int64_t old_r = v.x, r = v.y;
    std::int64_t old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        std::int64_t q = old_r / r;
        std::int64_t tmp = old_r - q * r;
        old_r = r;
        r = tmp;
        tmp = old_s - q * s;
        old_s = s;
        s = tmp;
        tmp = old_t - q * t;
        old_t = t;
        t = tmp;
    }
    Vec z{old_s, old_t};
    if (old_r < 0) z = -z;
    assert(dot(z, v) == 1);
    return z;
}

// Closure under restriction, cross-checked between both engines.
Configuration restricted_close(const UpdateFamily& fam, const Configuration& start) {
    ClosureResult fast = closure(fam, start);
    ClosureResult ref = closure_naive(fam, start);
    if (!(fast.final == ref.final) || fast.rounds != ref.rounds)
        throw std::logic_error("closure engines disagree under restriction");
    return fast.final;
}

// Translate the pattern so its lowest <.,v> level sits on `line`, then slide
// along the line until every site satisfies the host predicate; the search
// starts from the preferred transversal value and is bounded by [g_lo, g_hi].
std::optional<std::vector<Vec>> place_pattern(const std::vector<Vec>& pattern, Vec v,
                                              std::int64_t line, Vec gdir, std::int64_t g_pref,
                                              std::int64_t g_lo, std::int64_t g_hi,
                                              const std::function<bool(Vec)>& host) {
    assert(!pattern.empty());
    std::int64_t lv = dot(pattern[0], v);
    for (Vec z : pattern) lv = std::min(lv, dot(z, v));
    Vec base0 = (line - lv) * unit_functional_point(v);
    Vec rv = rot90cw(v);
    std::int64_t grv = dot(rv, gdir);
    assert(grv != 0);
    std::int64_t g0 = dot(base0, gdir);
    auto div_floor = [](std::int64_t a, std::int64_t b) {
        std::int64_t q = a / b, r = a % b;
        return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
    };
    auto div_ceil = [&](std::int64_t a, std::int64_t b) { return -div_floor(-a, b); };
    std::int64_t t_lo, t_hi;
    if (grv > 0) {
        t_lo = div_ceil(g_lo - g0, grv);
        t_hi = div_floor(g_hi - g0, grv);
    } else {
        t_lo = div_ceil(g_hi - g0, grv);
        t_hi = div_floor(g_lo - g0, grv);
    }
    if (t_lo > t_hi) return std::nullopt;
    std::int64_t t_pref = static_cast<std::int64_t>(
        std::llround(static_cast<double>(g_pref - g0) / static_cast<double>(grv)));
    t_pref = std::clamp(t_pref, t_lo, t_hi);
    for (std::int64_t d = 0; t_pref + d <= t_hi || t_pref - d >= t_lo; ++d) {
        for (int sgn = 0; sgn < (d == 0 ? 1 : 2); ++sgn) {
            std::int64_t tt = sgn == 0 ? t_pref + d : t_pref - d;
            if (tt < t_lo || tt > t_hi) continue;
            Vec z0 = base0 + tt * rv;
            bool ok = true;
            for (Vec z : pattern)
                if (!host(z0 + z)) {
                    ok = false;
                    break;
                }
            if (ok) {
                std::vector<Vec> sites;
                sites.reserve(pattern.size());
                for (Vec z : pattern) sites.push_back(z0 + z);
                return sites;
            }
        }
    }
    return std::nullopt;
}

// Brute-force check of the any-position property on one test strip facing v.
bool voracious_on_test_strip(const UpdateFamily& fam, Vec v, const std::vector<Vec>& pattern,
                             std::int64_t lambda) {
    const std::int64_t radius = std::max<std::int64_t>(fam.radius(), 1);
    const Vec dv = rot90ccw(v);
    const std::int64_t n1 = norm1(v), n2 = norm1(dv);
    const std::int64_t Wt = (2 * radius + 2 + lambda) * n1;
    const std::int64_t L = 8 * (lambda + radius + 2) * n2;
    const std::int64_t amin = -lambda * n1, amax = Wt + 1 + lambda * n1;
    const std::int64_t bmax = L + lambda * n2;
    const std::int64_t vv = dot(v, v);
    const std::int64_t M =
        (std::max(std::abs(amin), amax) * norm_inf(v) + bmax * norm_inf(dv)) / vv + radius + 2;

    Region rg = Region::box(-M, -M, M, M);
    rg.restriction.assign((rg.site_count() + 63) / 64, 0);
    Configuration base = Configuration::empty_of(rg);
    std::vector<std::size_t> targets;
    for (std::int64_t y = -M; y <= M; ++y)
        for (std::int64_t x = -M; x <= M; ++x) {
            Vec p{x, y};
            std::int64_t a = dot(p, v), b = dot(p, dv);
            if (a >= amin && a <= amax && b >= -bmax && b <= bmax) base.region.allow(p);
            if (a >= 0 && a <= Wt && b >= -L && b <= L) base.set(p);
            if (a == Wt + 1 && std::abs(b) <= L - lambda * n2)
                targets.push_back(base.region.index_of(p));
        }
    if (targets.empty()) return false;
    auto filled = [&](const Configuration& fin) {
        for (std::size_t i : targets)
            if (!fin.get(i)) return false;
        return true;
    };

    if (pattern.empty()) return filled(restricted_close(fam, base));

    std::int64_t lv = dot(pattern[0], v);
    for (Vec z : pattern) lv = std::min(lv, dot(z, v));
    Vec base0 = (Wt + 1 - lv) * unit_functional_point(v);
    Vec rv = rot90cw(v);
    const std::int64_t grv = dot(rv, dv);  // = -<v,v>, never zero
    const std::int64_t g0 = dot(base0, dv);
    const std::int64_t gcap = L - lambda * n2;
    // Solve -gcap <= g0 + t*grv <= gcap for t.
    auto div_floor = [](std::int64_t a, std::int64_t b) {
        std::int64_t q = a / b, rr = a % b;
        return (rr != 0 && ((rr < 0) != (b < 0))) ? q - 1 : q;
    };
    auto div_ceil = [&](std::int64_t a, std::int64_t b) { return -div_floor(-a, b); };
    std::int64_t t_lo, t_hi;
    if (grv > 0) {
        t_lo = div_ceil(-gcap - g0, grv);
        t_hi = div_floor(gcap - g0, grv);
    } else {
        t_lo = div_ceil(gcap - g0, grv);
        t_hi = div_floor(-gcap - g0, grv);
    }
    bool any_position = false;
    for (std::int64_t t = t_lo; t <= t_hi; ++t) {
        Vec z0 = base0 + t * rv;
        bool admissible = true;
        for (Vec z : pattern) {
            Vec p = z0 + z;
            std::int64_t a = dot(p, v), b = dot(p, dv);
            if (!(a >= amin && a <= amax && std::abs(b) <= bmax) || !rg.in_box(p)) {
                admissible = false;
                break;
            }
        }
        if (!admissible) continue;
        any_position = true;
        Configuration cfg = base;
        for (Vec z : pattern) cfg.set(z0 + z);
        if (!filled(restricted_close(fam, cfg))) return false;
    }
    return any_position;
}

}  // namespace

VoraciousSet find_voracious(const UpdateFamily& fam, const StableSet& s, Vec v,
                            const OracleParams& params) {
    v = primitive(v);
    static constexpr std::int64_t kSlacks[] = {2, 4, 8, 16};
    if (is_unstable(fam, v)) {
        for (std::int64_t lambda : kSlacks)
            if (voracious_on_test_strip(fam, v, {}, lambda)) return {v, {}, lambda};
        throw VoraciousError("unaided advance undetermined at slack cap for direction " +
                             kcmlab::to_string(v));
    }
    if (s.contains(v) &&
        std::find(s.isolated.begin(), s.isolated.end(), v) == s.isolated.end())
        throw VoraciousError("direction lies in a stable arc: " + kcmlab::to_string(v));

    DirectionDifficulty dd = alpha_of_direction(fam, v, params);
    std::vector<std::vector<Vec>> cands;
    if (dd.plus_size) cands.push_back(dd.plus_certificate);
    if (dd.minus_size && (cands.empty() || dd.minus_certificate != cands[0]))
        cands.push_back(dd.minus_certificate);
    if (cands.empty())
        throw VoraciousError("no finite helper certificate for direction " + kcmlab::to_string(v));
    for (std::int64_t lambda : kSlacks)
        for (const auto& Z : cands)
            if (voracious_on_test_strip(fam, v, Z, lambda)) return {v, Z, lambda};
    throw VoraciousError("voracious property undetermined at slack cap for direction " +
                         kcmlab::to_string(v));
}

SpreadSetup prepare_spread(const UpdateFamily& fam, const StableSet& s, const HalfRing& ring,
                           const OracleParams& params) {
    SpreadSetup setup;
    setup.ring = ring;
    setup.lambda = 2;
    std::vector<VoraciousSet> cache;
    for (const VStrip& st : ring.strips) {
        auto it = std::find_if(cache.begin(), cache.end(),
                               [&](const VoraciousSet& vs) { return vs.v == st.v; });
        if (it == cache.end()) {
            cache.push_back(find_voracious(fam, s, st.v, params));
            it = cache.end() - 1;
        }
        setup.voracious.push_back(*it);
        setup.lambda = std::max(setup.lambda, it->lambda);
    }
    return setup;
}

namespace {

std::int64_t max_advance_coeff(const HalfRing& ring) {
    std::int64_t maxc = 0;
    for (const VStrip& st : ring.strips) maxc = std::max(maxc, dot(ring.u, st.v));
    return maxc;
}

// Restriction for spreading runs: the ring and its advanced copy, dilated by
// lambda in functional units (plus the generalized shells when relevant).
std::function<bool(Vec)> allowed_region(const SpreadSetup& setup, SpreadMode mode) {
    const HalfRing& ring = setup.ring;
    const std::int64_t lambda = setup.lambda;
    const std::int64_t n2 = norm1(ring.uperp);
    const Vec wu = ring.w * ring.u;
    const bool gen = mode == SpreadMode::generalized;
    const std::int64_t extent_factor = mode == SpreadMode::advance_one ? 1 : 2;
    return [=, &ring](Vec x) {
        for (const VStrip& st : ring.strips) {
            std::int64_t n1 = norm1(st.v);
            std::int64_t a = dot(x, st.v), g = dot(x, ring.uperp);
            if (a >= st.A - lambda * n1 && a <= st.A + extent_factor * st.W + lambda * n1 &&
                g >= st.Glo - lambda * n2 && g <= st.Ghi + lambda * n2)
                return true;
        }
        if (gen && (ring.gen_contains(x) || ring.gen_contains(x - wu))) return true;
        return false;
    };
}

}  // namespace

std::vector<PlacedHelper> build_helpers(const SpreadSetup& setup, SpreadMode mode) {
    const HalfRing& ring = setup.ring;
    const Vec wu = ring.w * ring.u;
    const std::int64_t maxc = max_advance_coeff(ring);
    std::vector<PlacedHelper> out;
    auto allowed = allowed_region(setup, mode);

    for (std::size_t j = 0; j < ring.strips.size(); ++j) {
        const VStrip& st = ring.strips[j];
        const VoraciousSet& vs = setup.voracious[j];
        if (vs.pattern.empty()) continue;  // unstable direction advances unaided

        std::function<bool(Vec)> host;
        std::vector<std::int64_t> lines;
        switch (mode) {
            case SpreadMode::advance_one: {
                if (dot(ring.u, st.v) != maxc) continue;
                lines = {st.A + st.W + 1};
                // Host inside the one-step advanced ring (x maxc scaled grid).
                host = [&ring, maxc](Vec x) {
                    for (const VStrip& t : ring.strips) {
                        std::int64_t c = dot(ring.u, t.v);
                        std::int64_t lhs = maxc * dot(x, t.v);
                        std::int64_t g = dot(x, ring.uperp);
                        if (lhs >= maxc * t.A + c && lhs <= maxc * (t.A + t.W) + c &&
                            g >= t.Glo && g <= t.Ghi)
                            return true;
                    }
                    return false;
                };
                break;
            }
            case SpreadMode::advance_width:
                for (std::int64_t c = st.A + st.W + 1; c <= st.A + 2 * st.W; ++c)
                    lines.push_back(c);
                host = [&ring, wu](Vec x) { return ring.contains(x - wu); };
                break;
            case SpreadMode::corollary:
                for (std::int64_t c = st.A + st.W + 1; c <= st.A + 2 * st.W; ++c)
                    lines.push_back(c);
                host = allowed;
                break;
            case SpreadMode::generalized:
                for (std::int64_t c = st.A + st.W + 1; c <= st.A + 2 * st.W; ++c)
                    lines.push_back(c);
                host = [&ring, wu](Vec x) {
                    return ring.gen_contains(x) || ring.gen_contains(x - wu);
                };
                break;
        }

        const std::int64_t g_pref = (st.Glo + st.Ghi) / 2;
        for (std::int64_t line : lines) {
            auto sites =
                place_pattern(vs.pattern, st.v, line, ring.uperp, g_pref, st.Glo, st.Ghi, host);
            if (!sites)
                throw VoraciousError("no admissible placement for direction " +
                                     kcmlab::to_string(st.v) + " on line " + std::to_string(line));
            out.push_back({j, line, std::move(*sites)});
        }
    }
    return out;
}

SpreadReport verify_spread(const UpdateFamily& fam, const SpreadSetup& setup, SpreadMode mode,
                           const std::vector<PlacedHelper>& helpers) {
    const HalfRing& ring = setup.ring;
    const Vec wu = ring.w * ring.u;
    const std::int64_t maxc = max_advance_coeff(ring);

    SpreadReport rep;
    rep.mode = mode;
    rep.lambda = setup.lambda;

    // The ring must be at least as wide as the verified slack, otherwise a
    // single certified step does not chain into a self-sustaining advance.
    if (ring.w < setup.lambda) {
        rep.note = "infeasible: ring width " + std::to_string(ring.w) +
                   " is below the verified slack lambda " + std::to_string(setup.lambda);
        return rep;
    }

    std::int64_t n1max = norm1(ring.uperp);
    for (const VStrip& st : ring.strips) n1max = std::max(n1max, norm1(st.v));
    const std::int64_t margin = setup.lambda * n1max + fam.radius() + 4;
    std::int64_t minx = 0, maxx = 0, miny = 0, maxy = 0;
    bool first = true;
    for (Vec c : ring.corners)
        for (Vec p : {c, c + wu, c + std::int64_t{2} * wu}) {
            if (first) {
                minx = maxx = p.x;
                miny = maxy = p.y;
                first = false;
            }
            minx = std::min(minx, p.x);
            maxx = std::max(maxx, p.x);
            miny = std::min(miny, p.y);
            maxy = std::max(maxy, p.y);
        }
    Region rg = Region::box(minx - margin, miny - margin, maxx + margin, maxy + margin);
    rg.restriction.assign((rg.site_count() + 63) / 64, 0);

    auto allowed = allowed_region(setup, mode);
    auto target = [&](Vec x) -> bool {
        switch (mode) {
            case SpreadMode::advance_one:
                for (const VStrip& st : ring.strips) {
                    std::int64_t c = dot(ring.u, st.v);
                    std::int64_t lhs = maxc * dot(x, st.v);
                    std::int64_t g = dot(x, ring.uperp);
                    if (lhs >= maxc * st.A + c && lhs <= maxc * (st.A + st.W) + c &&
                        g >= st.Glo && g <= st.Ghi)
                        return true;
                }
                return false;
            case SpreadMode::advance_width:
            case SpreadMode::corollary:
                return ring.contains(x - wu);
            case SpreadMode::generalized:
                return ring.gen_contains(x - wu) && ring.contains(x - wu);
        }
        return false;
    };

    Configuration cfg = Configuration::empty_of(rg);
    std::vector<std::size_t> target_idx;
    for (std::int64_t y = rg.y0; y <= rg.y1; ++y)
        for (std::int64_t x = rg.x0; x <= rg.x1; ++x) {
            Vec p{x, y};
            if (allowed(p)) cfg.region.allow(p);
            bool seed = mode == SpreadMode::generalized ? ring.core_contains(p) : ring.contains(p);
            if (seed) cfg.set(p);
            if (target(p)) target_idx.push_back(cfg.region.index_of(p));
        }
    for (const PlacedHelper& h : helpers)
        for (Vec p : h.sites) {
            if (!rg.in_box(p)) throw std::logic_error("helper outside working box");
            cfg.set(p);
        }

    Configuration fin = restricted_close(fam, cfg);
    rep.target_sites = static_cast<std::int64_t>(target_idx.size());
    for (std::size_t i : target_idx) {
        if (fin.get(i)) {
            ++rep.infected_targets;
        } else if (rep.witnesses.size() < 32) {
            rep.witnesses.push_back(rg.site_at(i));
        }
    }
    rep.passed = rep.target_sites > 0 && rep.infected_targets == rep.target_sites;
    if (!rep.passed && rep.target_sites == 0) rep.note = "empty target region";
    return rep;
}

RectangleReport verify_supercritical_rectangle(const UpdateFamily& fam, const Classification& cls,
                                               std::int64_t n1, std::int64_t n2, bool check_both) {
    if (cls.label != ClassLabel::supercritical || !cls.witness)
        throw std::invalid_argument("rectangle check needs a supercritical classification");
    RectangleReport rep;
    Vec v = -*cls.witness;
    rep.v = v;
    const std::int64_t radius = fam.radius();
    if (n1 <= radius || n2 <= radius) {
        rep.inconclusive = true;
        rep.note = "rectangle no larger than the rule radius";
        return rep;
    }
    const Vec vp = rot90ccw(v);
    const std::int64_t vv = dot(v, v);
    auto in_copy = [&](Vec x, std::int64_t i) {
        std::int64_t a = dot(x, v) - i * n1 * vv;
        std::int64_t b = dot(x, vp);
        return a >= 0 && a < n1 * vv && b >= 0 && b < n2 * vv;
    };
    const std::int64_t M = (2 * n1 + n2 + 2) * vv * std::max<std::int64_t>(norm_inf(v), 1) +
                           4 * std::max<std::int64_t>(radius, 1);
    Region rg = Region::box(-M, -M, M, M);
    Configuration cfg = Configuration::empty_of(rg);
    std::vector<std::size_t> back_idx, fwd_idx;
    for (std::int64_t y = -M; y <= M; ++y)
        for (std::int64_t x = -M; x <= M; ++x) {
            Vec p{x, y};
            if (in_copy(p, 0)) cfg.set(p);
            if (in_copy(p, -1)) back_idx.push_back(rg.index_of(p));
            if (in_copy(p, 1)) fwd_idx.push_back(rg.index_of(p));
        }
    Configuration fin = restricted_close(fam, cfg);

    rep.grow_back = true;
    for (std::size_t i : back_idx)
        if (!fin.get(i)) {
            rep.grow_back = false;
            if (rep.witnesses.size() < 32) rep.witnesses.push_back(rg.site_at(i));
        }
    rep.forward_checked = check_both || !cls.rooted;
    if (rep.forward_checked) {
        rep.grow_forward = true;
        for (std::size_t i : fwd_idx)
            if (!fin.get(i)) {
                rep.grow_forward = false;
                if (rep.witnesses.size() < 32) rep.witnesses.push_back(rg.site_at(i));
            }
    }
    return rep;
}

}  // namespace kcmlab
