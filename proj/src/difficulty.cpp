#include "kcmlab/difficulty.hpp"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <limits>

#include "kcmlab/closure.hpp"

namespace kcmlab {

std::string DifficultyValue::to_string() const {
    if (kind == Kind::finite) return std::to_string(value);
    return ">" + std::to_string(value);
}

bool difficulty_less(const DifficultyValue& a, const DifficultyValue& b) {
    if (a.kind != b.kind) return a.kind == DifficultyValue::Kind::finite;
    if (a.kind == DifficultyValue::Kind::finite) return a.value < b.value;
    return false;
}

DifficultyValue difficulty_max(const DifficultyValue& a, const DifficultyValue& b) {
    return difficulty_less(a, b) ? b : a;
}

DifficultyValue difficulty_min(const DifficultyValue& a, const DifficultyValue& b) {
    return difficulty_less(b, a) ? b : a;
}

std::int64_t oracle_budget_default() {
    if (const char* env = std::getenv("KCMLAB_BUDGET")) {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end && *end == '\0' && v > 0) return static_cast<std::int64_t>(v);
    }
    return 20'000'000;
}

namespace {

bool bit(const std::vector<std::uint64_t>& b, std::size_t i) {
    return (b[i >> 6] >> (i & 63)) & 1;
}

void set_bit(std::vector<std::uint64_t>& b, std::size_t i) {
    b[i >> 6] |= std::uint64_t{1} << (i & 63);
}

}  // namespace

DirectionDifficulty alpha_of_direction(const UpdateFamily& fam, Vec u,
                                       const OracleParams& params) {
    u = primitive(u);
    DirectionDifficulty out;
    out.u = u;
    if (is_unstable(fam, u)) {
        out.value = DifficultyValue::finite(0);
        out.plus_size = 0;
        out.minus_size = 0;
        return out;
    }

    const std::int64_t radius = std::max<std::int64_t>(fam.radius(), 1);
    const std::int64_t wr = params.window_radius > 0 ? params.window_radius : 8 * radius;
    const std::int64_t span = params.line_span;
    const std::int64_t bound = params.bound;
    std::int64_t budget = params.budget > 0 ? params.budget : oracle_budget_default();

    const Vec r = rot90cw(u);  // positive direction along the boundary line
    const std::int64_t step = norm_inf(r);
    const std::int64_t rr = dot(r, r);
    const std::int64_t B = wr + (span + 2) * step + radius;
    const Region rg = Region::box(-B, -B, B, B);
    const std::size_t nsites = rg.site_count();

    // The half-plane itself is a fixpoint for stable u, so it serves as the
    // immutable base each candidate run starts from.
    std::vector<std::uint64_t> base((nsites + 63) / 64, 0);
    for (std::int64_t y = -B; y <= B; ++y)
        for (std::int64_t x = -B; x <= B; ++x)
            if (dot(Vec{x, y}, u) < 0) set_bit(base, rg.index_of({x, y}));

    const std::int64_t K0 = wr / step;
    std::vector<std::size_t> plus_idx, minus_idx;
    for (std::int64_t k = K0 + 1; k <= K0 + span; ++k) {
        plus_idx.push_back(rg.index_of(k * r));
        minus_idx.push_back(rg.index_of((-k) * r));
    }

    std::vector<Vec> window;
    for (std::int64_t y = -wr; y <= wr; ++y)
        for (std::int64_t x = -wr; x <= wr; ++x)
            if (dot(Vec{x, y}, u) >= 0) window.push_back({x, y});

    std::vector<std::uint64_t> work(base.size());
    std::vector<std::uint32_t> stack;
    auto exhausted = [&](std::int64_t size_reached) {
        throw OracleBudgetError("oracle budget exhausted probing direction " +
                                kcmlab::to_string(u) + " at helper size " +
                                std::to_string(size_reached));
    };
    auto infected = [&](Vec p) -> bool {
        if (!rg.in_box(p)) return dot(p, u) < 0;
        return bit(work, rg.index_of(p));
    };
    auto fires = [&](Vec x) -> bool {
        for (const UpdateRule& rule : fam.rules) {
            bool all = true;
            for (Vec xi : rule.offsets)
                if (!infected(x + xi)) {
                    all = false;
                    break;
                }
            if (all) return true;
        }
        return false;
    };
    auto run_candidate = [&](const std::vector<Vec>& Z,
                             std::int64_t size_reached) -> std::pair<bool, bool> {
        std::memcpy(work.data(), base.data(), base.size() * sizeof(std::uint64_t));
        stack.clear();
        for (Vec z : Z) {
            std::size_t i = rg.index_of(z);
            if (!bit(work, i)) {
                set_bit(work, i);
                stack.push_back(static_cast<std::uint32_t>(i));
            }
        }
        while (!stack.empty()) {
            Vec fp = rg.site_at(stack.back());
            stack.pop_back();
            for (const UpdateRule& rule : fam.rules)
                for (Vec xi : rule.offsets) {
                    Vec c = fp - xi;
                    if (!rg.in_box(c)) continue;
                    std::size_t ci = rg.index_of(c);
                    if (bit(work, ci)) continue;
                    if (--budget < 0) exhausted(size_reached);
                    if (fires(c)) {
                        set_bit(work, ci);
                        stack.push_back(static_cast<std::uint32_t>(ci));
                    }
                }
        }
        auto all_set = [&](const std::vector<std::size_t>& idx) {
            for (std::size_t i : idx)
                if (!bit(work, i)) return false;
            return true;
        };
        return {all_set(plus_idx), all_set(minus_idx)};
    };
    // Certificates are confirmed end to end by the reference engine; the full
    // fixpoint must agree bit for bit with the incremental run.
    auto validate = [&](const std::vector<Vec>& Z, const std::vector<std::size_t>& line) {
        Configuration cfg = Configuration::empty_of(rg);
        cfg.bits = base;
        for (Vec z : Z) cfg.set(z);
        ClosureResult res = closure_naive(fam, cfg, Exterior::half_plane(u));
        if (res.final.bits != work)
            throw std::logic_error("incremental half-plane closure disagrees with reference");
        for (std::size_t i : line)
            if (!res.final.get(i))
                throw std::logic_error("certificate rejected by reference closure");
    };

    std::vector<Vec> zbuf;
    for (std::int64_t k = 1; k <= bound; ++k) {
        if (static_cast<std::size_t>(k) > window.size()) break;
        std::vector<std::size_t> idx(static_cast<std::size_t>(k));
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        const std::size_t W = window.size();
        while (true) {
            if (--budget < 0) exhausted(k);
            std::int64_t mind = std::numeric_limits<std::int64_t>::max();
            for (std::size_t i : idx) mind = std::min(mind, dot(window[i], r));
            if (mind >= 0 && mind < rr) {
                zbuf.clear();
                for (std::size_t i : idx) zbuf.push_back(window[i]);
                auto [plus, minus] = run_candidate(zbuf, k);
                if (plus && !out.plus_size) {
                    out.plus_size = k;
                    out.plus_certificate = zbuf;
                    validate(zbuf, plus_idx);
                }
                if (minus && !out.minus_size) {
                    out.minus_size = k;
                    out.minus_certificate = zbuf;
                    validate(zbuf, minus_idx);
                }
                if (out.plus_size && out.minus_size) break;
            }
            std::size_t j = idx.size();
            while (j > 0 && idx[j - 1] == W - idx.size() + (j - 1)) --j;
            if (j == 0) break;
            ++idx[j - 1];
            for (std::size_t t = j; t < idx.size(); ++t) idx[t] = idx[t - 1] + 1;
        }
        if (out.plus_size && out.minus_size) break;
    }

    if (out.plus_size && out.minus_size)
        out.value = DifficultyValue::finite(std::min(*out.plus_size, *out.minus_size));
    else
        out.value = DifficultyValue::exceeds(bound);
    return out;
}

const DirectionDifficulty* DifficultyReport::find(Vec u) const {
    u = primitive(u);
    for (const DirectionDifficulty& d : per_direction)
        if (d.u == u) return &d;
    return nullptr;
}

DifficultyReport family_difficulties(const UpdateFamily& fam, const StableSet& s,
                                     const Classification& cls, const OracleParams& params) {
    const std::int64_t bound = params.bound;
    DifficultyReport rep;
    if (s.full_circle) {
        rep.alpha = DifficultyValue::exceeds(bound);
        rep.beta = DifficultyValue::exceeds(bound);
        rep.alpha_witness = {1, 0};
        rep.balanced = false;
        return rep;
    }

    for (Vec p : s.isolated) rep.per_direction.push_back(alpha_of_direction(fam, p, params));

    auto value_of = [&](Vec p) -> DifficultyValue {
        if (const DirectionDifficulty* d = rep.find(p)) return d->value;
        if (is_unstable(fam, p)) return DifficultyValue::finite(0);
        return DifficultyValue::exceeds(bound);  // interior of a stable arc
    };

    const std::vector<Vec> cands = semicircle_candidates(s);

    auto score_alpha = [&](Vec w) {
        DifficultyValue v = DifficultyValue::finite(0);
        for (const Arc& arc : s.arcs)
            if (arc_meets_open_semicircle(arc, w))
                return DifficultyValue::exceeds(bound);
        for (Vec p : s.isolated)
            if (dot(w, p) > 0) v = difficulty_max(v, value_of(p));
        return v;
    };
    auto score_beta = [&](Vec w) {
        DifficultyValue v = DifficultyValue::finite(0);
        for (const Arc& arc : s.arcs)
            if (arc_meets_open_semicircle(arc, w) || arc_meets_open_semicircle(arc, -w))
                return DifficultyValue::exceeds(bound);
        for (Vec p : s.isolated)
            if (dot(w, p) != 0) v = difficulty_max(v, value_of(p));
        return v;
    };

    bool have = false;
    for (Vec w : cands) {
        DifficultyValue v = score_alpha(w);
        if (!have || difficulty_less(v, rep.alpha)) {
            rep.alpha = v;
            rep.alpha_witness = w;
            have = true;
        }
    }
    have = false;
    for (Vec w : cands) {
        DifficultyValue v = score_beta(w);
        if (!have || difficulty_less(v, rep.beta)) {
            rep.beta = v;
            have = true;
        }
    }

    rep.balanced = false;
    if (rep.alpha.is_finite()) {
        auto arc_meets_closed = [&](const Arc& arc, Vec w) {
            return dot(w, arc.a) >= 0 || dot(w, arc.b) >= 0 ||
                   in_closed_arc(primitive(w), arc.a, arc.b);
        };
        for (Vec w : cands) {
            bool ok = true;
            for (const Arc& arc : s.arcs)
                if (arc_meets_closed(arc, w)) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            for (Vec p : s.isolated) {
                if (dot(w, p) < 0) continue;
                DifficultyValue v = value_of(p);
                if (!v.is_finite() || v.value > rep.alpha.value) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                rep.balanced = true;
                break;
            }
        }
    }

    if (cls.label == ClassLabel::critical) {
        if (!rep.alpha.is_finite()) {
            rep.rooted_label = "undecided at bound";
        } else if (rep.beta.is_finite()) {
            rep.rooted_label = rep.beta.value >= 2 * rep.alpha.value ? "alpha-rooted"
                                                                     : "beta-unrooted";
        } else {
            rep.rooted_label = rep.beta.value + 1 >= 2 * rep.alpha.value ? "alpha-rooted"
                                                                         : "undecided at bound";
        }
    }
    return rep;
}

}  // namespace kcmlab
