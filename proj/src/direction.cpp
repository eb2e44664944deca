#include "kcmlab/direction.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace kcmlab {

bool is_unstable(const UpdateFamily& fam, Vec u) {
    for (const UpdateRule& rule : fam.rules) {
        bool inside = true;
        for (Vec xi : rule.offsets) {
            if (dot(xi, u) >= 0) {
                inside = false;
                break;
            }
        }
        if (inside) return true;
    }
    return false;
}

std::optional<Arc> unstable_arc(const UpdateRule& rule) {
    // Intersect the open half-circles {u : cross(p,u) > 0} over the offset
    // perpendiculars p; the running intersection stays an open arc of length
    // at most pi, so one interior point decides the no-endpoint-inside cases.
    bool started = false;
    Vec s{}, e{};
    for (Vec xi : rule.offsets) {
        Vec p = primitive(rot90ccw(xi));
        if (!started) {
            s = p;
            e = -p;
            started = true;
            continue;
        }
        if (cross(s, p) > 0 && cross(p, e) > 0) {
            s = p;
        } else if (cross(s, -p) > 0 && cross(-p, e) > 0) {
            e = -p;
        } else {
            Vec m = (e == -s) ? rot90ccw(s) : s + e;
            if (cross(p, m) <= 0) return std::nullopt;
        }
    }
    if (!started) return std::nullopt;
    return Arc{primitive(s), primitive(e)};
}

namespace {

// A direction strictly inside the open ccw gap from a to b (a, b distinct
// primitives; the gap may exceed pi).
Vec gap_representative(Vec a, Vec b) {
    std::int64_t c = cross(a, b);
    if (c > 0) return primitive(a + b);
    if (c == 0) return primitive(rot90ccw(a));  // b == -a
    return primitive(-(a + b));
}

std::vector<Vec> sorted_unique_ccw(std::vector<Vec> v) {
    std::sort(v.begin(), v.end(), angle_less);
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

StableSet stable_set(const UpdateFamily& fam) {
    StableSet out;
    std::vector<Vec> events;
    for (const UpdateRule& rule : fam.rules) {
        if (auto arc = unstable_arc(rule)) {
            events.push_back(arc->a);
            events.push_back(arc->b);
        }
    }
    if (events.empty()) {
        out.full_circle = true;  // no rule destabilises any direction
        return out;
    }
    events = sorted_unique_ccw(std::move(events));
    const std::size_t m = events.size();

    // Between consecutive events the stability predicate is constant, so one
    // probe per event and one per gap decides the whole circle.
    struct Item {
        Vec dir;
        bool is_event;
        bool stable;
    };
    std::vector<Item> items;
    items.reserve(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        Vec a = events[i];
        Vec b = events[(i + 1) % m];
        items.push_back({a, true, !is_unstable(fam, a)});
        items.push_back({gap_representative(a, b), false, !is_unstable(fam, gap_representative(a, b))});
    }

    const std::size_t n = items.size();
    std::size_t first_unstable = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!items[i].stable) {
            first_unstable = i;
            break;
        }
    }
    if (first_unstable == n) {
        out.full_circle = true;
        return out;
    }

    std::size_t i = first_unstable;
    std::size_t seen = 0;
    while (seen < n) {
        std::size_t j = (i + 1) % n;
        ++seen;
        if (!items[j].stable) {
            i = j;
            continue;
        }
        // Maximal run of stable items starting at j.
        std::size_t last = j;
        while (seen < n && items[(last + 1) % n].stable) {
            last = (last + 1) % n;
            ++seen;
        }
        assert(items[j].is_event && items[last].is_event);
        if (j == last) {
            out.isolated.push_back(items[j].dir);
        } else {
            out.arcs.push_back({items[j].dir, items[last].dir});
        }
        i = last;
    }
    std::sort(out.isolated.begin(), out.isolated.end(), angle_less);
    std::sort(out.arcs.begin(), out.arcs.end(),
              [](const Arc& x, const Arc& y) { return angle_less(x.a, y.a); });
    return out;
}

bool StableSet::contains(Vec u) const {
    if (full_circle) return true;
    Vec p = primitive(u);
    for (Vec q : isolated)
        if (q == p) return true;
    for (const Arc& arc : arcs)
        if (in_closed_arc(p, arc.a, arc.b)) return true;
    return false;
}

std::string StableSet::to_string() const {
    if (full_circle) return "full circle";
    if (empty()) return "empty";
    struct Entry {
        Vec key;
        std::string text;
    };
    std::vector<Entry> entries;
    for (const Arc& arc : arcs)
        entries.push_back({arc.a, "arc [" + kcmlab::to_string(arc.a) + "," + kcmlab::to_string(arc.b) + "]"});
    for (Vec p : isolated) entries.push_back({p, "point " + kcmlab::to_string(p)});
    std::sort(entries.begin(), entries.end(),
              [](const Entry& x, const Entry& y) { return angle_less(x.key, y.key); });
    std::string out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (i) out += "; ";
        out += entries[i].text;
    }
    return out;
}

std::string to_string(ClassLabel label) {
    switch (label) {
        case ClassLabel::supercritical: return "supercritical";
        case ClassLabel::critical: return "critical";
        case ClassLabel::subcritical: return "subcritical";
    }
    return "?";
}

std::vector<Vec> semicircle_candidates(const StableSet& s) {
    std::vector<Vec> features;
    for (const Arc& arc : s.arcs) {
        features.push_back(arc.a);
        features.push_back(arc.b);
    }
    for (Vec p : s.isolated) features.push_back(p);
    if (features.empty()) return {Vec{1, 0}};

    std::vector<Vec> cands;
    for (Vec f : features) {
        cands.push_back(rot90ccw(f));
        cands.push_back(rot90cw(f));
    }
    cands = sorted_unique_ccw(std::move(cands));
    std::vector<Vec> all = cands;
    for (std::size_t i = 0; i < cands.size(); ++i)
        all.push_back(gap_representative(cands[i], cands[(i + 1) % cands.size()]));
    return sorted_unique_ccw(std::move(all));
}

bool arc_meets_open_semicircle(const Arc& arc, Vec w) {
    return dot(w, arc.a) > 0 || dot(w, arc.b) > 0 || in_closed_arc(primitive(w), arc.a, arc.b);
}

Classification classify_tri(const StableSet& s) {
    Classification out;
    if (s.full_circle) {
        out.label = ClassLabel::subcritical;
        return out;
    }
    std::vector<Vec> cands = semicircle_candidates(s);

    auto semicircle_misses_arcs = [&](Vec w) {
        for (const Arc& arc : s.arcs)
            if (arc_meets_open_semicircle(arc, w)) return false;
        return true;
    };
    auto semicircle_misses_all = [&](Vec w) {
        if (!semicircle_misses_arcs(w)) return false;
        for (Vec p : s.isolated)
            if (dot(w, p) > 0) return false;
        return true;
    };

    for (Vec w : cands) {
        if (semicircle_misses_all(w)) {
            out.label = ClassLabel::supercritical;
            out.witness = w;
            break;
        }
    }
    if (out.label == ClassLabel::supercritical) {
        // Unrooted means both opposite open semicircles can be kept free of
        // stable directions, i.e. the whole set fits in one antipodal pair.
        bool unrooted = s.arcs.empty() &&
                        (s.isolated.size() <= 1 ||
                         (s.isolated.size() == 2 && s.isolated[0] == -s.isolated[1]));
        out.rooted = !unrooted;
        if (unrooted)
            out.witness = s.isolated.empty() ? Vec{1, 0} : primitive(rot90ccw(s.isolated[0]));
        return out;
    }

    for (Vec w : cands) {
        if (semicircle_misses_arcs(w)) {
            out.label = ClassLabel::critical;
            out.witness = w;
            return out;
        }
    }
    out.label = ClassLabel::subcritical;
    return out;
}

std::vector<Vec> quasi_stable_directions(const UpdateFamily& fam, const StableSet& s, Vec u) {
    u = primitive(u);
    for (const Arc& arc : s.arcs)
        if (arc_meets_open_semicircle(arc, u))
            throw std::invalid_argument("semicircle not admissible: stable arc around " +
                                        kcmlab::to_string(u));

    std::vector<Vec> pool;
    pool.push_back(u);
    for (Vec p : s.isolated) pool.push_back(p);
    for (const UpdateRule& rule : fam.rules)
        for (Vec xi : rule.offsets) {
            Vec p = primitive(rot90ccw(xi));
            pool.push_back(p);
            pool.push_back(-p);
        }
    std::size_t base = pool.size();
    for (std::size_t i = 0; i < base; ++i)
        pool.push_back(primitive(reflect_about_scaled(pool[i], u)));

    std::vector<Vec> out;
    for (Vec v : pool)
        if (dot(v, u) > 0) out.push_back(v);
    // Clockwise within the open semicircle: first element nearest rot90ccw(u).
    std::sort(out.begin(), out.end(), [](Vec v, Vec w) { return cross(w, v) > 0; });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace kcmlab
