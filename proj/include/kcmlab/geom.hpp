#pragma once

#include <cassert>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <string>

namespace kcmlab {

// Exact integer lattice/direction arithmetic. All geometry in this project
// is done on int64 vectors; directions are primitive vectors (gcd of the
// coordinates is 1), never floating point.
struct Vec {
    std::int64_t x = 0;
    std::int64_t y = 0;

    friend constexpr bool operator==(const Vec&, const Vec&) = default;
    // Lexicographic (x, y): the canonical order for rule offsets.
    friend constexpr auto operator<=>(const Vec&, const Vec&) = default;

    friend constexpr Vec operator+(Vec a, Vec b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec operator-(Vec a, Vec b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec operator-(Vec a) { return {-a.x, -a.y}; }
    friend constexpr Vec operator*(std::int64_t k, Vec a) { return {k * a.x, k * a.y}; }
};

constexpr std::int64_t dot(Vec a, Vec b) { return a.x * b.x + a.y * b.y; }
constexpr std::int64_t cross(Vec a, Vec b) { return a.x * b.y - a.y * b.x; }

constexpr Vec rot90ccw(Vec a) { return {-a.y, a.x}; }
constexpr Vec rot90cw(Vec a) { return {a.y, -a.x}; }

constexpr std::int64_t iabs(std::int64_t v) { return v < 0 ? -v : v; }
constexpr std::int64_t norm1(Vec a) { return iabs(a.x) + iabs(a.y); }
constexpr std::int64_t norm_inf(Vec a) { return std::max(iabs(a.x), iabs(a.y)); }

inline Vec primitive(Vec a) {
    assert(a.x != 0 || a.y != 0);
    std::int64_t g = std::gcd(std::abs(a.x), std::abs(a.y));
    return {a.x / g, a.y / g};
}

// Reflection of v about the axis spanned by u, scaled by <u,u> to stay
// integral; callers primitivize the result.
constexpr Vec reflect_about_scaled(Vec v, Vec u) {
    return (2 * dot(v, u)) * u - dot(u, u) * v;
}

// Quadrant index for the counterclockwise angular order starting at (1,0).
// Quadrant boundaries: (0,1) opens quadrant 1, (-1,0) opens 2, (0,-1) opens 3.
constexpr int angular_quadrant(Vec a) {
    assert(a.x != 0 || a.y != 0);
    if (a.x > 0 && a.y >= 0) return 0;
    if (a.x <= 0 && a.y > 0) return 1;
    if (a.x < 0 && a.y <= 0) return 2;
    return 3;
}

// Strict "angle(a) < angle(b)" with angles in [0, 2*pi) measured ccw from
// (1,0). Total order on primitive directions.
constexpr bool angle_less(Vec a, Vec b) {
    int qa = angular_quadrant(a), qb = angular_quadrant(b);
    if (qa != qb) return qa < qb;
    return cross(a, b) > 0;
}

// Membership of direction w in the closed ccw arc from a to b (arc may be
// longer than pi; a == b denotes the single point a).
constexpr bool in_closed_arc(Vec w, Vec a, Vec b) {
    if (a == b) return w == a;
    if (w == a || w == b) return true;
    bool a_le_w = !angle_less(w, a);
    bool w_le_b = !angle_less(b, w);
    if (!angle_less(b, a)) return a_le_w && w_le_b;  // arc does not wrap angle 0
    return a_le_w || w_le_b;
}

inline std::string to_string(Vec a) {
    return "(" + std::to_string(a.x) + "," + std::to_string(a.y) + ")";
}

}  // namespace kcmlab
