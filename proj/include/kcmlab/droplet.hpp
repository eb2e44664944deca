#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kcmlab/closure.hpp"
#include "kcmlab/difficulty.hpp"
#include "kcmlab/direction.hpp"
#include "kcmlab/family.hpp"
#include "kcmlab/geom.hpp"

namespace kcmlab {

// One slanted strip of a half-ring: sites x with
//   A <= <x,v> <= A + W   and   Glo <= <x,uperp> <= Ghi.
struct VStrip {
    Vec v{};                        // outward quasi-stable direction (primitive)
    std::int64_t A = 0;             // inner side functional value
    std::int64_t W = 0;             // thickness, w * <u,v>
    std::int64_t Glo = 0, Ghi = 0;  // transversal band, strictly decreasing down the ring
    std::int64_t length = 0;        // strip length parameter used for this strip
};

// Chain of strips wrapping the open semicircle around u, clockwise from the
// +uperp end; consecutive strips share exactly their short side.
struct HalfRing {
    Vec u{}, uperp{};
    std::int64_t w = 0, ell = 0;
    std::vector<VStrip> strips;
    std::vector<Vec> corners;  // P_0 .. P_m inner corner chain

    bool contains(Vec x) const;
    // Ring with, per strip, the top-third inner notch removed and a top-third
    // tab beyond the outer side added (thirds measured on a x3 scaled grid).
    bool gen_contains(Vec x) const;
    bool core_contains(Vec x) const { return gen_contains(x) && contains(x); }
};

HalfRing build_half_ring(const UpdateFamily& fam, const StableSet& s, Vec u, std::int64_t w,
                         std::int64_t ell, Vec anchor = {0, 0}, std::int64_t first_ell = 0);

// A seed pattern that, dropped at any admissible position along the far
// boundary line of an infected strip facing v, infects that whole line under
// closure restricted to a slightly dilated strip. Empty pattern when v is
// unstable (the strip advances unaided).
struct VoraciousSet {
    Vec v{};
    std::vector<Vec> pattern;
    std::int64_t lambda = 0;  // dilation slack the property was verified at
};

struct VoraciousError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tries the bounded-search certificates for v at escalating slack values and
// verifies the every-position property by brute force on a test strip, each
// run double-checked against the reference closure.
VoraciousSet find_voracious(const UpdateFamily& fam, const StableSet& s, Vec v,
                            const OracleParams& params = {});

enum class SpreadMode { advance_one, advance_width, corollary, generalized };
std::string to_string(SpreadMode mode);

// A helping pattern instantiated on a concrete lattice line of one strip.
struct PlacedHelper {
    std::size_t strip = 0;
    std::int64_t line = 0;  // <x,v> value of the first pattern level
    std::vector<Vec> sites;
};

struct SpreadSetup {
    HalfRing ring;
    std::vector<VoraciousSet> voracious;  // parallel to ring.strips
    std::int64_t lambda = 0;              // max over strips, floor 2
};

SpreadSetup prepare_spread(const UpdateFamily& fam, const StableSet& s, const HalfRing& ring,
                           const OracleParams& params = {});

// Instantiates the helping sets the given mode requires; helpers the host
// region cannot accommodate are reported via SpreadReport when verifying.
std::vector<PlacedHelper> build_helpers(const SpreadSetup& setup, SpreadMode mode);

struct SpreadReport {
    SpreadMode mode{};
    bool passed = false;
    std::int64_t lambda = 0;
    std::int64_t target_sites = 0, infected_targets = 0;
    std::vector<Vec> witnesses;  // uninfected target sites, capped at 32
    std::string note;
};

// Seeds the ring (generalized: its core) plus the helpers, closes restricted
// to the dilated ring union its advanced copy, and checks the advanced region
// is reached. Every run is double-checked against the reference closure.
SpreadReport verify_spread(const UpdateFamily& fam, const SpreadSetup& setup, SpreadMode mode,
                           const std::vector<PlacedHelper>& helpers);

struct RectangleReport {
    Vec v{};                 // rectangle orientation; growth is checked against -v
    bool grow_back = false;  // copy displaced by -n1*v became infected
    bool grow_forward = false;
    bool forward_checked = false;
    bool inconclusive = false;
    std::vector<Vec> witnesses;
    std::string note;
};

// Droplet check for supercritical families: an n1 x n2 rectangle aligned with
// the classification witness must infect its displaced copy behind it, and
// for unrooted families the copy ahead as well.
RectangleReport verify_supercritical_rectangle(const UpdateFamily& fam, const Classification& cls,
                                               std::int64_t n1, std::int64_t n2,
                                               bool check_both = false);

}  // namespace kcmlab
