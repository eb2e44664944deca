#pragma once

#include <string>
#include <vector>

#include "kcmlab/chain.hpp"
#include "kcmlab/closure.hpp"
#include "kcmlab/difficulty.hpp"
#include "kcmlab/direction.hpp"
#include "kcmlab/droplet.hpp"
#include "kcmlab/kcm.hpp"

namespace kcmlab {

// Shared deterministic formatting: the CLI and the acceptance harness render
// results through these helpers, so identical inputs give identical bytes.

// "supercritical, rooted" / "critical, α=1, β>4 (bound), α-rooted, unbalanced" / ...
std::string classification_summary(const Classification& cls, const DifficultyReport& dif);

std::string classification_report(const UpdateFamily& fam, const StableSet& s,
                                  const Classification& cls, const DifficultyReport& dif,
                                  const OracleParams& params);

std::string spread_report_text(const std::string& family, const HalfRing& ring,
                               const SpreadReport& rep);
std::string rectangle_report_text(const std::string& family, const RectangleReport& rep);

std::string poincare_report_line(std::int64_t index, const PoincareReport& rep, ChainKind kind);

// CSV cell vectors matching the documented column layouts.
std::vector<std::string> bootstrap_row(const TUEstimate& est, double t_max);
std::vector<std::string> kcm_row(const std::string& family, const TauEstimate& est,
                                 std::int64_t width, std::int64_t height);
std::vector<std::string> chain_row(ChainKind kind, int n, double q, const SpectralReport& rep);

inline const std::vector<std::string> kBootstrapColumns = {
    "q", "trials", "median_rounds", "ci_low", "ci_high", "censored", "seed"};
inline const std::vector<std::string> kKcmColumns = {
    "family", "q",        "torus",    "trials",       "mean_tau0",
    "stderr", "censored", "fraction_zero", "seed"};
inline const std::vector<std::string> kChainColumns = {
    "kind", "n", "q", "gap", "relaxation_time", "method", "tolerance"};

}  // namespace kcmlab
