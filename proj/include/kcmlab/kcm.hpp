#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kcmlab/family.hpp"

namespace kcmlab {

// Continuous-time Glauber dynamics on a torus: every site carries a rate-1
// clock; when it rings and some rule's neighbourhood is entirely empty the
// spin resamples to empty with probability q. Empty plays the role infected
// plays for bootstrap closure.
struct KcmParams {
    double q = 0.1;
    std::int64_t width = 32, height = 32;
    double t_max = 100.0;
    std::uint64_t seed = 1;
    double measure_from = 0.0;       // start of the vacancy measurement window
    double snapshot_spacing = 10.0;  // global density snapshot cadence
};

struct KcmEvent {
    std::uint32_t site;
    double time;
    std::uint8_t empty;
};
using EventSink = std::function<void(const KcmEvent&)>;

struct Trajectory {
    double final_time = 0;
    std::int64_t events = 0;         // clock rings
    std::int64_t legal_updates = 0;  // rings with the constraint satisfied
    std::int64_t flips_to_empty = 0, flips_to_occupied = 0;
    double time_avg_vacancy = 0;  // over [measure_from, t_max]
    std::vector<double> empty_time;  // per site, whole run
    std::vector<double> density_snapshots;
};

Trajectory simulate(const UpdateFamily& fam, const KcmParams& params,
                    const EventSink* sink = nullptr);

struct TauEstimate {
    double q = 0;
    std::int64_t trials = 0;
    double mean = 0;
    double std_error = 0;
    std::int64_t censored = 0;  // censored trials contribute t_max to the mean
    double fraction_zero = 0;   // trials where the origin started empty
    double t_max = 0;
    std::uint64_t seed = 0;
    std::string note;  // "lower bound only" when every trial was censored
};

// Mean first time the origin is empty, started from the stationary product
// measure, one independent stream per trial (results do not depend on jobs).
TauEstimate estimate_tau0(const UpdateFamily& fam, const KcmParams& params, std::int64_t trials,
                          unsigned jobs = 1);

struct StationarityReport {
    double q = 0;
    std::int64_t trials = 0;
    double mean_density = 0, sd = 0;
    bool pass = false;  // |mean - q| <= 3 sd / sqrt(trials)
    double chi2 = 0;    // informational per-site statistic
    std::int64_t dof = 0;
    double autocorr = 0;  // lag-1 autocorrelation of density snapshots
    std::string note;
};

StationarityReport stationarity_check(const UpdateFamily& fam, const KcmParams& params,
                                      double burn_in, std::int64_t trials, unsigned jobs = 1);

}  // namespace kcmlab
