#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace kcmlab {

// One-dimensional constrained chains with general single-site state spaces.
// Site x resamples from nu_x when its constraint holds; constraints only read
// whether neighbouring sites are in a good state, so the product measure is
// reversible. The right boundary site is unconstrained, which keeps the chain
// irreducible.
enum class ChainKind { east, fa1f };
std::string to_string(ChainKind kind);

struct SiteSpace {
    int nstates = 2;
    std::vector<double> nu;          // positive, sums to 1
    std::vector<std::uint8_t> good;  // size nstates; at least one good, one bad
    double good_mass() const;
};

struct ChainSpec {
    ChainKind kind = ChainKind::east;
    std::vector<SiteSpace> sites;
    std::int64_t dim() const;
    double min_good_mass() const;
    void validate() const;  // throws std::invalid_argument
};

// Binary chain keeping only each site's good-mass; state 0 is the good state.
ChainSpec standard_projection(const ChainSpec& spec);
ChainSpec homogeneous_binary(ChainKind kind, int n, double q);
ChainSpec random_chain_spec(ChainKind kind, int max_sites, std::mt19937_64& gen);

struct ChainMatrices {
    Eigen::MatrixXd generator;  // rows sum to zero
    Eigen::VectorXd mu;         // stationary product measure
};
ChainMatrices build_generator(const ChainSpec& spec);

double reversibility_residual(const ChainMatrices& m);
double variance_mu(const ChainMatrices& m, const Eigen::VectorXd& f);
double dirichlet_mu(const ChainMatrices& m, const Eigen::VectorXd& f);
// Same quantity as dirichlet_mu computed the other way round, as the sum over
// sites of mu(c_x Var_x(f)); the two routes agree up to rounding.
double dirichlet_local(const ChainSpec& spec, const Eigen::VectorXd& f);

struct SpectralReport {
    double gap = 0, relaxation_time = 0;
    std::string method;  // "dense" or "iterative"
    double tolerance = 0;
    std::int64_t dim = 0;
};
// Dense symmetric eigensolve up to dense_limit states, matrix-free deflated
// power iteration beyond it.
SpectralReport relaxation_time(const ChainSpec& spec, std::int64_t dense_limit = 4096);

struct PoincareReport {
    std::int64_t n = 0, dim = 0, trials = 0, violations = 0;
    // How often the inequality fails when the 1/q factor is dropped; recorded
    // only, it shows the factor is doing work.
    std::int64_t violations_no_factor = 0;
    std::int64_t first_violation_trial = -1;
    double q = 0;  // minimal good-mass
    double t_gen = 0, t_std = 0, bound = 0, slack = 0;
    bool pass = false;
};
// Checks Var(f) <= (T_std / q) D(f) for random f and T_gen <= T_std / q,
// where T_std is the relaxation time of the binary projection.
PoincareReport verify_poincare(const ChainSpec& spec, std::uint64_t seed, std::int64_t trials,
                               double slack = 1e-9);

struct ScalingReport {
    std::int64_t n = 0;
    double q = 0;
    double lumpability_residual = 0;  // spread of class-to-class rates
    double generator_mismatch = 0;    // lumped vs binary, entrywise
    double t_gen = 0, t_std = 0;
    double margin = 0;  // t_std / q - t_gen
    bool pass = false;
};
// Three-state sites with good mass q lump exactly onto the binary chain.
ScalingReport verify_scaling_reduction(ChainKind kind, int n, double q);

struct HittingReport {
    std::int64_t n = 0, dim = 0;
    double q = 0;     // minimal good-mass
    double mu_a = 0;  // mass of the target set {site 0 good}
    double expected_hit = 0, bound = 0, relaxation = 0;
    bool pass = false;
};
// Mean hitting time of {site 0 good} from stationarity is at most T_rel / q.
HittingReport verify_hitting_bound(const ChainSpec& spec);

}  // namespace kcmlab
