#include "kcmlab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kcmlab/rng.hpp"

namespace kcmlab {
namespace {

constexpr std::int64_t kDenseCap = 4096;

struct Codec {
    const ChainSpec& spec;
    int n;
    std::vector<std::int64_t> stride;
    std::int64_t dim;

    explicit Codec(const ChainSpec& s) : spec(s), n(static_cast<int>(s.sites.size())) {
        stride.resize(static_cast<std::size_t>(n));
        std::int64_t d = 1;
        for (int i = 0; i < n; ++i) {
            stride[static_cast<std::size_t>(i)] = d;
            d *= s.sites[static_cast<std::size_t>(i)].nstates;
        }
        dim = d;
    }

    void first(std::vector<int>& digits) const { digits.assign(static_cast<std::size_t>(n), 0); }
    bool next(std::vector<int>& digits) const {
        for (int i = 0; i < n; ++i) {
            if (++digits[static_cast<std::size_t>(i)] <
                spec.sites[static_cast<std::size_t>(i)].nstates) {
                return true;
            }
            digits[static_cast<std::size_t>(i)] = 0;
        }
        return false;
    }

    void goodness(const std::vector<int>& digits, std::vector<std::uint8_t>& g) const {
        g.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            g[static_cast<std::size_t>(i)] =
                spec.sites[static_cast<std::size_t>(i)].good[static_cast<std::size_t>(
                    digits[static_cast<std::size_t>(i)])];
        }
    }

    // The right boundary site is always free; other sites look right (east)
    // or at either neighbour (fa1f).
    bool constrained(int i, const std::vector<std::uint8_t>& g) const {
        if (i == n - 1) return true;
        if (spec.kind == ChainKind::east) return g[static_cast<std::size_t>(i) + 1] != 0;
        bool right = g[static_cast<std::size_t>(i) + 1] != 0;
        bool left = i > 0 && g[static_cast<std::size_t>(i) - 1] != 0;
        return right || left;
    }

    double mu_of(const std::vector<int>& digits) const {
        double m = 1.0;
        for (int i = 0; i < n; ++i) {
            m *= spec.sites[static_cast<std::size_t>(i)].nu[static_cast<std::size_t>(
                digits[static_cast<std::size_t>(i)])];
        }
        return m;
    }
};

// y = S x for the symmetrized generator S = D^{1/2} L D^{-1/2}; entries are
// S[a,b] = c_i(a) sqrt(nu_i(a_i) nu_i(b_i)) for single-site changes, and the
// diagonal matches L. Constraints ignore the site's own state, so S = S^T.
void apply_sym(const Codec& c, const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    y.setZero(c.dim);
    std::vector<int> digits;
    std::vector<std::uint8_t> g;
    c.first(digits);
    std::int64_t idx = 0;
    do {
        c.goodness(digits, g);
        for (int i = 0; i < c.n; ++i) {
            if (!c.constrained(i, g)) continue;
            const SiteSpace& site = c.spec.sites[static_cast<std::size_t>(i)];
            int cur = digits[static_cast<std::size_t>(i)];
            double nu_cur = site.nu[static_cast<std::size_t>(cur)];
            y[idx] -= (1.0 - nu_cur) * x[idx];
            for (int s = 0; s < site.nstates; ++s) {
                if (s == cur) continue;
                std::int64_t other =
                    idx + (s - cur) * c.stride[static_cast<std::size_t>(i)];
                y[idx] += std::sqrt(site.nu[static_cast<std::size_t>(s)] * nu_cur) * x[other];
            }
        }
        ++idx;
    } while (c.next(digits));
}

double max_abs_diagonal(const Codec& c) {
    std::vector<int> digits;
    std::vector<std::uint8_t> g;
    c.first(digits);
    double best = 0.0;
    do {
        c.goodness(digits, g);
        double d = 0.0;
        for (int i = 0; i < c.n; ++i) {
            if (!c.constrained(i, g)) continue;
            d += 1.0 - c.spec.sites[static_cast<std::size_t>(i)]
                           .nu[static_cast<std::size_t>(digits[static_cast<std::size_t>(i)])];
        }
        best = std::max(best, d);
    } while (c.next(digits));
    return best;
}

Eigen::VectorXd sqrt_mu_vector(const Codec& c) {
    Eigen::VectorXd v(c.dim);
    std::vector<int> digits;
    c.first(digits);
    std::int64_t idx = 0;
    do {
        v[idx] = std::sqrt(c.mu_of(digits));
        ++idx;
    } while (c.next(digits));
    return v;
}

double gap_dense(const Codec& c) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(c.dim, c.dim);
    for (std::int64_t j = 0; j < c.dim; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(c.dim);
        e[j] = 1.0;
        Eigen::VectorXd col(c.dim);
        apply_sym(c, e, col);
        s.col(j) = col;
    }
    Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed");
    const Eigen::VectorXd& ev = solver.eigenvalues();  // ascending
    double top = ev[c.dim - 1];
    if (std::abs(top) > 1e-8 * std::max(1.0, std::abs(ev[0]))) {
        throw std::runtime_error("top eigenvalue of the constrained generator is not zero");
    }
    if (c.dim < 2) throw std::runtime_error("chain needs at least two states");
    return -ev[c.dim - 2];
}

double gap_iterative(const Codec& c, double tol) {
    const double shift = 2.0 * max_abs_diagonal(c);
    Eigen::VectorXd v1 = sqrt_mu_vector(c);
    v1.normalize();
    auto gen = make_stream(0x9d2c5680u, 7);
    Eigen::VectorXd x(c.dim);
    for (std::int64_t i = 0; i < c.dim; ++i) x[i] = uniform01(gen) - 0.5;
    x -= v1.dot(x) * v1;
    x.normalize();
    Eigen::VectorXd y(c.dim);
    double theta = 0.0;
    double residual = 0.0;
    bool converged = false;
    for (int iter = 0; iter < 500000; ++iter) {
        apply_sym(c, x, y);
        y += shift * x;
        y -= v1.dot(y) * v1;
        theta = x.dot(y);
        residual = (y - theta * x).norm();
        if (residual <= tol * std::max(1.0, shift)) {
            converged = true;
            break;
        }
        double norm = y.norm();
        if (norm == 0.0) throw std::runtime_error("power iteration collapsed");
        x = y / norm;
    }
    if (!converged) {
        throw std::runtime_error("power iteration did not converge, residual " +
                                 std::to_string(residual));
    }
    return shift - theta;
}

}  // namespace

std::string to_string(ChainKind kind) { return kind == ChainKind::east ? "east" : "fa1f"; }

double SiteSpace::good_mass() const {
    double m = 0.0;
    for (std::size_t s = 0; s < nu.size(); ++s) {
        if (good[s]) m += nu[s];
    }
    return m;
}

std::int64_t ChainSpec::dim() const {
    std::int64_t d = 1;
    for (const auto& s : sites) d *= s.nstates;
    return d;
}

double ChainSpec::min_good_mass() const {
    double q = 1.0;
    for (const auto& s : sites) q = std::min(q, s.good_mass());
    return q;
}

void ChainSpec::validate() const {
    if (sites.empty()) throw std::invalid_argument("chain needs at least one site");
    for (std::size_t i = 0; i < sites.size(); ++i) {
        const SiteSpace& s = sites[i];
        if (s.nstates < 2 || s.nstates > 3) {
            throw std::invalid_argument("site state counts must be 2 or 3");
        }
        if (s.nu.size() != static_cast<std::size_t>(s.nstates) ||
            s.good.size() != static_cast<std::size_t>(s.nstates)) {
            throw std::invalid_argument("site vectors must match the state count");
        }
        double sum = 0.0;
        int goods = 0;
        for (int k = 0; k < s.nstates; ++k) {
            if (!(s.nu[static_cast<std::size_t>(k)] > 0.0)) {
                throw std::invalid_argument("site probabilities must be positive");
            }
            sum += s.nu[static_cast<std::size_t>(k)];
            goods += s.good[static_cast<std::size_t>(k)] ? 1 : 0;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("site probabilities must sum to one");
        }
        if (goods == 0 || goods == s.nstates) {
            throw std::invalid_argument("each site needs a good and a bad state");
        }
    }
}

ChainSpec standard_projection(const ChainSpec& spec) {
    ChainSpec out;
    out.kind = spec.kind;
    for (const auto& s : spec.sites) {
        double q = s.good_mass();
        out.sites.push_back(SiteSpace{2, {q, 1.0 - q}, {1, 0}});
    }
    return out;
}

ChainSpec homogeneous_binary(ChainKind kind, int n, double q) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must be in (0,1)");
    ChainSpec out;
    out.kind = kind;
    out.sites.assign(static_cast<std::size_t>(n), SiteSpace{2, {q, 1.0 - q}, {1, 0}});
    return out;
}

ChainSpec random_chain_spec(ChainKind kind, int max_sites, std::mt19937_64& gen) {
    ChainSpec out;
    out.kind = kind;
    int n = 1 + static_cast<int>(uniform_below(gen, static_cast<std::uint64_t>(max_sites)));
    out.sites.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        SiteSpace s;
        s.nstates = 2 + static_cast<int>(uniform_below(gen, 2));
        double sum = 0.0;
        s.nu.resize(static_cast<std::size_t>(s.nstates));
        for (auto& w : s.nu) {
            w = 0.15 + 0.85 * uniform01(gen);
            sum += w;
        }
        for (auto& w : s.nu) w /= sum;
        s.good.assign(static_cast<std::size_t>(s.nstates), 0);
        int goods = 1 + static_cast<int>(uniform_below(
                            gen, static_cast<std::uint64_t>(s.nstates - 1)));
        std::vector<int> order(static_cast<std::size_t>(s.nstates));
        for (int k = 0; k < s.nstates; ++k) order[static_cast<std::size_t>(k)] = k;
        for (int k = s.nstates - 1; k > 0; --k) {
            int j = static_cast<int>(uniform_below(gen, static_cast<std::uint64_t>(k + 1)));
            std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(j)]);
        }
        for (int k = 0; k < goods; ++k) s.good[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;
        out.sites.push_back(std::move(s));
    }
    return out;
}

ChainMatrices build_generator(const ChainSpec& spec) {
    spec.validate();
    Codec c(spec);
    if (c.dim > kDenseCap) throw std::invalid_argument("dense generator limited to 4096 states");
    ChainMatrices m;
    m.generator = Eigen::MatrixXd::Zero(c.dim, c.dim);
    m.mu.resize(c.dim);
    std::vector<int> digits;
    std::vector<std::uint8_t> g;
    c.first(digits);
    std::int64_t idx = 0;
    do {
        m.mu[idx] = c.mu_of(digits);
        c.goodness(digits, g);
        for (int i = 0; i < c.n; ++i) {
            if (!c.constrained(i, g)) continue;
            const SiteSpace& site = spec.sites[static_cast<std::size_t>(i)];
            int cur = digits[static_cast<std::size_t>(i)];
            for (int s = 0; s < site.nstates; ++s) {
                if (s == cur) continue;
                std::int64_t other = idx + (s - cur) * c.stride[static_cast<std::size_t>(i)];
                m.generator(idx, other) += site.nu[static_cast<std::size_t>(s)];
            }
            m.generator(idx, idx) -= 1.0 - site.nu[static_cast<std::size_t>(cur)];
        }
        ++idx;
    } while (c.next(digits));
    return m;
}

double reversibility_residual(const ChainMatrices& m) {
    double worst = 0.0;
    const std::int64_t dim = m.generator.rows();
    for (std::int64_t a = 0; a < dim; ++a) {
        for (std::int64_t b = a + 1; b < dim; ++b) {
            worst = std::max(worst, std::abs(m.mu[a] * m.generator(a, b) -
                                             m.mu[b] * m.generator(b, a)));
        }
    }
    return worst;
}

double variance_mu(const ChainMatrices& m, const Eigen::VectorXd& f) {
    double mean = m.mu.dot(f);
    double second = m.mu.dot(f.cwiseProduct(f));
    return second - mean * mean;
}

double dirichlet_mu(const ChainMatrices& m, const Eigen::VectorXd& f) {
    Eigen::VectorXd lf = m.generator * f;
    return -m.mu.dot(f.cwiseProduct(lf));
}

double dirichlet_local(const ChainSpec& spec, const Eigen::VectorXd& f) {
    Codec c(spec);
    std::vector<int> digits;
    std::vector<std::uint8_t> g;
    c.first(digits);
    std::int64_t idx = 0;
    double total = 0.0;
    do {
        double mu = c.mu_of(digits);
        c.goodness(digits, g);
        for (int i = 0; i < c.n; ++i) {
            if (!c.constrained(i, g)) continue;
            const SiteSpace& site = spec.sites[static_cast<std::size_t>(i)];
            int cur = digits[static_cast<std::size_t>(i)];
            double mean = 0.0, second = 0.0;
            for (int s = 0; s < site.nstates; ++s) {
                double v = f[idx + (s - cur) * c.stride[static_cast<std::size_t>(i)]];
                mean += site.nu[static_cast<std::size_t>(s)] * v;
                second += site.nu[static_cast<std::size_t>(s)] * v * v;
            }
            total += mu * (second - mean * mean);
        }
        ++idx;
    } while (c.next(digits));
    return total;
}

SpectralReport relaxation_time(const ChainSpec& spec, std::int64_t dense_limit) {
    spec.validate();
    Codec c(spec);
    if (c.dim > (std::int64_t{1} << 16)) {
        throw std::invalid_argument("state count exceeds the 2^16 cap");
    }
    SpectralReport rep;
    rep.dim = c.dim;
    rep.tolerance = 1e-10;
    if (c.dim <= std::min(dense_limit, kDenseCap)) {
        rep.gap = gap_dense(c);
        rep.method = "dense";
    } else {
        rep.gap = gap_iterative(c, rep.tolerance);
        rep.method = "iterative";
    }
    if (!(rep.gap > 0.0)) throw std::runtime_error("spectral gap must be positive");
    rep.relaxation_time = 1.0 / rep.gap;
    return rep;
}

PoincareReport verify_poincare(const ChainSpec& spec, std::uint64_t seed, std::int64_t trials,
                               double slack) {
    spec.validate();
    PoincareReport rep;
    rep.n = static_cast<std::int64_t>(spec.sites.size());
    rep.trials = trials;
    rep.slack = slack;
    rep.q = spec.min_good_mass();
    ChainMatrices m = build_generator(spec);
    rep.dim = m.generator.rows();
    rep.t_gen = relaxation_time(spec).relaxation_time;
    rep.t_std = relaxation_time(standard_projection(spec)).relaxation_time;
    rep.bound = rep.t_std / rep.q;
    for (std::int64_t trial = 0; trial < trials; ++trial) {
        auto gen = make_stream(seed, static_cast<std::uint64_t>(trial));
        Eigen::VectorXd f(rep.dim);
        for (std::int64_t i = 0; i < rep.dim; ++i) f[i] = uniform01(gen);
        double var = variance_mu(m, f);
        double dir = dirichlet_local(spec, f);
        if (var - rep.bound * dir > slack * std::max(1.0, var)) {
            ++rep.violations;
            if (rep.first_violation_trial < 0) rep.first_violation_trial = trial;
        }
        if (var - rep.t_std * dir > slack * std::max(1.0, var)) ++rep.violations_no_factor;
    }
    rep.pass = rep.violations == 0 && rep.t_gen <= rep.bound * (1.0 + slack);
    return rep;
}

ScalingReport verify_scaling_reduction(ChainKind kind, int n, double q) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("q must be in (0,1)");
    ChainSpec spec;
    spec.kind = kind;
    spec.sites.assign(static_cast<std::size_t>(n),
                      SiteSpace{3, {q, 0.4 * (1.0 - q), 0.6 * (1.0 - q)}, {1, 0, 0}});
    ChainMatrices full = build_generator(spec);
    Codec c(spec);

    ScalingReport rep;
    rep.n = n;
    rep.q = q;

    // Class-to-class rates: collapsing the two bad states must give rates that
    // do not depend on which bad representatives appear in the source state.
    const std::int64_t bdim = std::int64_t{1} << n;
    std::vector<std::vector<double>> lo(static_cast<std::size_t>(bdim)),
        hi(static_cast<std::size_t>(bdim));
    for (auto& v : lo) v.assign(static_cast<std::size_t>(n), 1e300);
    for (auto& v : hi) v.assign(static_cast<std::size_t>(n), -1e300);

    std::vector<int> digits;
    c.first(digits);
    std::int64_t idx = 0;
    do {
        std::int64_t b = 0;
        for (int i = 0; i < n; ++i) {
            if (digits[static_cast<std::size_t>(i)] != 0) b |= std::int64_t{1} << i;
        }
        for (int i = 0; i < n; ++i) {
            int cur = digits[static_cast<std::size_t>(i)];
            double rate = 0.0;
            for (int s = 0; s < 3; ++s) {
                if (s == cur) continue;
                bool class_change = (s == 0) != (cur == 0);
                if (!class_change) continue;
                std::int64_t other = idx + (s - cur) * c.stride[static_cast<std::size_t>(i)];
                rate += full.generator(idx, other);
            }
            auto& l = lo[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
            auto& h = hi[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
            l = std::min(l, rate);
            h = std::max(h, rate);
        }
        ++idx;
    } while (c.next(digits));

    double residual = 0.0;
    for (std::int64_t b = 0; b < bdim; ++b) {
        for (int i = 0; i < n; ++i) {
            residual = std::max(residual, hi[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] -
                                              lo[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)]);
        }
    }
    rep.lumpability_residual = residual;

    Eigen::MatrixXd lumped = Eigen::MatrixXd::Zero(bdim, bdim);
    for (std::int64_t b = 0; b < bdim; ++b) {
        for (int i = 0; i < n; ++i) {
            std::int64_t target = b ^ (std::int64_t{1} << i);
            lumped(b, target) = lo[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
            lumped(b, b) -= lumped(b, target);
        }
    }
    ChainMatrices binary = build_generator(standard_projection(spec));
    rep.generator_mismatch = (lumped - binary.generator).cwiseAbs().maxCoeff();
    rep.t_gen = relaxation_time(spec).relaxation_time;
    rep.t_std = relaxation_time(standard_projection(spec)).relaxation_time;
    rep.margin = rep.t_std / q - rep.t_gen;
    rep.pass = rep.lumpability_residual <= 1e-14 && rep.generator_mismatch <= 1e-12 &&
               rep.margin >= -1e-9 * std::max(1.0, rep.t_gen);
    return rep;
}

HittingReport verify_hitting_bound(const ChainSpec& spec) {
    spec.validate();
    ChainMatrices m = build_generator(spec);
    Codec c(spec);
    HittingReport rep;
    rep.n = static_cast<std::int64_t>(spec.sites.size());
    rep.dim = c.dim;
    rep.q = spec.min_good_mass();
    rep.relaxation = relaxation_time(spec).relaxation_time;
    rep.bound = rep.relaxation / rep.q;

    // Membership in the target set {site 0 good} follows the low digit alone.
    std::vector<std::int64_t> bad_states;
    std::vector<int> digits;
    c.first(digits);
    std::int64_t idx = 0;
    do {
        bool in_a = spec.sites[0].good[static_cast<std::size_t>(digits[0])] != 0;
        rep.mu_a += in_a ? c.mu_of(digits) : 0.0;
        if (!in_a) bad_states.push_back(idx);
        ++idx;
    } while (c.next(digits));

    const std::int64_t nb = static_cast<std::int64_t>(bad_states.size());
    if (nb == 0) {
        rep.expected_hit = 0.0;
        rep.pass = true;
        return rep;
    }
    Eigen::MatrixXd neg_lbb(nb, nb);
    for (std::int64_t r = 0; r < nb; ++r) {
        for (std::int64_t s = 0; s < nb; ++s) {
            neg_lbb(r, s) = -m.generator(bad_states[static_cast<std::size_t>(r)],
                                         bad_states[static_cast<std::size_t>(s)]);
        }
    }
    Eigen::VectorXd h = neg_lbb.partialPivLu().solve(Eigen::VectorXd::Ones(nb));
    double expected = 0.0;
    for (std::int64_t r = 0; r < nb; ++r) {
        expected += m.mu[bad_states[static_cast<std::size_t>(r)]] * h[r];
    }
    rep.expected_hit = expected;
    rep.pass = expected <= rep.bound * (1.0 + 1e-9);
    return rep;
}

}  // namespace kcmlab
