#include "kcmlab/chain.hpp"

#include <cmath>

#include "doctest.h"
#include "kcmlab/rng.hpp"

using namespace kcmlab;

namespace {

Eigen::VectorXd random_function(std::mt19937_64& gen, std::int64_t dim) {
    Eigen::VectorXd f(dim);
    for (std::int64_t i = 0; i < dim; ++i) f[i] = 2.0 * uniform01(gen) - 1.0;
    return f;
}

}  // namespace

TEST_CASE("generator structure on random chains") {
    auto gen = make_stream(301, 0);
    for (int inst = 0; inst < 20; ++inst) {
        ChainSpec spec = random_chain_spec(inst % 2 ? ChainKind::east : ChainKind::fa1f, 5, gen);
        ChainMatrices m = build_generator(spec);
        REQUIRE(m.generator.rows() == spec.dim());

        for (std::int64_t r = 0; r < m.generator.rows(); ++r) {
            CHECK(std::abs(m.generator.row(r).sum()) <= 1e-12);
            for (std::int64_t c = 0; c < m.generator.cols(); ++c) {
                if (r != c) CHECK(m.generator(r, c) >= 0);
            }
        }
        CHECK(std::abs(m.mu.sum() - 1.0) <= 1e-12);
        CHECK(reversibility_residual(m) <= 1e-12);

        // The Dirichlet form computed from the generator matches the sum of
        // constrained local variances.
        Eigen::VectorXd f = random_function(gen, spec.dim());
        double via_generator = dirichlet_mu(m, f);
        double via_local = dirichlet_local(spec, f);
        CHECK(via_generator == doctest::Approx(via_local).epsilon(1e-10));
    }
}

TEST_CASE("single site chain relaxes at rate one") {
    for (double q : {0.2, 0.5, 0.9}) {
        ChainSpec spec = homogeneous_binary(ChainKind::east, 1, q);
        SpectralReport rep = relaxation_time(spec);
        CHECK(rep.gap == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(rep.relaxation_time == doctest::Approx(1.0).epsilon(1e-12));
        HittingReport hit = verify_hitting_bound(spec);
        CHECK(hit.expected_hit == doctest::Approx((1 - q) / q).epsilon(1e-9));
        CHECK(hit.pass);
    }
}

TEST_CASE("two-site east chain spectral gap regression") {
    SpectralReport rep = relaxation_time(homogeneous_binary(ChainKind::east, 2, 0.3));
    CHECK(rep.gap == doctest::Approx(0.163339973465924).epsilon(1e-9));
    CHECK(rep.method == "dense");
    CHECK(rep.dim == 4);
}

TEST_CASE("two-site east hitting time closed form") {
    // Starting from stationarity, the mean first time site 0 is empty solves
    // to p/q + p^2/q^2 + p^2/q with p = 1 - q.
    for (double q : {0.2, 0.4, 0.5}) {
        double p = 1 - q;
        double expect = p / q + p * p / (q * q) + p * p / q;
        HittingReport rep = verify_hitting_bound(homogeneous_binary(ChainKind::east, 2, q));
        CHECK(rep.expected_hit == doctest::Approx(expect).epsilon(1e-9));
        CHECK(rep.pass);
        CHECK(rep.expected_hit < rep.bound);
    }
}

TEST_CASE("rayleigh quotients never beat the computed gap") {
    auto gen = make_stream(302, 0);
    std::vector<ChainSpec> specs;
    specs.push_back(homogeneous_binary(ChainKind::east, 4, 0.3));
    {
        ChainSpec mixed = homogeneous_binary(ChainKind::fa1f, 3, 0.4);
        for (SiteSpace& s : mixed.sites) {
            s.nstates = 3;
            s.nu = {0.4, 0.35, 0.25};
            s.good = {1, 0, 0};
        }
        mixed.validate();
        specs.push_back(mixed);
    }
    for (const ChainSpec& spec : specs) {
        ChainMatrices m = build_generator(spec);
        double gap = relaxation_time(spec).gap;
        for (int trial = 0; trial < 1000; ++trial) {
            Eigen::VectorXd f = random_function(gen, spec.dim());
            double var = variance_mu(m, f);
            if (var <= 1e-14) continue;
            double quotient = dirichlet_mu(m, f) / var;
            CHECK(quotient >= gap * (1 - 1e-6));
        }
    }
}

TEST_CASE("dense and matrix-free eigensolves agree") {
    ChainSpec spec = homogeneous_binary(ChainKind::east, 5, 0.4);
    SpectralReport dense = relaxation_time(spec);
    SpectralReport iter = relaxation_time(spec, 1);
    CHECK(dense.method == "dense");
    CHECK(iter.method == "iterative");
    CHECK(iter.gap == doctest::Approx(dense.gap).epsilon(1e-6));
}

TEST_CASE("east relaxation time grows with the chain") {
    for (double q : {0.2, 0.3, 0.4}) {
        double prev = 0;
        for (int n = 1; n <= 8; ++n) {
            double t = relaxation_time(homogeneous_binary(ChainKind::east, n, q)).relaxation_time;
            CAPTURE(n);
            CAPTURE(q);
            CHECK(t >= prev - 1e-12);
            prev = t;
        }
    }
}

TEST_CASE("eight-site relaxation time regressions") {
    double te = relaxation_time(homogeneous_binary(ChainKind::east, 8, 0.3)).relaxation_time;
    CHECK(te == doctest::Approx(98.980296514).epsilon(1e-6));
    double tf = relaxation_time(homogeneous_binary(ChainKind::fa1f, 8, 0.2)).relaxation_time;
    CHECK(tf == doctest::Approx(110.793966694).epsilon(1e-6));
}

TEST_CASE("variance bound against the binary projection") {
    SUBCASE("binary chains saturate the comparison exactly") {
        for (ChainKind kind : {ChainKind::east, ChainKind::fa1f}) {
            ChainSpec spec = homogeneous_binary(kind, 4, 0.35);
            PoincareReport rep = verify_poincare(spec, 11, 50);
            CHECK(rep.pass);
            CHECK(rep.violations == 0);
            CHECK(rep.t_gen == doctest::Approx(rep.t_std).epsilon(1e-8));
        }
    }

    SUBCASE("random multi-state chains stay within the bound") {
        auto gen = make_stream(303, 0);
        for (int inst = 0; inst < 10; ++inst) {
            ChainSpec spec = random_chain_spec(inst % 2 ? ChainKind::east : ChainKind::fa1f, 5, gen);
            PoincareReport rep = verify_poincare(spec, 400 + inst, 30);
            CAPTURE(inst);
            CHECK(rep.violations == 0);
            CHECK(rep.pass);
            CHECK(rep.bound == doctest::Approx(rep.t_std / rep.q));
        }
    }
}

TEST_CASE("three-state sites lump exactly onto the binary chain") {
    ScalingReport rep = verify_scaling_reduction(ChainKind::east, 4, 0.9);
    CHECK(rep.pass);
    CHECK(rep.lumpability_residual <= 1e-14);
    CHECK(rep.generator_mismatch <= 1e-12);
    CHECK(rep.margin >= 0);
    CHECK(rep.t_gen > 0.5);
    CHECK(rep.t_gen < 2.0);

    ScalingReport fa = verify_scaling_reduction(ChainKind::fa1f, 3, 0.5);
    CHECK(fa.pass);
}

TEST_CASE("chain validation rejects malformed inputs") {
    SUBCASE("weights must sum to one") {
        ChainSpec spec = homogeneous_binary(ChainKind::east, 2, 0.3);
        spec.sites[0].nu = {0.5, 0.6};
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }

    SUBCASE("every site needs a good and a bad state") {
        ChainSpec spec = homogeneous_binary(ChainKind::east, 2, 0.3);
        spec.sites[1].good = {1, 1};
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    }

    SUBCASE("state space growth is capped") {
        ChainSpec spec = homogeneous_binary(ChainKind::east, 17, 0.3);
        CHECK_THROWS_WITH_AS(relaxation_time(spec), doctest::Contains("2^16"),
                             std::invalid_argument);
    }

    SUBCASE("random specs are valid by construction") {
        auto gen = make_stream(304, 0);
        for (int i = 0; i < 50; ++i) {
            ChainSpec spec = random_chain_spec(ChainKind::east, 6, gen);
            CHECK(spec.sites.size() >= 1);
            CHECK(spec.sites.size() <= 6);
            spec.validate();
            CHECK(spec.min_good_mass() > 0);
            CHECK(spec.min_good_mass() < 1);
        }
    }
}
