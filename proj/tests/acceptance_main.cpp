#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kcmlab/chain.hpp"
#include "kcmlab/closure.hpp"
#include "kcmlab/csv.hpp"
#include "kcmlab/difficulty.hpp"
#include "kcmlab/direction.hpp"
#include "kcmlab/droplet.hpp"
#include "kcmlab/family.hpp"
#include "kcmlab/kcm.hpp"
#include "kcmlab/report.hpp"
#include "kcmlab/rng.hpp"

namespace {

using namespace kcmlab;

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void fail(std::string why) {
        pass = false;
        details.push_back(std::move(why));
    }
    void require(bool ok, const std::string& why) {
        if (!ok) fail(why);
    }
};

unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : std::min(hw, 8u);
}

// ---------------------------------------------------------------- criterion 1

const std::vector<std::pair<std::string, std::string>> kPinnedSummaries = {
    {"fa1f", "supercritical, unrooted"},
    {"east2d", "supercritical, rooted"},
    {"fa2f", "critical, α=1, β=1, β-unrooted, balanced"},
    {"duarte", "critical, α=1, β>4 (bound), α-rooted, unbalanced"},
    {"anisotropic", "critical, α=1, β=1, β-unrooted, unbalanced"},
};

std::string build_classification_report(Outcome* out) {
    std::string report;
    for (const auto& [name, want] : kPinnedSummaries) {
        UpdateFamily fam = builtin_family(name);
        StableSet s = stable_set(fam);
        Classification cls = classify_tri(s);
        DifficultyReport dif = family_difficulties(fam, s, cls, {});
        std::string got = classification_summary(cls, dif);
        if (out) {
            out->require(got == want, name + ": expected \"" + want + "\", got \"" + got + "\"");
        }
        report += classification_report(fam, s, cls, dif, {});
        report += "\n";
    }
    return report;
}

Outcome criterion1(std::string& report) {
    Outcome out;
    report = build_classification_report(&out);
    return out;
}

// ---------------------------------------------------------------- criterion 2

UpdateFamily random_family(std::mt19937_64& gen) {
    UpdateFamily fam;
    fam.name = "random";
    int rules = 1 + static_cast<int>(uniform_below(gen, 3));
    for (int r = 0; r < rules; ++r) {
        UpdateRule rule;
        int k = 1 + static_cast<int>(uniform_below(gen, 4));
        while (static_cast<int>(rule.offsets.size()) < k) {
            Vec off{static_cast<std::int64_t>(uniform_below(gen, 5)) - 2,
                    static_cast<std::int64_t>(uniform_below(gen, 5)) - 2};
            if (off == Vec{0, 0}) continue;
            if (std::find(rule.offsets.begin(), rule.offsets.end(), off) != rule.offsets.end())
                continue;
            rule.offsets.push_back(off);
        }
        std::sort(rule.offsets.begin(), rule.offsets.end());
        if (std::find(fam.rules.begin(), fam.rules.end(), rule) == fam.rules.end())
            fam.rules.push_back(rule);
    }
    return fam;
}

Configuration random_configuration(std::mt19937_64& gen, double density) {
    bool torus = sample_bernoulli(gen, 0.5);
    std::int64_t w = 4 + static_cast<std::int64_t>(uniform_below(gen, 17));
    std::int64_t h = 4 + static_cast<std::int64_t>(uniform_below(gen, 17));
    Region region = torus ? Region::torus(w, h) : Region::box(-w / 2, -h / 2, w / 2, h / 2);
    Configuration cfg = Configuration::empty_of(region);
    for (std::size_t i = 0; i < region.site_count(); ++i) {
        if (sample_bernoulli(gen, density)) cfg.set(i);
    }
    return cfg;
}

Outcome criterion2() {
    Outcome out;
    auto gen = make_stream(42, 0);
    for (int i = 0; i < 200 && out.pass; ++i) {
        UpdateFamily fam = random_family(gen);
        Configuration cfg = random_configuration(gen, 0.3);
        ClosureResult fast = closure(fam, cfg);
        ClosureResult ref = closure_naive(fam, cfg);
        out.require(fast.final == ref.final && fast.rounds == ref.rounds &&
                        fast.first_round == ref.first_round,
                    "closure mismatch on instance " + std::to_string(i));
    }
    for (int i = 0; i < 100 && out.pass; ++i) {
        UpdateFamily fam = random_family(gen);
        Configuration cfg = random_configuration(gen, 0.3);
        Configuration once = closure(fam, cfg).final;
        out.require(closure(fam, once).final == once,
                    "idempotence failed on instance " + std::to_string(i));
    }
    for (int i = 0; i < 100 && out.pass; ++i) {
        UpdateFamily fam = random_family(gen);
        Configuration small = random_configuration(gen, 0.2);
        Configuration big = small;
        for (std::size_t k = 0; k < big.region.site_count(); ++k) {
            if (sample_bernoulli(gen, 0.1)) big.set(k);
        }
        Configuration fs = closure(fam, small).final;
        Configuration fb = closure(fam, big).final;
        for (std::size_t k = 0; k < fs.region.site_count() && out.pass; ++k) {
            out.require(!fs.get(k) || fb.get(k),
                        "monotonicity failed on instance " + std::to_string(i));
        }
    }
    return out;
}

// ---------------------------------------------------------------- criterion 3

bool witness_on_strip(const HalfRing& ring, std::size_t j, const std::vector<Vec>& witnesses) {
    const VStrip& st = ring.strips[j];
    const Vec wu{ring.u.x * ring.w, ring.u.y * ring.w};
    for (Vec x : witnesses) {
        const Vec y{x.x - wu.x, x.y - wu.y};
        std::int64_t a = dot(y, st.v), g = dot(y, ring.uperp);
        if (a >= st.A && a <= st.A + st.W && g >= st.Glo && g <= st.Ghi) return true;
    }
    return false;
}

std::string build_spread_report(Outcome* out) {
    std::string report;
    UpdateFamily fam = builtin_family("duarte");
    StableSet s = stable_set(fam);
    for (std::int64_t w : {6, 8}) {
        for (std::int64_t ell : {40, 60}) {
            const std::string grid = "w=" + std::to_string(w) + " ell=" + std::to_string(ell);
            HalfRing ring = build_half_ring(fam, s, Vec{1, 0}, w, ell);
            SpreadSetup setup = prepare_spread(fam, s, ring);

            auto helpers = build_helpers(setup, SpreadMode::advance_width);
            SpreadReport adv = verify_spread(fam, setup, SpreadMode::advance_width, helpers);
            report += spread_report_text("duarte", ring, adv);
            if (out) out->require(adv.passed, "advance-width failed at " + grid);

            for (std::size_t j = 0; j < ring.strips.size(); ++j) {
                bool strip_has_helpers = false;
                std::vector<PlacedHelper> kept;
                for (const PlacedHelper& h : helpers) {
                    if (h.strip == j) {
                        strip_has_helpers = true;
                    } else {
                        kept.push_back(h);
                    }
                }
                if (!strip_has_helpers) continue;
                SpreadReport ablated = verify_spread(fam, setup, SpreadMode::advance_width, kept);
                report += spread_report_text("duarte", ring, ablated);
                if (out) {
                    out->require(!ablated.passed, "ablated strip " + std::to_string(j) +
                                                      " still passed at " + grid);
                    out->require(witness_on_strip(ring, j, ablated.witnesses),
                                 "no witness on ablated strip " + std::to_string(j) + " at " + grid);
                }
            }

            auto gen_helpers = build_helpers(setup, SpreadMode::generalized);
            SpreadReport core = verify_spread(fam, setup, SpreadMode::generalized, gen_helpers);
            report += spread_report_text("duarte", ring, core);
            if (out) out->require(core.passed, "generalized core advance failed at " + grid);
        }
    }
    return report;
}

Outcome criterion3(std::string& report) {
    Outcome out;
    report = build_spread_report(&out);
    return out;
}

// ---------------------------------------------------------------- criterion 4

Outcome criterion4() {
    Outcome out;
    {
        UpdateFamily fam = builtin_family("fa1f");
        Classification cls = classify_tri(stable_set(fam));
        RectangleReport rep = verify_supercritical_rectangle(fam, cls, 8, 8, true);
        out.require(rep.grow_back && rep.grow_forward && !rep.inconclusive,
                    "fa1f rectangle should grow both ways");
    }
    {
        UpdateFamily fam = builtin_family("east2d");
        Classification cls = classify_tri(stable_set(fam));
        RectangleReport rep = verify_supercritical_rectangle(fam, cls, 8, 8, true);
        out.require(rep.grow_back, "east2d rectangle should grow backwards");
        out.require(rep.forward_checked && !rep.grow_forward,
                    "east2d rectangle should not grow forwards");
    }
    return out;
}

// ---------------------------------------------------------------- criterion 5

std::string build_poincare_report(Outcome* out) {
    std::string report;
    for (ChainKind kind : {ChainKind::east, ChainKind::fa1f}) {
        const std::uint64_t base = kind == ChainKind::east ? 6000 : 6500;
        auto gen = make_stream(5001, kind == ChainKind::east ? 0 : 1);
        for (std::int64_t i = 0; i < 50; ++i) {
            ChainSpec spec = random_chain_spec(kind, 6, gen);
            PoincareReport rep = verify_poincare(spec, base + static_cast<std::uint64_t>(i), 20);
            report += poincare_report_line(i, rep, kind);
            report += "\n";
            if (out) {
                out->require(rep.violations == 0,
                             to_string(kind) + " spec " + std::to_string(i) + " had " +
                                 std::to_string(rep.violations) + " violations");
                out->require(rep.pass, to_string(kind) + " spec " + std::to_string(i) +
                                           " relaxation bound failed");
            }
        }
    }
    int idx = 0;
    for (ChainKind kind : {ChainKind::east, ChainKind::fa1f}) {
        for (auto [n, q] : std::vector<std::pair<int, double>>{
                 {3, 0.25}, {4, 0.35}, {5, 0.5}, {6, 0.2}}) {
            PoincareReport rep = verify_poincare(homogeneous_binary(kind, n, q),
                                                 7000 + static_cast<std::uint64_t>(idx++), 10);
            double rel = std::abs(rep.t_gen - rep.t_std) / rep.t_std;
            report += "homogeneous kind=" + to_string(kind) + " n=" + std::to_string(n) +
                      " q=" + format_double(q) + " t_gen=" + format_double(rep.t_gen) +
                      " t_std=" + format_double(rep.t_std) + "\n";
            if (out) {
                out->require(rel <= 1e-8, "homogeneous binary t_gen != t_std (rel " +
                                              format_double(rel) + ")");
                out->require(rep.violations == 0, "homogeneous binary spec had violations");
            }
        }
    }
    return report;
}

Outcome criterion5(std::string& report) {
    Outcome out;
    report = build_poincare_report(&out);
    return out;
}

// ---------------------------------------------------------------- criterion 6

Outcome criterion6() {
    Outcome out;
    const std::vector<double> qs{0.5, 0.4, 0.3, 0.2};
    std::vector<double> t_east, t_fa;
    for (double q : qs) {
        t_east.push_back(relaxation_time(homogeneous_binary(ChainKind::east, 8, q)).relaxation_time);
        t_fa.push_back(relaxation_time(homogeneous_binary(ChainKind::fa1f, 8, q)).relaxation_time);
    }
    for (std::size_t i = 0; i + 1 < qs.size(); ++i) {
        out.require(t_east[i + 1] > t_east[i],
                    "east relaxation time not strictly increasing as q decreases at q=" +
                        format_double(qs[i + 1]));
    }
    std::vector<double> logs;
    for (double t : t_east) logs.push_back(std::log(t));
    for (std::size_t i = 0; i + 2 < logs.size(); ++i) {
        double second = (logs[i + 2] - logs[i + 1]) - (logs[i + 1] - logs[i]);
        out.require(second >= -1e-6,
                    "log relaxation time not convex along the grid (second difference " +
                        format_double(second) + ")");
    }
    for (std::size_t i = 0; i < qs.size(); ++i) {
        if (qs[i] > 0.4 + 1e-12) continue;
        out.require(t_fa[i] < t_east[i], "fa1f should relax faster than east at q=" +
                                             format_double(qs[i]));
    }
    return out;
}

// ---------------------------------------------------------------- criterion 7

Outcome criterion7() {
    Outcome out;
    for (int n : {2, 4, 8}) {
        for (double q : {0.2, 0.4}) {
            HittingReport rep = verify_hitting_bound(homogeneous_binary(ChainKind::east, n, q));
            out.require(rep.pass, "hitting bound failed at n=" + std::to_string(n) +
                                      " q=" + format_double(q) + " (E=" +
                                      format_double(rep.expected_hit) +
                                      ", bound=" + format_double(rep.bound) + ")");
        }
    }
    return out;
}

// ---------------------------------------------------------------- criterion 8

Outcome criterion8() {
    Outcome out;
    const unsigned jobs = worker_count();
    UpdateFamily fa = builtin_family("fa1f");
    UpdateFamily east = builtin_family("east2d");

    try {
        KcmParams p;
        p.q = 0.2;
        p.width = 64;
        p.height = 64;
        p.t_max = 200;
        p.seed = 2024;
        StationarityReport rep = stationarity_check(fa, p, 0.0, 8, jobs);
        out.require(rep.pass, "stationary density " + format_double(rep.mean_density) +
                                  " not within 3 sigma of 0.2");

        TauEstimate tau = estimate_tau0(fa, p, 2000, jobs);
        double se = std::sqrt(0.2 * 0.8 / 2000.0);
        out.require(std::abs(tau.fraction_zero - 0.2) <= 3.0 * se,
                    "fraction starting empty " + format_double(tau.fraction_zero) +
                        " not within 3 sigma of 0.2");

        KcmParams trend;
        trend.q = 0.15;
        trend.width = 64;
        trend.height = 64;
        trend.t_max = 200;
        trend.seed = 2025;
        TauEstimate te = estimate_tau0(east, trend, 500, jobs);
        TauEstimate tf = estimate_tau0(fa, trend, 500, jobs);
        double gap_se = std::sqrt(te.std_error * te.std_error + tf.std_error * tf.std_error);
        out.require(te.mean - tf.mean > 3.0 * gap_se,
                    "east2d mean tau0 " + format_double(te.mean) +
                        " not 3 sigma above fa1f mean " + format_double(tf.mean));
    } catch (const std::logic_error& err) {
        out.fail(std::string("constraint witness violation: ") + err.what());
    }
    return out;
}

// ---------------------------------------------------------------- criterion 9

Outcome criterion9(const std::string& c1, const std::string& c3, const std::string& c5) {
    Outcome out;
    const std::filesystem::path dir = "acceptance_reports";
    std::filesystem::create_directories(dir);

    auto verify_rerun = [&](const std::string& label, const std::string& first,
                            const std::string& second) {
        out.require(first == second, label + " rerun differs in memory");
        std::vector<std::string> paths;
        int run = 1;
        for (const std::string* text : {&first, &second}) {
            std::string path = (dir / (label + "_run" + std::to_string(run++) + ".txt")).string();
            std::ofstream f(path, std::ios::binary);
            f << *text;
            paths.push_back(path);
        }
        std::ifstream a(paths[0], std::ios::binary), b(paths[1], std::ios::binary);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        out.require(sa.str() == sb.str(), label + " files are not byte-identical");
        out.require(sa.str() == first, label + " file does not match the computed report");
    };

    verify_rerun("classification", c1, build_classification_report(nullptr));
    verify_rerun("spread", c3, build_spread_report(nullptr));
    verify_rerun("poincare", c5, build_poincare_report(nullptr));
    return out;
}

}  // namespace

int main() {
    struct Entry {
        int index;
        std::string name;
        double budget_seconds;
        Outcome outcome;
        double elapsed = 0;
    };

    std::string c1_report, c3_report, c5_report;
    std::vector<Entry> entries;
    auto run = [&entries](int index, const std::string& name, double budget, auto&& fn) {
        auto start = std::chrono::steady_clock::now();
        Outcome out = fn();
        double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (budget > 0 && elapsed >= budget) {
            out.fail("runtime " + kcmlab::format_double(elapsed) + "s exceeded the " +
                     kcmlab::format_double(budget) + "s budget");
        }
        entries.push_back({index, name, budget, std::move(out), elapsed});
    };

    run(1, "classification regression table", 60, [&] { return criterion1(c1_report); });
    run(2, "closure equals the naive fixpoint, idempotent and monotone", 30,
        [&] { return criterion2(); });
    run(3, "duarte half-ring advance, helper ablation, generalized core", 120,
        [&] { return criterion3(c3_report); });
    run(4, "supercritical rectangle growth", 10, [&] { return criterion4(); });
    run(5, "variance bound on random chains and homogeneous equality", 300,
        [&] { return criterion5(c5_report); });
    run(6, "east relaxation scaling trend", 120, [&] { return criterion6(); });
    run(7, "hitting-time bound grid", 60, [&] { return criterion7(); });
    run(8, "kcm stationarity, witnesses and infection-time trend", 600,
        [&] { return criterion8(); });
    run(9, "deterministic reruns are byte-identical", 0,
        [&] { return criterion9(c1_report, c3_report, c5_report); });

    bool all = true;
    char timing[32];
    for (const Entry& e : entries) {
        std::snprintf(timing, sizeof timing, "%.1f", e.elapsed);
        std::cout << (e.outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << e.index << ": "
                  << e.name << " (" << timing << " s)\n";
        for (const std::string& d : e.outcome.details) std::cout << "       " << d << "\n";
        all = all && e.outcome.pass;
    }
    std::cout << (all ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: failures present")
              << "\n";
    return all ? 0 : 1;
}
