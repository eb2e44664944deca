#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
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

struct FamilySource {
    std::string builtin, file;

    UpdateFamily resolve() const {
        if (!builtin.empty() && !file.empty())
            throw std::runtime_error("--builtin and --family-file are mutually exclusive");
        if (!builtin.empty()) return builtin_family(builtin);
        if (!file.empty()) return load_family_file(file);
        throw std::runtime_error("one of --builtin or --family-file is required");
    }

    void attach(CLI::App* cmd) {
        cmd->add_option("--builtin", builtin,
                        "builtin family: fa1f, fa2f, east2d, duarte, anisotropic, east1d-embedded");
        cmd->add_option("--family-file", file, "family description file");
    }
};

// Stream target for reports and CSV output; defaults to stdout.
struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    void open(const std::string& path) {
        if (path.empty()) return;
        file.open(path, std::ios::binary);
        if (!file) throw std::runtime_error("cannot open output file: " + path);
        os = &file;
    }
};

Vec parse_vec(const std::string& text) {
    std::istringstream in(text);
    std::int64_t x = 0, y = 0;
    char comma = 0;
    if (!(in >> x >> comma >> y) || comma != ',')
        throw std::runtime_error("expected a direction as dx,dy, got: " + text);
    return Vec{x, y};
}

std::string family_hash(const UpdateFamily& fam) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(serialize_family(fam))));
    return buf;
}

std::string join_doubles(const std::vector<double>& vs) {
    std::string out;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i) out += ",";
        out += format_double(vs[i]);
    }
    return out;
}

int run_classify(const FamilySource& src, const OracleParams& params, const std::string& out_path) {
    UpdateFamily fam = src.resolve();
    StableSet s = stable_set(fam);
    Classification cls = classify_tri(s);
    DifficultyReport dif = family_difficulties(fam, s, cls, params);
    Output out;
    out.open(out_path);
    *out.os << classification_report(fam, s, cls, dif, params);
    return 0;
}

int run_bootstrap(const FamilySource& src, std::vector<double> qs, std::int64_t width,
                  std::int64_t height, std::int64_t trials, std::int64_t t_max,
                  std::uint64_t seed, unsigned jobs, const std::string& out_path) {
    UpdateFamily fam = src.resolve();
    for (double q : qs) {
        if (!(q > 0.0 && q <= 1.0)) throw std::runtime_error("bootstrap needs q in (0,1]");
    }
    Output out;
    out.open(out_path);
    std::string config = "bootstrap family=" + family_hash(fam) + " q=" + join_doubles(qs) +
                         " width=" + std::to_string(width) + " height=" + std::to_string(height) +
                         " trials=" + std::to_string(trials) + " t_max=" + std::to_string(t_max) +
                         " seed=" + std::to_string(seed);
    CsvWriter writer(*out.os, config, seed,
                     {{"family", fam.name.empty() ? std::string("custom") : fam.name},
                      {"family_hash", family_hash(fam)},
                      {"torus", std::to_string(width) + "x" + std::to_string(height)},
                      {"t_max", std::to_string(t_max)}});
    writer.header(kBootstrapColumns);
    for (double q : qs) {
        TUEstimate est = estimate_T_U(fam, q, width, height, trials, t_max, seed, jobs);
        writer.row(bootstrap_row(est, static_cast<double>(t_max)));
    }
    return 0;
}

int run_kcm(const FamilySource& src, std::vector<double> qs, std::int64_t width,
            std::int64_t height, double t_max, std::int64_t trials, std::uint64_t seed,
            unsigned jobs, bool force, bool stationarity, double burn_in,
            const std::string& events_path, const std::string& out_path) {
    UpdateFamily fam = src.resolve();
    for (double q : qs) {
        if (!(q > 0.0 && q < 1.0)) throw std::runtime_error("kcm needs q in (0,1)");
    }
    Classification cls = classify_tri(stable_set(fam));
    Output out;
    out.open(out_path);
    std::string config = "kcm family=" + family_hash(fam) + " q=" + join_doubles(qs) +
                         " width=" + std::to_string(width) + " height=" + std::to_string(height) +
                         " trials=" + std::to_string(trials) + " t_max=" + format_double(t_max) +
                         " seed=" + std::to_string(seed);
    CsvWriter writer(*out.os, config, seed,
                     {{"family", fam.name.empty() ? std::string("custom") : fam.name},
                      {"family_hash", family_hash(fam)},
                      {"class", to_string(cls.label)}});
    writer.header(kKcmColumns);

    if (cls.label == ClassLabel::subcritical && !force) {
        std::cerr << "warning: family is subcritical, dynamics is not ergodic at small q; "
                     "skipping (use --force to run anyway)\n";
        for (double q : qs) *out.os << "# skipped q=" << format_double(q) << " (subcritical)\n";
        return 0;
    }

    if (!events_path.empty() && qs.size() != 1)
        throw std::runtime_error("--events-out needs exactly one q value");

    for (double q : qs) {
        KcmParams p;
        p.q = q;
        p.width = width;
        p.height = height;
        p.t_max = t_max;
        p.seed = seed;
        if (!events_path.empty()) {
            std::ofstream ev(events_path, std::ios::binary);
            if (!ev) throw std::runtime_error("cannot open event log: " + events_path);
            EventSink sink = [&ev](const KcmEvent& e) {
                ev.write(reinterpret_cast<const char*>(&e.site), 4);
                ev.write(reinterpret_cast<const char*>(&e.time), 8);
                ev.write(reinterpret_cast<const char*>(&e.empty), 1);
            };
            simulate(fam, p, &sink);
            *out.os << "# events_out=" << events_path
                    << " record=(site:u32,time:f64,empty:u8) little-endian\n";
        }
        TauEstimate est = estimate_tau0(fam, p, trials, jobs);
        writer.row(kcm_row(fam.name.empty() ? std::string("custom") : fam.name, est, width, height));
        if (stationarity) {
            StationarityReport rep = stationarity_check(fam, p, burn_in, std::min<std::int64_t>(trials, 16), jobs);
            *out.os << "# stationarity q=" << format_double(q)
                    << " mean_density=" << format_double(rep.mean_density)
                    << " sd=" << format_double(rep.sd)
                    << " autocorr=" << format_double(rep.autocorr)
                    << " result=" << (rep.pass ? "PASS" : "FAIL");
            if (!rep.note.empty()) *out.os << " note=\"" << rep.note << "\"";
            *out.os << "\n";
        }
    }
    return 0;
}

int run_droplet(const FamilySource& src, const std::string& u_text, const std::string& kind,
                const std::string& mode_text, std::int64_t w, std::int64_t ell, std::int64_t n1,
                std::int64_t n2, const OracleParams& params, const std::string& out_path) {
    UpdateFamily fam = src.resolve();
    std::string name = fam.name.empty() ? std::string("custom") : fam.name;
    StableSet s = stable_set(fam);
    Classification cls = classify_tri(s);
    Output out;
    out.open(out_path);

    if (cls.label == ClassLabel::supercritical) {
        RectangleReport rep = verify_supercritical_rectangle(fam, cls, n1, n2, true);
        *out.os << rectangle_report_text(name, rep);
        return 0;
    }
    if (cls.label == ClassLabel::subcritical) {
        *out.os << "family=" << name << " subcritical: no droplet construction applies\n";
        return 0;
    }

    Vec u;
    if (!u_text.empty()) {
        u = parse_vec(u_text);
    } else {
        DifficultyReport dif = family_difficulties(fam, s, cls, params);
        u = dif.alpha_witness;
    }

    SpreadMode mode;
    if (kind == "generalized") {
        mode = SpreadMode::generalized;
    } else if (mode_text == "advance-one") {
        mode = SpreadMode::advance_one;
    } else if (mode_text == "advance-width") {
        mode = SpreadMode::advance_width;
    } else if (mode_text == "corollary") {
        mode = SpreadMode::corollary;
    } else {
        throw std::runtime_error("unknown mode: " + mode_text);
    }

    HalfRing ring = build_half_ring(fam, s, u, w, ell);
    SpreadSetup setup;
    try {
        setup = prepare_spread(fam, s, ring, params);
    } catch (const VoraciousError& err) {
        *out.os << "family=" << name << " mode=" << to_string(mode) << " u=" << to_string(u)
                << " w=" << w << " ell=" << ell << " verdict=FAIL\n  note: " << err.what() << "\n";
        return 0;
    }
    std::vector<PlacedHelper> helpers = build_helpers(setup, mode);
    SpreadReport rep = verify_spread(fam, setup, mode, helpers);
    *out.os << spread_report_text(name, ring, rep);
    return 0;
}

int run_chain(const std::string& kind_text, std::vector<int> ns, std::vector<double> qs,
              std::int64_t dense_limit, std::int64_t poincare, std::int64_t poincare_trials,
              bool hitting, bool scaling, std::uint64_t seed, const std::string& out_path) {
    ChainKind kind;
    if (kind_text == "east") {
        kind = ChainKind::east;
    } else if (kind_text == "fa1f") {
        kind = ChainKind::fa1f;
    } else {
        throw std::runtime_error("unknown chain kind: " + kind_text);
    }
    for (double q : qs) {
        if (!(q > 0.0 && q < 1.0)) throw std::runtime_error("chain needs q in (0,1)");
    }
    Output out;
    out.open(out_path);
    std::string ns_text;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (i) ns_text += ",";
        ns_text += std::to_string(ns[i]);
    }
    std::string config = "chain kind=" + kind_text + " n=" + ns_text + " q=" + join_doubles(qs) +
                         " dense_limit=" + std::to_string(dense_limit) +
                         " seed=" + std::to_string(seed);
    CsvWriter writer(*out.os, config, seed, {{"kind", kind_text}});
    writer.header(kChainColumns);
    for (int n : ns) {
        for (double q : qs) {
            SpectralReport rep = relaxation_time(homogeneous_binary(kind, n, q), dense_limit);
            writer.row(chain_row(kind, n, q, rep));
        }
    }
    if (poincare > 0) {
        auto gen = make_stream(seed, 97);
        std::int64_t total = 0;
        for (std::int64_t i = 0; i < poincare; ++i) {
            ChainSpec spec = random_chain_spec(kind, 6, gen);
            PoincareReport rep = verify_poincare(spec, seed + static_cast<std::uint64_t>(i),
                                                 poincare_trials);
            *out.os << "# " << poincare_report_line(i, rep, kind) << "\n";
            total += rep.violations;
        }
        *out.os << "# violations: " << total << "\n";
    }
    if (hitting) {
        for (int n : ns) {
            for (double q : qs) {
                HittingReport rep = verify_hitting_bound(homogeneous_binary(kind, n, q));
                *out.os << "# hitting n=" << n << " q=" << format_double(q) << ": ";
                if (rep.pass) {
                    *out.os << "bound holds, margin "
                            << format_double(rep.bound - rep.expected_hit) << "\n";
                } else {
                    *out.os << "bound violated by "
                            << format_double(rep.expected_hit - rep.bound) << "\n";
                }
            }
        }
    }
    if (scaling) {
        for (int n : ns) {
            for (double q : qs) {
                ScalingReport rep = verify_scaling_reduction(kind, n, q);
                *out.os << "# scaling n=" << n << " q=" << format_double(q)
                        << " lumpability=" << format_double(rep.lumpability_residual)
                        << " mismatch=" << format_double(rep.generator_mismatch)
                        << " margin=" << format_double(rep.margin)
                        << " result=" << (rep.pass ? "PASS" : "FAIL") << "\n";
            }
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kcmlab: bootstrap percolation classification and constrained dynamics toolkit"};
    app.require_subcommand(1);

    std::uint64_t seed = 1;
    unsigned jobs = 1;
    std::string out_path;

    OracleParams oracle;
    auto add_oracle = [&oracle](CLI::App* cmd) {
        cmd->add_option("--bound", oracle.bound, "largest helper-set size searched");
        cmd->add_option("--window-radius", oracle.window_radius,
                        "search window radius (0 = 8x family radius)");
        cmd->add_option("--line-span", oracle.line_span, "consecutive line sites required");
        cmd->add_option("--budget", oracle.budget,
                        "oracle enumeration budget (0 = default or KCMLAB_BUDGET)");
    };

    FamilySource cls_src;
    CLI::App* cls_cmd = app.add_subcommand("classify", "stable directions, difficulties, class");
    cls_src.attach(cls_cmd);
    add_oracle(cls_cmd);
    cls_cmd->add_option("--out", out_path, "write the report to a file");

    FamilySource boot_src;
    std::vector<double> boot_q;
    std::int64_t boot_w = 64, boot_h = 64, boot_trials = 32, boot_tmax = 200;
    CLI::App* boot_cmd = app.add_subcommand("bootstrap", "median infection time of the origin");
    boot_src.attach(boot_cmd);
    boot_cmd->add_option("-q,--q", boot_q, "vacancy density grid")->required();
    boot_cmd->add_option("--width", boot_w, "torus width");
    boot_cmd->add_option("--height", boot_h, "torus height");
    boot_cmd->add_option("--trials", boot_trials, "independent trials per q");
    boot_cmd->add_option("--t-max", boot_tmax, "round horizon");
    boot_cmd->add_option("--seed", seed, "rng seed");
    boot_cmd->add_option("--jobs", jobs, "worker threads");
    boot_cmd->add_option("--out", out_path, "CSV output path");

    FamilySource kcm_src;
    std::vector<double> kcm_q;
    std::int64_t kcm_w = 64, kcm_h = 64, kcm_trials = 100;
    double kcm_tmax = 200.0, kcm_burn = 20.0;
    bool kcm_force = false, kcm_stat = false;
    std::string events_path;
    CLI::App* kcm_cmd = app.add_subcommand("kcm", "stationary constrained Glauber dynamics");
    kcm_src.attach(kcm_cmd);
    kcm_cmd->add_option("-q,--q", kcm_q, "vacancy density grid")->required();
    kcm_cmd->add_option("--width", kcm_w, "torus width");
    kcm_cmd->add_option("--height", kcm_h, "torus height");
    kcm_cmd->add_option("--trials", kcm_trials, "independent trials per q");
    kcm_cmd->add_option("--t-max", kcm_tmax, "time horizon");
    kcm_cmd->add_option("--seed", seed, "rng seed");
    kcm_cmd->add_option("--jobs", jobs, "worker threads");
    kcm_cmd->add_flag("--force", kcm_force, "run even for subcritical families");
    kcm_cmd->add_flag("--stationarity", kcm_stat, "also run the stationarity diagnostic");
    kcm_cmd->add_option("--burn-in", kcm_burn, "stationarity burn-in time");
    kcm_cmd->add_option("--events-out", events_path, "binary flip log for one trajectory");
    kcm_cmd->add_option("--out", out_path, "CSV output path");

    FamilySource drop_src;
    std::string drop_u, drop_kind = "plain", drop_mode = "advance-width";
    std::int64_t drop_w = 6, drop_ell = 40, drop_n1 = 8, drop_n2 = 8;
    CLI::App* drop_cmd = app.add_subcommand("droplet", "half-ring and rectangle droplet checks");
    drop_src.attach(drop_cmd);
    drop_cmd->add_option("-u,--direction", drop_u, "semicircle midpoint as dx,dy");
    drop_cmd->add_option("--kind", drop_kind, "ring kind: plain or generalized")
        ->check(CLI::IsMember({"plain", "generalized"}));
    drop_cmd->add_option("--mode", drop_mode, "advance-one, advance-width or corollary")
        ->check(CLI::IsMember({"advance-one", "advance-width", "corollary"}));
    drop_cmd->add_option("-w,--width", drop_w, "ring width");
    drop_cmd->add_option("--ell", drop_ell, "strip length");
    drop_cmd->add_option("--n1", drop_n1, "rectangle length (supercritical families)");
    drop_cmd->add_option("--n2", drop_n2, "rectangle height (supercritical families)");
    add_oracle(drop_cmd);
    drop_cmd->add_option("--out", out_path, "write the report to a file");

    std::string chain_kind = "east";
    std::vector<int> chain_n{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> chain_q;
    std::int64_t chain_dense = 4096, chain_poincare = 0, chain_ptrials = 20;
    bool chain_hit = false, chain_scaling = false;
    CLI::App* chain_cmd = app.add_subcommand("chain", "exact spectra of constrained chains");
    chain_cmd->add_option("--kind", chain_kind, "east or fa1f")
        ->check(CLI::IsMember({"east", "fa1f"}));
    chain_cmd->add_option("-n,--n", chain_n, "chain lengths");
    chain_cmd->add_option("-q,--q", chain_q, "good-state masses")->required();
    chain_cmd->add_option("--dense-limit", chain_dense, "largest dense eigensolve");
    chain_cmd->add_option("--poincare", chain_poincare, "check this many random specs");
    chain_cmd->add_option("--poincare-trials", chain_ptrials, "test functions per spec");
    chain_cmd->add_flag("--hitting", chain_hit, "verify the mean hitting-time bound");
    chain_cmd->add_flag("--scaling", chain_scaling, "verify the three-state reduction");
    chain_cmd->add_option("--seed", seed, "rng seed");
    chain_cmd->add_option("--out", out_path, "output path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cls_cmd->parsed()) return run_classify(cls_src, oracle, out_path);
        if (boot_cmd->parsed())
            return run_bootstrap(boot_src, boot_q, boot_w, boot_h, boot_trials, boot_tmax, seed,
                                 jobs, out_path);
        if (kcm_cmd->parsed())
            return run_kcm(kcm_src, kcm_q, kcm_w, kcm_h, kcm_tmax, kcm_trials, seed, jobs,
                           kcm_force, kcm_stat, kcm_burn, events_path, out_path);
        if (drop_cmd->parsed())
            return run_droplet(drop_src, drop_u, drop_kind, drop_mode, drop_w, drop_ell, drop_n1,
                               drop_n2, oracle, out_path);
        if (chain_cmd->parsed())
            return run_chain(chain_kind, chain_n, chain_q, chain_dense, chain_poincare,
                             chain_ptrials, chain_hit, chain_scaling, seed, out_path);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
