#include "kcmlab/report.hpp"

#include <cmath>
#include <sstream>

#include "kcmlab/csv.hpp"

namespace kcmlab {
namespace {

std::string value_with_prefix(const std::string& prefix, const DifficultyValue& v) {
    if (v.is_finite()) return prefix + "=" + v.to_string();
    return prefix + v.to_string() + " (bound)";
}

std::string rooted_label_pretty(const std::string& label) {
    if (label == "alpha-rooted") return "α-rooted";
    if (label == "beta-unrooted") return "β-unrooted";
    return label;
}

}  // namespace

std::string classification_summary(const Classification& cls, const DifficultyReport& dif) {
    switch (cls.label) {
        case ClassLabel::supercritical:
            return std::string("supercritical, ") + (cls.rooted ? "rooted" : "unrooted");
        case ClassLabel::subcritical:
            return "subcritical";
        case ClassLabel::critical:
            break;
    }
    std::string out = "critical, ";
    out += value_with_prefix("α", dif.alpha);
    out += ", ";
    out += value_with_prefix("β", dif.beta);
    out += ", ";
    out += rooted_label_pretty(dif.rooted_label);
    out += ", ";
    out += dif.balanced ? "balanced" : "unbalanced";
    return out;
}

std::string classification_report(const UpdateFamily& fam, const StableSet& s,
                                  const Classification& cls, const DifficultyReport& dif,
                                  const OracleParams& params) {
    std::ostringstream out;
    out << "family: " << fam.name << "\n";
    out << "stable set: " << s.to_string() << "\n";
    out << "class: " << classification_summary(cls, dif) << "\n";
    if (cls.witness) out << "witness semicircle: " << to_string(*cls.witness) << "\n";
    if (cls.label == ClassLabel::critical) {
        out << "alpha witness: " << to_string(dif.alpha_witness) << "\n";
    }
    out << "per-direction difficulty:\n";
    if (dif.per_direction.empty()) out << "  (none: no isolated stable directions)\n";
    for (const auto& d : dif.per_direction) {
        out << "  " << to_string(d.u) << ": " << d.value.to_string();
        if (d.plus_size) out << " plus=" << *d.plus_size;
        if (d.minus_size) out << " minus=" << *d.minus_size;
        out << "\n";
    }
    std::int64_t window = params.window_radius > 0 ? params.window_radius : 8 * fam.radius();
    std::uint64_t budget = params.budget > 0 ? params.budget : oracle_budget_default();
    out << "oracle: bound=" << params.bound << " window_radius=" << window
        << " line_span=" << params.line_span << " budget=" << budget << "\n";
    return out.str();
}

std::string spread_report_text(const std::string& family, const HalfRing& ring,
                               const SpreadReport& rep) {
    std::ostringstream out;
    out << "family=" << family << " mode=" << to_string(rep.mode) << " u=" << to_string(ring.u)
        << " w=" << ring.w << " ell=" << ring.ell << " strips=" << ring.strips.size()
        << " lambda=" << rep.lambda << " targets=" << rep.target_sites
        << " infected=" << rep.infected_targets << " verdict=" << (rep.passed ? "PASS" : "FAIL")
        << "\n";
    for (const Vec& wv : rep.witnesses) out << "  witness " << to_string(wv) << "\n";
    if (!rep.note.empty()) out << "  note: " << rep.note << "\n";
    return out.str();
}

std::string rectangle_report_text(const std::string& family, const RectangleReport& rep) {
    std::ostringstream out;
    out << "family=" << family << " growth=" << to_string(rep.v)
        << " back=" << (rep.grow_back ? "PASS" : "FAIL");
    if (rep.forward_checked) out << " forward=" << (rep.grow_forward ? "PASS" : "FAIL");
    if (rep.inconclusive) out << " inconclusive";
    out << "\n";
    for (const Vec& wv : rep.witnesses) out << "  witness " << to_string(wv) << "\n";
    if (!rep.note.empty()) out << "  note: " << rep.note << "\n";
    return out.str();
}

std::string poincare_report_line(std::int64_t index, const PoincareReport& rep, ChainKind kind) {
    std::ostringstream out;
    out << "index=" << index << " kind=" << to_string(kind) << " n=" << rep.n
        << " dim=" << rep.dim << " q=" << format_double(rep.q)
        << " t_gen=" << format_double(rep.t_gen) << " t_std=" << format_double(rep.t_std)
        << " bound=" << format_double(rep.bound) << " violations=" << rep.violations << " "
        << (rep.pass ? "PASS" : "FAIL");
    return out.str();
}

std::vector<std::string> bootstrap_row(const TUEstimate& est, double t_max) {
    auto cell = [&](double v) {
        if (std::isfinite(v)) return format_double(v);
        return "≥ " + format_double(t_max);
    };
    return {format_double(est.q), std::to_string(est.trials),       cell(est.median_rounds),
            cell(est.ci_low),     cell(est.ci_high),                std::to_string(est.censored),
            std::to_string(est.seed)};
}

std::vector<std::string> kcm_row(const std::string& family, const TauEstimate& est,
                                 std::int64_t width, std::int64_t height) {
    std::string torus = std::to_string(width) + "x" + std::to_string(height);
    return {family,
            format_double(est.q),
            torus,
            std::to_string(est.trials),
            format_double(est.mean),
            format_double(est.std_error),
            std::to_string(est.censored),
            format_double(est.fraction_zero),
            std::to_string(est.seed)};
}

std::vector<std::string> chain_row(ChainKind kind, int n, double q, const SpectralReport& rep) {
    return {to_string(kind),
            std::to_string(n),
            format_double(q),
            format_double(rep.gap),
            format_double(rep.relaxation_time),
            rep.method,
            format_double(rep.tolerance)};
}

}  // namespace kcmlab
