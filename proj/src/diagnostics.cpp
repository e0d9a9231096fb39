#include "cfselfsim/diagnostics.hpp"

#include "cfselfsim/numerics.hpp"
#include "cfselfsim/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace cfselfsim {

double lyapunov_U(const Spectrum& s, double m) {
    if (!(m < 1.0)) throw InputError("lyapunov_U needs m < 1");
    return log_moment(s) + 3.0 / (std::numbers::e * (1.0 - m)) * moment(s, m);
}

double delta_rho(const CoefficientSet& c, const Daughter& d, double rho) {
    return c.K0 * std::numbers::ln2 * (rho_star(c, d) - rho) / 2.0;
}

double delta_rho_m(const CoefficientSet& c, const Daughter& d, double rho, double m) {
    if (!(rho > 0.0)) throw InputError("rho must be positive");
    if (m == 1.0) throw InputError("delta_rho_m needs m != 1");
    const double b = daughter_moment(d, 1.0 + c.lambda - c.alpha, 1.0);
    return c.a0 * (1.0 - b) * std::pow(rho, (1.0 - c.lambda) / (m - 1.0)) / 8.0;
}

InequalityReport check_ail(long samples, double lo, double hi, std::uint64_t seed) {
    if (!(lo > 0.0 && hi > lo)) throw InputError("check_ail needs 0 < lo < hi");
    InequalityReport r;
    r.name = "xlogx";
    r.samples = samples;
    r.worst_margin = std::numeric_limits<double>::infinity();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    for (long k = 0; k < samples; ++k) {
        const double x = std::exp(u(rng));
        const double y = std::exp(u(rng));
        const double rhs = xlogx_rhs(x, y);
        const double margin = rhs - xlogx_lhs(x, y);
        // Equality holds on the diagonal; allow roundoff relative to the sides.
        if (margin < -1e-12 * rhs) ++r.violations;
        r.worst_margin = std::min(r.worst_margin, margin / rhs);
    }
    r.context = "range=[" + fmt(lo) + ", " + fmt(hi) + "] seed=" + std::to_string(seed);
    return r;
}

double InvariantReport::value(const std::string& key) const {
    for (const auto& [k, v] : entries)
        if (k == key) return v;
    throw InputError("no report entry " + key);
}

InvariantReport invariant_set_report(const Spectrum& s, const CoefficientSet& c, const Daughter& d, double eps,
                                     const DiagnosticParams& p) {
    (void)d;
    InvariantReport r;
    r.rho = moment(s, 1.0);
    auto add = [&](const std::string& k, double v) {
        r.entries.emplace_back(k, v);
        if (!std::isfinite(v)) r.finite = false;
    };
    add("M_1", r.rho);
    add("U_m1", lyapunov_U(s, p.m1));
    add("M_m0", moment(s, p.m0));
    add("M_mu1", moment(s, p.mu1));
    add("M_1+lambda", moment(s, 1.0 + c.lambda));
    add("M_2+lambda", moment(s, 2.0 + c.lambda));
    add("Lq1", weighted_lq_norm(s, p.m1, p.q1));
    add("M_lambda-2", moment(s, c.lambda - 2.0));
    add("TV", total_variation(s));
    add("eps", eps);
    return r;
}

RefinementComparison compare_reports(const InvariantReport& coarse, const InvariantReport& fine, double tol) {
    RefinementComparison out;
    for (const auto& [k, v] : coarse.entries) {
        const double w = fine.value(k);
        const double scale = std::max(std::abs(v), std::abs(w));
        if (scale == 0.0) continue;
        if (!(std::abs(v - w) <= tol * scale)) {
            out.stable = false;
            out.drifting.push_back(k);
        }
    }
    return out;
}

namespace {

// Derivative at index k from three samples (nonuniform spacing).
double three_point(const std::vector<double>& t, const std::vector<double>& y, std::size_t a, std::size_t b,
                   std::size_t c, std::size_t k) {
    const double ta = t[a], tb = t[b], tc = t[c], x = t[k];
    const double la = ((x - tb) + (x - tc)) / ((ta - tb) * (ta - tc));
    const double lb = ((x - ta) + (x - tc)) / ((tb - ta) * (tb - tc));
    const double lc = ((x - ta) + (x - tb)) / ((tc - ta) * (tc - tb));
    return la * y[a] + lb * y[b] + lc * y[c];
}

}  // namespace

MomentBalance moment_balance_check(const TrajectoryRecord& rec, const Model& m, double mom, double t_from,
                                   double t_to) {
    MomentBalance out;
    const auto& sp = rec.spectra;
    if (sp.size() != rec.size()) throw InputError("moment_balance_check needs a record with kept spectra");
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < rec.size(); ++k)
        if (rec.time[k] >= t_from && (t_to < 0.0 || rec.time[k] <= t_to)) idx.push_back(k);
    if (idx.size() < 3) {
        out.too_coarse = true;
        return out;
    }
    std::vector<double> t, M;
    for (std::size_t k : idx) {
        t.push_back(rec.time[k]);
        M.push_back(moment(sp[k], mom));
    }
    double max_gap = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) max_gap = std::max(max_gap, t[k] - t[k - 1]);
    out.too_coarse = max_gap > 0.1;

    const TestFunction th = power_test(mom);
    const DaughterPtr& d = m.daughter();
    const std::size_t n = t.size();
    for (std::size_t k = 0; k < n; ++k) {
        double fd;
        if (k == 0)
            fd = three_point(t, M, 0, 1, 2, 0);
        else if (k + 1 == n)
            fd = three_point(t, M, n - 3, n - 2, n - 1, k);
        else
            fd = three_point(t, M, k - 1, k, k + 1, k);
        const WeakTerms w = weak_form_terms(sp[idx[k]], m.coeffs(), d.get(), th);
        const double rate =
            m.mode() == Mode::Rescaled ? w.rate() : w.coagulation - w.fragmentation;
        const double defect = std::abs(fd - rate) / std::max(std::abs(rate), M[k]);
        out.time.push_back(t[k]);
        out.fd_rate.push_back(fd);
        out.weak_rate.push_back(rate);
        if (defect > out.max_defect) {
            out.max_defect = defect;
            out.at_time = t[k];
        }
    }
    return out;
}

void write_report(const InvariantReport& r, const std::string& prefix, std::vector<std::string>& lines) {
    for (const auto& [k, v] : r.entries) lines.push_back(prefix + k + " = " + fmt(v));
}

}  // namespace cfselfsim
