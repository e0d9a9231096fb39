// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cfselfsim/diagnostics.hpp"
#include "cfselfsim/dynamics.hpp"
#include "cfselfsim/numerics.hpp"
#include "cfselfsim/profile.hpp"
#include "cfselfsim/scenarios.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

using namespace cfselfsim;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
}

std::string g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const CoefficientSet kProduct{2.0, 1.0, 1.0, 1.0};
const DaughterPtr kP0 = std::make_shared<PowerDaughter>(0.0);

struct ProfileRun {
    ProfileCertificate cert;
    double seconds = 0.0;
};

ProfileRun product_profile(int n_cells) {
    const auto t0 = Clock::now();
    ProfileConfig cfg;
    cfg.n_cells = n_cells;
    cfg.keep_spectra = true;
    cfg.snapshot_every = 0.05;
    ProfileRun r;
    r.cert = solve_profile(kProduct, kP0, 1e-2, 0.5 / (4.0 * std::numbers::ln2), cfg);
    r.seconds = since(t0);
    return r;
}

void criterion_oracles() {
    const OracleReport frag = fragmentation_oracle();
    const double e1 = frag.cases.front().final_error();
    report(1, e1 < 1e-3 && frag.seconds < 10.0, "L1 error " + g(e1) + " (< 1e-3), " + g(frag.seconds) + " s (< 10)");

    const OracleReport ck = constant_kernel_oracle();
    std::string detail;
    for (const auto& c : ck.cases) detail += c.label + " error " + g(c.final_error()) + ", ";
    report(2, ck.pass() && ck.seconds < 30.0, detail + "limit 1e-2, " + g(ck.seconds) + " s (< 30)");
}

void criterion_mass() {
    const double rho = 0.1 * rho_star(kProduct, *kP0);
    const GridPtr grid = make_grid(1e-6, 1e3, 256);
    const Model m(grid, kProduct, kP0, Mode::Physical);
    EvolveConfig cfg;
    cfg.horizon = 5.0;
    cfg.snapshot_every = 0.1;
    cfg.params = default_diagnostic_params(kProduct, *kP0);
    const EvolveResult r = evolve(project([rho](double x) { return rho * std::exp(-x); }, grid), cfg, m);
    double worst = 0.0;
    for (std::size_t k = 0; k < r.record.size(); ++k)
        worst = std::max(worst, std::abs(r.record.M_1[k] + r.record.gel[k] + r.record.dust[k] - rho) / rho);
    report(3, worst < 1e-10, "max relative mass defect " + g(worst) + " over " + std::to_string(r.record.size()) +
                                 " snapshots (< 1e-10)");
}

void criterion_profile(const ProfileRun& c256, const ProfileRun& c512) {
    const auto& a = c256.cert;
    const auto& b = c512.cert;
    const double w1 = max_value(a.weak_residuals), w2 = max_value(b.weak_residuals);
    const double i1 = a.integral.sup_defect, i2 = b.integral.sup_defect;
    const double mass = std::abs(moment(a.phi, 1.0) - a.rho) / a.rho;
    const bool ok = a.stationary && a.stationarity_residual < 1e-6 && a.end_s <= 30.0 && w1 < 1e-3 && i1 < 1e-2 &&
                    mass < 1e-6 && w2 <= 0.5 * w1 && i2 <= 0.5 * i1;
    std::ostringstream os;
    os << "stationary at s=" << g(a.end_s) << " (rate " << g(a.stationarity_residual) << "), weak " << g(w1) << " -> "
       << g(w2) << ", integral " << g(i1) << " -> " << g(i2) << ", M1 rel err " << g(mass);
    report(4, ok, os.str());
}

void criterion_gelation() {
    const double rho_small = 0.1 * rho_star(kProduct, *kP0);
    double fired[2] = {-1.0, -1.0};
    bool small_silent = true;
    int k = 0;
    for (double xmax : {1e4, 1e6}) {
        const int n = static_cast<int>(std::lround(20.0 * std::log10(xmax / 1e-4)));
        const GridPtr grid = make_grid(1e-4, xmax, n);
        const Model m(grid, kProduct, kP0, Mode::Physical);
        for (double rho : {2.0, rho_small}) {
            EvolveConfig cfg;
            cfg.integrator = Integrator::Patankar;
            cfg.dt = 0.01;
            cfg.horizon = rho > 1.0 ? 5.0 : 10.0;
            cfg.snapshot_every = 0.01;
            cfg.steady_tol = 0.0;
            cfg.params = default_diagnostic_params(kProduct, *kP0);
            const auto rec = evolve(project([rho](double x) { return rho * std::exp(-x); }, grid), cfg, m).record;
            const auto t = gelation_monitor(rec);
            if (rho > 1.0)
                fired[k] = t ? *t : -1.0;
            else if (t)
                small_silent = false;
        }
        ++k;
    }
    const bool both = fired[0] > 0.0 && fired[1] > 0.0 && fired[0] < 5.0 && fired[1] < 5.0;
    const double shift = both ? std::abs(fired[1] - fired[0]) / fired[0] : 1.0;
    std::ostringstream os;
    os << "rho=2 fires at t=" << g(fired[0]) << " (xmax 1e4), " << g(fired[1]) << " (xmax 1e6), shift " << g(shift)
       << " (<= 0.2); small mass silent to t=10: " << (small_silent ? "yes" : "no");
    report(5, both && shift <= 0.2 && small_silent, os.str());
}

void criterion_suite(int id, const std::vector<SuiteCheck>& checks) {
    std::string bad;
    for (const auto& c : checks)
        if (!c.pass) bad += " [" + c.check + " = " + g(c.value) + "]";
    report(id, bad.empty(), std::to_string(checks.size()) + " checks" + (bad.empty() ? "" : ", failing:" + bad));
}

void criterion_sweep() {
    const EpsSweepReport rep = epsilon_sweep(kProduct, kP0, 0.5 / (4.0 * std::numbers::ln2), {0.1, 0.05, 0.025});
    std::string detail = "consecutive X1";
    for (double d : rep.consecutive) detail += " " + g(d);
    report(8, rep.cauchy, detail);
}

void criterion_round_trip(const ProfileRun& c256, const ProfileRun& c512) {
    double dist[2];
    int k = 0;
    for (const ProfileRun* r : {&c256, &c512}) {
        const auto& cert = r->cert;
        const Model m(cert.phi.grid, kProduct, cert.daughter, Mode::Physical);
        EvolveConfig cfg;
        cfg.horizon = 1.0;
        cfg.steady_tol = 0.0;
        cfg.params = cert.record.params;
        const EvolveResult res = evolve(cert.phi, cfg, m);
        dist[k++] = x1_distance(res.final, dilate(cert.phi, 2.0, 4.0)) / cert.rho;
    }
    report(9, dist[0] < 5e-3 && dist[1] < dist[0],
           "X1/rho " + g(dist[0]) + " (256, < 5e-3) -> " + g(dist[1]) + " (512)");
}

void criterion_balance(const ProfileRun& c256, const ProfileRun& c512) {
    const auto& p = c256.cert.record.params;
    bool ok = true;
    std::string detail;
    for (double mom : {p.m0, 1.0, kProduct.lambda}) {
        double d[2];
        int k = 0;
        for (const ProfileRun* r : {&c256, &c512}) {
            const Model m(r->cert.phi.grid, kProduct, r->cert.daughter, Mode::Rescaled);
            const MomentBalance mb = moment_balance_check(r->cert.record, m, mom);
            if (mb.too_coarse) ok = false;
            d[k++] = mb.max_defect;
        }
        // Defects at roundoff level cannot halve; they count as converged.
        const bool halves = d[1] <= 0.5 * d[0] || d[1] < 1e-10;
        if (!(d[0] < 0.02 && halves)) ok = false;
        detail += "m=" + g(mom) + ": " + g(d[0]) + " -> " + g(d[1]) + "; ";
    }
    report(10, ok, detail + "limit 2e-2");
}

void criterion_bounds(const ProfileRun& c256, const ProfileRun& c512) {
    double supU[2], supM[2];
    int k = 0;
    for (const ProfileRun* r : {&c256, &c512}) {
        const auto& rec = r->cert.record;
        supU[k] = -std::numeric_limits<double>::infinity();
        supM[k] = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < rec.size(); ++i) {
            if (rec.time[i] > 20.0) break;
            supU[k] = std::max(supU[k], rec.U_m1[i]);
            supM[k] = std::max(supM[k], rec.M_lambda[i]);
        }
        ++k;
    }
    const double dU = std::abs(supU[1] - supU[0]) / std::abs(supU[0]);
    const double dM = std::abs(supM[1] - supM[0]) / std::abs(supM[0]);
    const bool ok = std::isfinite(supU[0]) && std::isfinite(supU[1]) && std::isfinite(supM[0]) &&
                    std::isfinite(supM[1]) && dU <= 0.01 && dM <= 0.01;
    report(11, ok, "sup U " + g(supU[0]) + " vs " + g(supU[1]) + " (rel " + g(dU) + "), sup M_lambda " + g(supM[0]) +
                       " vs " + g(supM[1]) + " (rel " + g(dM) + "), limit 1e-2");
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    try {
        criterion_oracles();
        criterion_mass();
        const ProfileRun c256 = product_profile(256);
        const ProfileRun c512 = product_profile(512);
        criterion_profile(c256, c512);
        criterion_gelation();
        criterion_suite(6, xlogx_suite(100000, 1));
        criterion_suite(7, mollifier_suite());
        criterion_sweep();
        criterion_round_trip(c256, c512);
        criterion_balance(c256, c512);
        criterion_bounds(c256, c512);
    } catch (const std::exception& e) {
        std::cerr << "acceptance aborted: " << e.what() << '\n';
        return 2;
    }
    std::printf("%d of 11 criteria failed, %.1f s\n", failures, since(t0));
    return failures == 0 ? 0 : 1;
}
