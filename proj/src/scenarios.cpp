#include "cfselfsim/scenarios.hpp"

#include "cfselfsim/diagnostics.hpp"
#include "cfselfsim/dynamics.hpp"
#include "cfselfsim/grid.hpp"
#include "cfselfsim/numerics.hpp"
#include "cfselfsim/operators.hpp"
#include "cfselfsim/profile.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

namespace cfselfsim {

namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

OracleCase run_case(const std::string& label, const CoefficientSet& c, const DaughterPtr& d,
                    const std::function<double(double, double)>& exact, int n_cells, double xmin, double xmax,
                    double t_end, double dt_cap) {
    const GridPtr grid = make_grid(xmin, xmax, n_cells);
    const Model model(grid, c, d, Mode::Physical);
    EvolveConfig cfg;
    cfg.horizon = t_end;
    cfg.snapshot_every = t_end / 10.0;
    cfg.steady_tol = 0.0;
    cfg.dt = dt_cap;
    cfg.keep_spectra = true;
    const Spectrum f0 = project([&](double x) { return exact(0.0, x); }, grid);
    const EvolveResult res = evolve(f0, cfg, model);

    OracleCase out;
    out.label = label;
    out.steps = res.steps;
    for (std::size_t k = 0; k < res.record.size(); ++k) {
        const double t = res.record.time[k];
        const Spectrum ex = project([&](double x) { return exact(t, x); }, grid);
        out.times.push_back(t);
        out.errors.push_back(x1_distance(res.record.spectra[k], ex));
    }
    return out;
}

SuiteCheck check(const std::string& suite, const std::string& name, double value, double tol, bool pass) {
    return SuiteCheck{suite, name, value, tol, pass};
}

SuiteCheck near(const std::string& suite, const std::string& name, double value, double expected, double tol) {
    const double err = std::abs(value - expected);
    return SuiteCheck{suite, name, value, tol, err <= tol};
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    for (const auto& l : lines) out << l << '\n';
}

std::string flag(bool b) { return b ? "true" : "false"; }

// Keys, versions and derived threshold quantities shared by every manifest.
std::vector<std::string> manifest_header(const RunSpec& spec, double rho) {
    std::vector<std::string> lines;
    lines.push_back("version = " + std::string(kVersion));
    for (const auto& [k, v] : spec.resolved) lines.push_back(k + " = " + v);
    if (spec.scenario != Scenario::Oracle && spec.scenario != Scenario::Verify) {
        const DaughterPtr d = make_daughter(spec);
        lines.push_back("derived.rho_star = " + fmt(rho_star(spec.coeffs, *d)));
        if (rho > 0.0) lines.push_back("derived.delta_rho = " + fmt(delta_rho(spec.coeffs, *d, rho)));
    }
    return lines;
}

ProfileConfig profile_config(const RunSpec& spec) {
    ProfileConfig cfg;
    cfg.xmin = spec.xmin;
    cfg.xmax = spec.xmax;
    cfg.n_cells = spec.n_cells;
    cfg.integrator = spec.integrator;
    cfg.dt = spec.dt;
    cfg.cfl = spec.cfl;
    cfg.s_max = spec.s_max;
    cfg.steady_tol = spec.steady_tol;
    cfg.snapshot_every = spec.snapshot_every;
    cfg.reconstruction = spec.reconstruction;
    return cfg;
}

void certificate_lines(const ProfileCertificate& cert, const std::string& prefix, std::vector<std::string>& lines) {
    lines.push_back(prefix + "rho = " + fmt(cert.rho));
    lines.push_back(prefix + "eps = " + fmt(cert.eps));
    lines.push_back(prefix + "rho_star_eps = " + fmt(cert.rho_star_eps));
    lines.push_back(prefix + "above_threshold = " + flag(cert.above_threshold));
    lines.push_back(prefix + "stationary = " + flag(cert.stationary));
    lines.push_back(prefix + "stationarity_residual = " + fmt(cert.stationarity_residual));
    lines.push_back(prefix + "end_s = " + fmt(cert.end_s));
    lines.push_back(prefix + "steps = " + std::to_string(cert.steps));
    lines.push_back(prefix + "M_1 = " + fmt(moment(cert.phi, 1.0)));
    lines.push_back(prefix + "gel_mass = " + fmt(cert.phi.gel_mass));
    lines.push_back(prefix + "dust_mass = " + fmt(cert.phi.dust_mass));
    lines.push_back(prefix + "clip_mass = " + fmt(cert.phi.clip_mass));
    for (const auto& w : cert.weak_residuals) lines.push_back(prefix + "weak_residual." + w.label + " = " + fmt(w.value));
    lines.push_back(prefix + "weak_residual.max = " + fmt(max_value(cert.weak_residuals)));
    lines.push_back(prefix + "integral_residual = " + fmt(cert.integral.sup_defect));
    lines.push_back(prefix + "integral_residual.at_y = " + fmt(cert.integral.at_y));
    lines.push_back(prefix + "small_size_ok = " + flag(cert.integral.small_size_ok));
    write_report(cert.invariant_report, prefix + "invariant.", lines);
    for (std::size_t k = 0; k < cert.warnings.size(); ++k)
        lines.push_back(prefix + "warning." + std::to_string(k) + " = " + cert.warnings[k]);
}

void write_certificate(const ProfileCertificate& cert, const fs::path& dir, std::vector<std::string> lines) {
    fs::create_directories(dir);
    write_snapshot_csv(cert.phi, (dir / "profile.csv").string());
    write_trajectory_csv(cert.record, (dir / "trajectory.csv").string());
    certificate_lines(cert, "", lines);
    write_lines(dir / "manifest.txt", lines);
}

// Non-stationarity is a failure only below the threshold; above it the run is exploratory.
bool certificate_ok(const ProfileCertificate& cert) { return cert.stationary || cert.above_threshold; }

int run_evolve(const RunSpec& spec, const fs::path& dir) {
    const DaughterPtr base = make_daughter(spec);
    const DaughterPtr d = spec.eps > 0.0 ? DaughterPtr(mollify(base, spec.eps)) : base;
    const GridPtr grid = make_grid(spec.xmin, spec.xmax, spec.n_cells);
    const Model model(grid, spec.coeffs, d, spec.mode, spec.reconstruction);
    const double rho = spec.initial_rho;
    const Spectrum f0 = project([rho](double x) { return rho * std::exp(-x); }, grid);

    EvolveConfig cfg;
    cfg.mode = spec.mode;
    cfg.integrator = spec.integrator;
    cfg.horizon = spec.horizon;
    cfg.cfl = spec.cfl;
    cfg.dt = spec.dt;
    cfg.snapshot_every = spec.snapshot_every;
    cfg.steady_tol = spec.steady_tol;
    cfg.max_clip_mass = spec.max_clip_mass;
    cfg.params = default_diagnostic_params(spec.coeffs, *base);

    auto lines = manifest_header(spec, rho);
    fs::create_directories(dir);
    try {
        const EvolveResult res = evolve(f0, cfg, model);
        write_trajectory_csv(res.record, (dir / "trajectory.csv").string());
        write_snapshot_csv(res.final, (dir / "final.csv").string());
        const double m0 = moment(f0, 1.0);
        const auto fired = spec.mode == Mode::Physical ? gelation_monitor(res.record) : std::nullopt;
        lines.push_back("result.end_time = " + fmt(res.end_time));
        lines.push_back("result.steps = " + std::to_string(res.steps));
        lines.push_back("result.stationary = " + flag(res.stationary));
        lines.push_back("result.stationarity = " + fmt(res.stationarity));
        lines.push_back("result.M_1 = " + fmt(moment(res.final, 1.0)));
        lines.push_back("result.gel_mass = " + fmt(res.final.gel_mass));
        lines.push_back("result.dust_mass = " + fmt(res.final.dust_mass));
        lines.push_back("result.clip_mass = " + fmt(res.final.clip_mass));
        lines.push_back("result.mass_defect = " +
                        fmt((moment(res.final, 1.0) + res.final.gel_mass + res.final.dust_mass - m0) / m0));
        lines.push_back("result.gelation_time = " + (fired ? fmt(*fired) : std::string("none")));
        write_lines(dir / "manifest.txt", lines);
        return 0;
    } catch (const NumericalError& e) {
        lines.push_back("result.error = " + std::string(e.what()));
        write_lines(dir / "manifest.txt", lines);
        std::cerr << "evolve failed: " << e.what() << '\n';
        return 1;
    }
}

int run_solve_profile(const RunSpec& spec, const fs::path& dir) {
    const DaughterPtr d = make_daughter(spec);
    auto lines = manifest_header(spec, spec.rho);
    try {
        const ProfileCertificate cert = solve_profile(spec.coeffs, d, spec.eps, spec.rho, profile_config(spec));
        write_certificate(cert, dir, lines);
        for (const auto& w : cert.warnings) std::cerr << "warning: " << w << '\n';
        return certificate_ok(cert) ? 0 : 1;
    } catch (const NumericalError& e) {
        fs::create_directories(dir);
        lines.push_back("result.error = " + std::string(e.what()));
        write_lines(dir / "manifest.txt", lines);
        std::cerr << "solve-profile failed: " << e.what() << '\n';
        return 1;
    }
}

int run_sweep_eps(const RunSpec& spec, const fs::path& dir) {
    const DaughterPtr d = make_daughter(spec);
    const EpsSweepReport rep = epsilon_sweep(spec.coeffs, d, spec.rho, spec.eps_list, profile_config(spec),
                                             spec.workers);
    auto header = manifest_header(spec, spec.rho);
    auto lines = header;
    bool ok = true;
    for (std::size_t k = 0; k < rep.eps.size(); ++k) {
        const std::string member = "member_" + std::to_string(k);
        lines.push_back(member + ".eps = " + fmt(rep.eps[k]));
        if (!rep.failures[k].empty()) lines.push_back(member + ".failure = " + rep.failures[k]);
        if (rep.certificates[k].phi.grid) {
            auto member_lines = header;
            member_lines.push_back("member.eps = " + fmt(rep.eps[k]));
            write_certificate(rep.certificates[k], dir / member, member_lines);
            if (!certificate_ok(rep.certificates[k])) ok = false;
        } else {
            ok = false;
        }
    }
    for (std::size_t k = 0; k < rep.consecutive.size(); ++k)
        lines.push_back("consecutive_x1." + std::to_string(k) + " = " + fmt(rep.consecutive[k]));
    lines.push_back("cauchy = " + flag(rep.cauchy));

    std::vector<std::string> csv;
    std::string head = "eps";
    for (double m : rep.moment_orders) head += ",M_" + fmt(m);
    csv.push_back(head);
    for (std::size_t k = 0; k < rep.eps.size(); ++k) {
        std::string row = fmt(rep.eps[k]);
        for (double v : rep.moments[k]) row += "," + fmt(v);
        csv.push_back(row);
    }
    fs::create_directories(dir);
    write_lines(dir / "moments.csv", csv);
    write_lines(dir / "manifest.txt", lines);
    return ok ? 0 : 1;
}

int run_sweep_rho(const RunSpec& spec, const fs::path& dir) {
    const DaughterPtr d = make_daughter(spec);
    const ProfileConfig cfg = profile_config(spec);
    const std::size_t n = spec.rho_list.size();
    std::vector<ProfileCertificate> certs(n);
    std::vector<std::string> failures(n);

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                certs[k] = solve_profile(spec.coeffs, d, spec.eps, spec.rho_list[k], cfg);
            } catch (const std::exception& e) {
                failures[k] = e.what();
            }
        }
    };
    int nw = spec.workers > 0 ? spec.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nw = std::min<int>(nw, static_cast<int>(n));
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    auto header = manifest_header(spec, 0.0);
    auto lines = header;
    std::vector<std::string> csv{"rho,stationary,M_lambda_over_rho,weak_residual_max,integral_residual"};
    bool ok = true;
    const double lambda = spec.coeffs.lambda;
    for (std::size_t k = 0; k < n; ++k) {
        const std::string member = "member_" + std::to_string(k);
        lines.push_back(member + ".rho = " + fmt(spec.rho_list[k]));
        if (!failures[k].empty()) {
            lines.push_back(member + ".failure = " + failures[k]);
            ok = false;
            continue;
        }
        const auto& cert = certs[k];
        auto member_lines = header;
        member_lines.push_back("derived.delta_rho = " + fmt(delta_rho(spec.coeffs, *d, cert.rho)));
        write_certificate(cert, dir / member, member_lines);
        if (!certificate_ok(cert)) ok = false;
        csv.push_back(fmt(cert.rho) + "," + (cert.stationary ? "1" : "0") + "," +
                      fmt(moment(cert.phi, lambda) / cert.rho) + "," + fmt(max_value(cert.weak_residuals)) + "," +
                      fmt(cert.integral.sup_defect));
    }
    fs::create_directories(dir);
    write_lines(dir / "summary.csv", csv);
    write_lines(dir / "manifest.txt", lines);
    return ok ? 0 : 1;
}

int run_verify(const RunSpec& spec, const fs::path& dir) {
    const auto checks = property_suites(spec.xlogx_samples, spec.seed);
    std::vector<std::string> csv{"suite,check,value,tolerance,pass"};
    bool ok = true;
    for (const auto& c : checks) {
        csv.push_back(c.suite + "," + c.check + "," + fmt(c.value) + "," + fmt(c.tolerance) + "," +
                      (c.pass ? "1" : "0"));
        if (!c.pass) {
            ok = false;
            std::cerr << "verify: " << c.suite << " / " << c.check << " failed (value " << fmt(c.value) << ")\n";
        }
    }
    fs::create_directories(dir);
    write_lines(dir / "verify.csv", csv);
    auto lines = manifest_header(spec, 0.0);
    lines.push_back("result.checks = " + std::to_string(checks.size()));
    lines.push_back("result.pass = " + flag(ok));
    write_lines(dir / "manifest.txt", lines);
    return ok ? 0 : 1;
}

int run_oracle(const RunSpec& spec, const fs::path& dir) {
    const OracleReport rep = spec.oracle == "fragmentation"
                                 ? fragmentation_oracle(spec.n_cells, spec.xmin, spec.xmax)
                                 : constant_kernel_oracle(spec.n_cells, spec.xmin, spec.xmax);
    std::vector<std::string> csv;
    std::string head = "time";
    for (const auto& c : rep.cases) head += "," + c.label;
    csv.push_back(head);
    const std::size_t rows = rep.cases.front().times.size();
    for (std::size_t k = 0; k < rows; ++k) {
        std::string row = fmt(rep.cases.front().times[k]);
        for (const auto& c : rep.cases) row += "," + (k < c.errors.size() ? fmt(c.errors[k]) : std::string("nan"));
        csv.push_back(row);
    }
    fs::create_directories(dir);
    write_lines(dir / "errors.csv", csv);
    auto lines = manifest_header(spec, 0.0);
    for (const auto& c : rep.cases) {
        lines.push_back("result." + c.label + ".final_error = " + fmt(c.final_error()));
        lines.push_back("result." + c.label + ".steps = " + std::to_string(c.steps));
    }
    lines.push_back("result.tolerance = " + fmt(rep.tolerance));
    lines.push_back("result.pass = " + flag(rep.pass()));
    write_lines(dir / "manifest.txt", lines);
    for (const auto& c : rep.cases)
        std::cout << rep.name << " " << c.label << ": error " << fmt(c.final_error()) << " (tolerance "
                  << fmt(rep.tolerance) << ")\n";
    return rep.pass() ? 0 : 1;
}

}  // namespace

bool OracleReport::pass() const {
    if (cases.empty()) return false;
    for (const auto& c : cases)
        if (!(c.final_error() < tolerance)) return false;
    return true;
}

OracleReport fragmentation_oracle(int n_cells, double xmin, double xmax, double t_end) {
    const auto t0 = std::chrono::steady_clock::now();
    OracleReport rep;
    rep.name = "fragmentation";
    rep.tolerance = 1e-3;
    const CoefficientSet c{2.0, 1.0, 0.0, 1.0};
    const DaughterPtr d = std::make_shared<PowerDaughter>(0.0);
    auto exact = [](double t, double x) { return (1.0 + t) * (1.0 + t) * std::exp(-(1.0 + t) * x); };
    rep.cases.push_back(run_case("pure_fragmentation", c, d, exact, n_cells, xmin, xmax, t_end, 0.0));
    rep.seconds = seconds_since(t0);
    return rep;
}

OracleReport constant_kernel_oracle(int n_cells, double xmin, double xmax, double t_end) {
    const auto t0 = std::chrono::steady_clock::now();
    OracleReport rep;
    rep.name = "constant-kernel";
    rep.tolerance = 1e-2;
    // K = K0 (x^0 y^0 + x^0 y^0) = 2 K0.
    const CoefficientSet k2{0.0, 0.0, 1.0, 0.0};
    const CoefficientSet k1{0.0, 0.0, 0.5, 0.0};
    auto exact2 = [](double t, double x) { return std::exp(-x / (1.0 + t)) / ((1.0 + t) * (1.0 + t)); };
    auto exact1 = [](double t, double x) {
        const double s = 2.0 / (2.0 + t);
        return s * s * std::exp(-s * x);
    };
    rep.cases.push_back(run_case("K2", k2, nullptr, exact2, n_cells, xmin, xmax, t_end, 0.01));
    rep.cases.push_back(run_case("K1", k1, nullptr, exact1, n_cells, xmin, xmax, t_end, 0.01));
    rep.seconds = seconds_since(t0);
    return rep;
}

std::vector<SuiteCheck> xlogx_suite(long samples, std::uint64_t seed) {
    std::vector<SuiteCheck> out;
    const InequalityReport r = check_ail(samples, 1e-6, 1e6, seed);
    out.push_back(check("xlogx", "sampled_violations", static_cast<double>(r.violations), 0.0, r.violations == 0));
    double diag = 0.0;
    for (double x : {1e-6, 1e-3, 0.5, 1.0, 7.0, 1e3, 1e6}) {
        const double rhs = xlogx_rhs(x, x);
        diag = std::max(diag, std::abs(rhs - xlogx_lhs(x, x)) / rhs);
    }
    out.push_back(check("xlogx", "diagonal_margin", diag, 1e-12, diag < 1e-12));
    out.push_back(check("xlogx", "point_1_4", xlogx_rhs(1.0, 4.0) - xlogx_lhs(1.0, 4.0), 0.0,
                        std::abs(xlogx_lhs(1.0, 4.0) - (5.0 * std::log(5.0) - 4.0 * std::log(4.0))) < 1e-12 &&
                            xlogx_lhs(1.0, 4.0) <= xlogx_rhs(1.0, 4.0)));
    return out;
}

std::vector<SuiteCheck> mollifier_suite() {
    std::vector<SuiteCheck> out;
    const CoefficientSet c;
    const DaughterPtr d = std::make_shared<PowerDaughter>(0.0);
    const double rs = rho_star(c, *d);
    double prev_bln = std::numeric_limits<double>::infinity();
    double prev_rho = std::numeric_limits<double>::infinity();
    bool bln_monotone = true;
    bool rho_monotone = true;
    double last_bln = 0.0;
    for (double eps : {0.1, 0.05, 0.025, 0.0125}) {
        const MollifiedPtr m = mollify(d, eps);
        const std::string tag = "eps=" + fmt(eps);
        const double norm = std::abs(m->first_moment_exact() - 1.0);
        out.push_back(check("mollifier", tag + " normalization", norm, 1e-10, norm < 1e-10));
        const double edge = eps - eps * eps;
        double below = 0.0;
        for (int k = 0; k <= 64; ++k) below = std::max(below, std::abs(m->B(edge * k / 64.0)));
        out.push_back(check("mollifier", tag + " support", below, 0.0, below == 0.0));
        const double bln = std::abs(m->log_moment() - 0.5);
        if (!(bln < prev_bln)) bln_monotone = false;
        prev_bln = bln;
        last_bln = bln;
        const double drho = std::abs(rho_star(c, *m) - rs);
        if (!(drho < prev_rho)) rho_monotone = false;
        prev_rho = drho;
    }
    out.push_back(check("mollifier", "b_ln monotone", prev_bln, 0.0, bln_monotone));
    out.push_back(check("mollifier", "b_ln at eps=0.0125", last_bln, 1e-2, last_bln < 1e-2));
    out.push_back(check("mollifier", "rho_star_eps monotone", prev_rho, 0.0, rho_monotone));
    return out;
}

std::vector<SuiteCheck> property_suites(long xlogx_samples, std::uint64_t seed) {
    std::vector<SuiteCheck> out;
    auto add = [&](const std::vector<SuiteCheck>& v) { out.insert(out.end(), v.begin(), v.end()); };

    // coefficients
    const CoefficientSet prod;
    const CoefficientSet k15{1.5, 0.75, 1.0, 2.0};
    const auto p0 = std::make_shared<PowerDaughter>(0.0);
    const auto pm1 = std::make_shared<PowerDaughter>(-1.0);
    out.push_back(near("coefficients", "kernel 2xy at (2,3)", kernel_eval(prod, 2.0, 3.0), 12.0, 1e-12));
    out.push_back(near("coefficients", "kernel lambda=1.5 (4,1)", kernel_eval(k15, 4.0, 1.0),
                       2.0 * std::pow(4.0, 0.75), 1e-12));
    out.push_back(near("coefficients", "frag_rate lambda=1.5 a0=2 x=4", frag_rate(k15, 4.0), 4.0, 1e-12));
    out.push_back(near("coefficients", "b_{0,1} nu=0", daughter_moment(*p0, 0.0, 1.0), 2.0, 1e-10));
    out.push_back(near("coefficients", "b_{1,1} nu=-1", daughter_moment(*pm1, 1.0, 1.0), 1.0, 1e-10));
    out.push_back(near("coefficients", "b_ln nu=0", daughter_log_moment(*p0), 0.5, 1e-10));
    out.push_back(near("coefficients", "b_ln nu=-1", daughter_log_moment(*pm1), 1.0, 1e-10));
    out.push_back(near("coefficients", "rho_star nu=0", rho_star(prod, *p0), 1.0 / (4.0 * std::numbers::ln2), 1e-10));
    out.push_back(near("coefficients", "rho_star nu=-1", rho_star(prod, *pm1), 1.0 / (2.0 * std::numbers::ln2), 1e-10));
    out.push_back(check("coefficients", "product kernel admissible", static_cast<double>(validate(prod, *p0).size()), 0.0,
                        validate(prod, *p0).empty()));
    const CoefficientSet bad{2.0, 0.4, 1.0, 1.0};
    out.push_back(check("coefficients", "alpha=0.4 rejected", static_cast<double>(validate(bad, *p0).size()), 0.0,
                        !validate(bad, *p0).empty()));
    const MollifiedPtr m3 = mollify(p0, 1e-3);
    out.push_back(near("coefficients", "beta at eps=1e-3", m3->beta(), 1.0, 1e-2));
    add(mollifier_suite());

    // grid
    const GridPtr wide = make_grid(1e-9, 1e3, 32768);
    const Spectrum e = project([](double x) { return std::exp(-x); }, wide);
    out.push_back(near("grid", "M_0 of e^{-x}", moment(e, 0.0), 1.0, 1e-6));
    out.push_back(near("grid", "M_1 of e^{-x}", moment(e, 1.0), 1.0, 1e-8));
    out.push_back(near("grid", "M_2 of e^{-x}", moment(e, 2.0), 2.0, 1e-6));
    out.push_back(near("grid", "log moment of e^{-x}", log_moment(e), 1.0 - std::numbers::egamma, 1e-6));
    out.push_back(near("diagnostics", "U_{1/2} of e^{-x}", lyapunov_U(e, 0.5),
                       1.0 - std::numbers::egamma + 6.0 / std::numbers::e * std::tgamma(1.5), 1e-5));

    // operators
    const GridPtr g256 = make_grid(1e-6, 1e3, 256);
    const Spectrum f = project([](double x) { return std::exp(-x); }, g256);
    const OperatorResult coag = coagulation_apply(f, CoefficientSet{0.0, 0.0, 1.0, 0.0});
    out.push_back(near("operators", "K=2 M_0 rate", moment(coag.rate, 0.0), -1.0, 0.02));
    const CoefficientSet pure_frag{2.0, 1.0, 0.0, 1.0};
    const OperatorResult frag = fragmentation_apply(f, pure_frag, p0);
    out.push_back(near("operators", "fragmentation M_0 rate", moment(frag.rate, 0.0), moment(f, 1.0), 0.02));
    const double frag_cons = std::abs(moment(frag.rate, 1.0) + frag.flux);
    out.push_back(check("operators", "fragmentation mass balance", frag_cons, 1e-12, frag_cons < 1e-12));
    const OperatorResult coag1 = coagulation_apply(f, prod);
    const double coag_cons = std::abs(moment(coag1.rate, 1.0) + coag1.flux);
    out.push_back(check("operators", "coagulation mass balance", coag_cons, 1e-12, coag_cons < 1e-12));
    const OperatorResult tr = transport_apply(f);
    const double tr_cons = std::abs(moment(tr.rate, 1.0) + tr.flux);
    out.push_back(check("operators", "transport M_1 rate plus outflow", tr_cons, 1e-12, tr_cons < 1e-12));
    out.push_back(near("operators", "transport M_0 rate", moment(tr.rate, 0.0), -moment(f, 0.0), 0.02));
    out.push_back(near("operators", "chi for x^2 at (1,2)", chi_theta(power_test(2.0), 1.0, 2.0), 4.0, 1e-12));
    out.push_back(near("operators", "N for x ln x at y=3", n_theta(xlogx_test(), *p0, 3.0), 0.5 * 3.0, 1e-8));
    out.push_back(near("operators", "N for x", n_theta(identity_test(), *p0, 3.0), 0.0, 1e-12));

    // dynamics
    out.push_back(near("dynamics", "s_lambda(3), lambda=2", s_lambda(3.0, 2.0), 4.0, 1e-12));
    const Rescaled rs = scale_to_rescaled(f, 3.0, 2.0);
    out.push_back(near("dynamics", "s for t=3", rs.s, std::log(4.0), 1e-12));
    out.push_back(near("dynamics", "scale map keeps M_1", moment(rs.g, 1.0) + rs.g.dust_mass + rs.g.gel_mass,
                       moment(f, 1.0), 1e-12));
    {
        const Model m(g256, prod, p0, Mode::Physical);
        EvolveConfig cfg;
        cfg.params = default_diagnostic_params(prod, *p0);
        const EvolveResult r = evolve(Spectrum(g256), cfg, m);
        out.push_back(check("dynamics", "zero state stationary", static_cast<double>(r.steps), 0.0,
                            r.stationary && r.steps == 0));
    }

    // diagnostics
    const double rho_half = rho_star(prod, *p0) / 2.0;
    out.push_back(near("diagnostics", "delta_rho at rho_star/2", delta_rho(prod, *p0, rho_half),
                       std::numbers::ln2 * rho_star(prod, *p0) / 4.0, 1e-12));
    out.push_back(near("diagnostics", "delta_rho at rho_star", delta_rho(prod, *p0, 2.0 * rho_half), 0.0, 1e-12));
    add(xlogx_suite(xlogx_samples, seed));

    // profile
    const double rho = 0.5 * rho_star(prod, *p0);
    const Spectrum h = project([rho](double x) { return rho * std::exp(-x); }, g256);
    const auto id = weak_residual(h, prod, *p0, {identity_test()});
    out.push_back(check("profile", "identity residual", id.front().value, 1e-12, id.front().value < 1e-12));
    const double disc = max_value(weak_residual(h, prod, *p0, saturating_ladder(*g256)));
    out.push_back(check("profile", "non-profile discriminated", disc, 1e-2, disc > 1e-2));
    return out;
}

std::string output_root(const RunSpec& spec, const std::string& override_dir) {
    if (!override_dir.empty()) return override_dir;
    if (const char* env = std::getenv("CF_SELFSIM_OUT"); env && *env) return env;
    return spec.out_dir;
}

int run(const RunSpec& spec, const std::string& dir) {
    const fs::path out(dir);
    try {
        fs::create_directories(out);
    } catch (const fs::filesystem_error& e) {
        throw ConfigError("output directory not writable: " + dir);
    }
    try {
        switch (spec.scenario) {
            case Scenario::Evolve: return run_evolve(spec, out);
            case Scenario::SolveProfile: return run_solve_profile(spec, out);
            case Scenario::SweepEps: return run_sweep_eps(spec, out);
            case Scenario::SweepRho: return run_sweep_rho(spec, out);
            case Scenario::Verify: return run_verify(spec, out);
            case Scenario::Oracle: return run_oracle(spec, out);
        }
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
    return 1;
}

}  // namespace cfselfsim
