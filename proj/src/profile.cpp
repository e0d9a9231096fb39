#include "cfselfsim/profile.hpp"

#include "cfselfsim/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace cfselfsim {

std::vector<WeakResidual> weak_residual(const Spectrum& phi, const CoefficientSet& c, const Daughter& d,
                                        const std::vector<TestFunction>& family) {
    for (double v : phi.values)
        if (!(v >= 0.0)) throw InputError("weak_residual needs a non-negative profile");
    const double rho = moment(phi, 1.0);
    std::vector<WeakResidual> out;
    for (const TestFunction& t : family) {
        WeakResidual r{t.label, 0.0};
        if (rho > 0.0) {
            const WeakTerms w = weak_form_terms(phi, c, &d, t);
            r.value = std::abs(w.rate()) / (rho * t.lipschitz);
        }
        out.push_back(r);
    }
    return out;
}

double max_value(const std::vector<WeakResidual>& r) {
    double m = 0.0;
    for (const auto& w : r) m = std::max(m, w.value);
    return m;
}

namespace {

// Log-linear interpolation of cell values between centers, constant beyond the end centers.
double interpolate(const Spectrum& phi, double y) {
    const SizeGrid& G = *phi.grid;
    const int n = G.n_cells;
    if (y <= G.centers.front()) return phi.values.front();
    if (y >= G.centers.back()) return phi.values.back();
    int i = G.locate(y);
    if (y < G.centers[i]) --i;
    const double a = phi.values[i], b = phi.values[std::min(i + 1, n - 1)];
    const double w = std::log(y / G.centers[i]) / G.log_step();
    if (a > 0.0 && b > 0.0) return a * std::pow(b / a, w);
    return (1.0 - w) * a + w * b;
}

// int_0^y u phi(u) int_{y-u}^inf K(u, v) phi(v) dv du over the grid.
double coagulation_flux(const Spectrum& phi, const CoefficientSet& c, double y,
                        const std::vector<double>& S1, const std::vector<double>& S2) {
    const SizeGrid& G = *phi.grid;
    const double p1 = c.lambda - c.alpha, p2 = c.alpha;
    const GaussRule& rule = gauss_legendre(4);
    std::vector<double> terms;
    for (int k = 0; k < G.n_cells && G.edges[k] < y; ++k) {
        if (phi.values[k] == 0.0) continue;
        const double lo = G.edges[k], hi = std::min(G.edges[k + 1], y);
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double s = 0.0;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double u = mid + half * rule.nodes[q];
            const double x = y - u;
            const int cell = G.locate(x);
            double t1, t2;
            if (cell < 0) {
                t1 = S1[0];
                t2 = S2[0];
            } else if (cell >= G.n_cells) {
                t1 = t2 = 0.0;
            } else {
                const double gc = phi.values[cell];
                t1 = gc * power_integral(x, G.edges[cell + 1], p1) + S1[cell + 1];
                t2 = gc * power_integral(x, G.edges[cell + 1], p2) + S2[cell + 1];
            }
            s += half * rule.weights[q] * (std::pow(u, 1.0 + c.alpha) * t1 + std::pow(u, 1.0 + p1) * t2);
        }
        terms.push_back(c.K0 * phi.values[k] * s);
    }
    return pairwise_sum(terms);
}

// int_y^inf a(x) x phi(x) Phi(y / x) dx over the grid.
double fragmentation_flux(const Spectrum& phi, const CoefficientSet& c, const Daughter& d, double y) {
    const SizeGrid& G = *phi.grid;
    std::vector<double> terms;
    for (int k = std::max(G.locate(y), 0); k < G.n_cells; ++k) {
        if (phi.values[k] == 0.0) continue;
        const double lo = std::max(G.edges[k], y), hi = G.edges[k + 1];
        if (hi <= lo) continue;
        auto f = [&](double x) { return frag_rate(c, x) * x * d.mass_cdf(y / x); };
        terms.push_back(phi.values[k] * composite_gauss(f, lo, hi, 2, 8));
    }
    return pairwise_sum(terms);
}

}  // namespace

IntegralResidual integral_residual(const Spectrum& phi, const CoefficientSet& c, const Daughter& d, int samples) {
    if (samples < 2) throw InputError("integral_residual needs at least two samples");
    const SizeGrid& G = *phi.grid;
    IntegralResidual r;
    r.samples = samples;
    const double rho = moment(phi, 1.0);
    if (!(rho > 0.0)) return r;

    const double y0 = G.edges[1];
    r.small_size_ok = y0 * y0 * phi.values.front() <= 1e-6 * rho;

    const double p1 = c.lambda - c.alpha, p2 = c.alpha;
    std::vector<double> S1(G.n_cells + 1, 0.0), S2(G.n_cells + 1, 0.0);
    for (int j = G.n_cells - 1; j >= 0; --j) {
        S1[j] = S1[j + 1] + phi.values[j] * G.power_weight(j, p1);
        S2[j] = S2[j + 1] + phi.values[j] * G.power_weight(j, p2);
    }

    const double lo = std::log(10.0 * G.xmin), hi = std::log(G.xmax / 10.0);
    for (int k = 0; k < samples; ++k) {
        const double y = std::exp(lo + (hi - lo) * k / (samples - 1));
        const double jc = c.K0 != 0.0 ? coagulation_flux(phi, c, y, S1, S2) : 0.0;
        const double jf = c.a0 != 0.0 ? fragmentation_flux(phi, c, d, y) : 0.0;
        const double defect = std::abs(y * y * interpolate(phi, y) - jf + jc) / rho;
        if (defect > r.sup_defect) {
            r.sup_defect = defect;
            r.at_y = y;
        }
    }
    return r;
}

ProfileCertificate solve_profile(const CoefficientSet& c, const DaughterPtr& d, double eps, double rho,
                                 const ProfileConfig& cfg) {
    if (!d) throw InputError("solve_profile: no daughter");
    if (!(rho > 0.0)) throw InputError("rho must be positive");
    if (!(eps >= 0.0 && eps < 1.0)) throw InputError("eps must lie in [0, 1)");
    if (!(cfg.s_max > 0.0)) throw InputError("s_max must be positive");

    ProfileCertificate cert;
    cert.rho = rho;
    cert.eps = eps;
    cert.daughter = eps > 0.0 ? DaughterPtr(mollify(d, eps)) : d;
    const Daughter& de = *cert.daughter;
    cert.rho_star_eps = rho_star(c, de);
    if (rho >= cert.rho_star_eps) {
        cert.above_threshold = true;
        cert.warnings.push_back("rho = " + fmt(rho) + " is not below the threshold " + fmt(cert.rho_star_eps));
    }
    const DiagnosticParams params = cfg.params ? *cfg.params : default_diagnostic_params(c, *d);

    Spectrum g0;
    if (cfg.initial) {
        g0 = *cfg.initial;
    } else {
        const GridPtr grid = make_grid(cfg.xmin, cfg.xmax, cfg.n_cells);
        g0 = project([rho](double x) { return rho * std::exp(-x); }, grid);
    }
    const Model model(g0.grid, c, cert.daughter, Mode::Rescaled, cfg.reconstruction);

    // A state that is already stationary is returned unchanged.
    const Model::Rhs r0 = model.rhs(g0.values);
    std::vector<double> abs_rate(r0.mass_rate.size());
    for (std::size_t i = 0; i < abs_rate.size(); ++i) abs_rate[i] = std::abs(r0.mass_rate[i]);
    const double rate0 = pairwise_sum(abs_rate);

    if (rate0 < cfg.steady_tol) {
        cert.phi = g0;
        cert.stationary = true;
        cert.stationarity_residual = rate0;
        cert.record.params = params;
        cert.record.lambda = c.lambda;
        append_snapshot(cert.record, 0.0, g0, r0.gel_flux, rate0, cfg.keep_spectra);
    } else {
        EvolveConfig ec;
        ec.mode = Mode::Rescaled;
        ec.integrator = cfg.integrator;
        ec.horizon = cfg.s_max;
        ec.cfl = cfg.cfl;
        ec.dt = cfg.dt;
        ec.snapshot_every = cfg.snapshot_every;
        ec.steady_tol = cfg.steady_tol;
        ec.keep_spectra = cfg.keep_spectra;
        ec.params = params;
        EvolveResult res = evolve(g0, ec, model);
        cert.phi = std::move(res.final);
        cert.stationary = res.stationary;
        cert.stationarity_residual = res.stationarity;
        cert.end_s = res.end_time;
        cert.steps = res.steps;
        cert.record = std::move(res.record);
        if (!cert.stationary) cert.warnings.push_back("not stationary within s_max = " + fmt(cfg.s_max));
    }

    cert.weak_residuals = weak_residual(cert.phi, c, de, saturating_ladder(*cert.phi.grid, cfg.ladder_size));
    cert.integral = integral_residual(cert.phi, c, de, cfg.residual_samples);
    if (!cert.integral.small_size_ok) cert.warnings.push_back("profile does not vanish at the smallest sizes");
    cert.invariant_report = invariant_set_report(cert.phi, c, de, eps, params);
    return cert;
}

EpsSweepReport epsilon_sweep(const CoefficientSet& c, const DaughterPtr& d, double rho,
                             const std::vector<double>& eps_list, const ProfileConfig& cfg, int workers) {
    if (eps_list.empty()) throw InputError("eps list is empty");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0 && eps_list[k] < 1.0)) throw InputError("eps values must lie in (0, 1)");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw InputError("eps list must be decreasing");
    }
    const std::size_t n = eps_list.size();
    EpsSweepReport rep;
    rep.eps = eps_list;
    rep.certificates.resize(n);
    rep.failures.assign(n, "");

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            try {
                rep.certificates[k] = solve_profile(c, d, eps_list[k], rho, cfg);
                if (!rep.certificates[k].stationary) rep.failures[k] = "not stationary";
            } catch (const std::exception& e) {
                rep.failures[k] = e.what();
            }
        }
    };
    int nw = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    nw = std::min<int>(nw, static_cast<int>(n));
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    const DiagnosticParams p = cfg.params ? *cfg.params : default_diagnostic_params(c, *d);
    rep.moment_orders = {p.m0, p.m1, 1.0, c.lambda, 1.0 + c.lambda};
    rep.moments.resize(n);
    rep.distances.assign(n, std::vector<double>(n, std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t k = 0; k < n; ++k) {
        if (!rep.failures[k].empty() && rep.certificates[k].phi.grid == nullptr) continue;
        for (double m : rep.moment_orders) rep.moments[k].push_back(moment(rep.certificates[k].phi, m));
    }
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if (rep.failures[a].empty() && rep.failures[b].empty())
                rep.distances[a][b] = x1_distance(rep.certificates[a].phi, rep.certificates[b].phi);
    for (std::size_t k = 0; k + 1 < n; ++k) rep.consecutive.push_back(rep.distances[k][k + 1]);
    for (std::size_t k = 0; k < n; ++k)
        if (!rep.failures[k].empty()) rep.cauchy = false;
    for (std::size_t k = 1; k < rep.consecutive.size(); ++k)
        if (!(rep.consecutive[k] < rep.consecutive[k - 1])) rep.cauchy = false;
    return rep;
}

namespace {

double theta_integral(const Spectrum& h, const TestFunction& t) {
    const SizeGrid& G = *h.grid;
    std::vector<double> terms(h.size());
    for (int i = 0; i < G.n_cells; ++i)
        terms[i] = h.values[i] * composite_gauss(t.eval, G.edges[i], G.edges[i + 1], 1, 4);
    return pairwise_sum(terms);
}

}  // namespace

SelfSimilarFamily build_self_similar(const Spectrum& phi, const CoefficientSet& c, const Daughter& d,
                                     const std::vector<double>& times) {
    if (times.empty()) throw InputError("no times given");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw InputError("times must be increasing");
    SelfSimilarFamily fam;
    fam.times = times;
    for (double t : times) {
        const double s = s_lambda(t, c.lambda);
        Spectrum F = t == 0.0 ? phi : dilate(phi, s, s * s);
        fam.mass.push_back(moment(F, 1.0));
        fam.F.push_back(std::move(F));
    }
    const double cl = std::pow(c.lambda - 1.0, -1.0 / (c.lambda - 1.0));
    fam.psi = cl == 1.0 ? phi : dilate(phi, cl, cl * cl);

    const double rho = moment(phi, 1.0);
    if (times.size() >= 2 && rho > 0.0) {
        for (const TestFunction& th : saturating_ladder(*phi.grid, 8)) {
            std::vector<double> rate;
            for (const Spectrum& F : fam.F) {
                const WeakTerms w = weak_form_terms(F, c, &d, th);
                rate.push_back(w.coagulation - w.fragmentation);
            }
            double integral = 0.0;
            for (std::size_t k = 1; k < times.size(); ++k)
                integral += 0.5 * (times[k] - times[k - 1]) * (rate[k] + rate[k - 1]);
            const double change = theta_integral(fam.F.back(), th) - theta_integral(fam.F.front(), th);
            fam.integrated_defect.push_back({th.label, std::abs(change - integral) / (rho * th.lipschitz)});
        }
    }
    return fam;
}

}  // namespace cfselfsim
