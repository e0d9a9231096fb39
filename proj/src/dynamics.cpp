#include "cfselfsim/dynamics.hpp"

#include "cfselfsim/numerics.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cfselfsim {

Model::Model(GridPtr grid, const CoefficientSet& c, DaughterPtr d, Mode mode, Reconstruction rec)
    : grid_(grid), c_(c), d_(d), mode_(mode), coag_(grid, c), frag_(grid, c, d), transport_(grid, rec) {}

Model::Rhs Model::rhs(const std::vector<double>& g) const {
    const int n = grid_->n_cells;
    Rhs r;
    r.mass_rate.assign(n, 0.0);
    r.gel_flux = coag_.apply(g, r.mass_rate, &r.loss);
    r.dust_flux = frag_.apply(g, r.mass_rate);
    const double tr_max = mode_ == Mode::Rescaled ? transport_.max_rate() : 0.0;
    if (mode_ == Mode::Rescaled) r.gel_flux += transport_.apply(g, r.mass_rate);
    for (int i = 0; i < n; ++i) r.loss[i] += frag_.loss_weight(i) / grid_->mass_w[i] + tr_max;
    return r;
}

double Model::stability_bound(const Rhs& r) const {
    double m = 0.0;
    for (double v : r.loss) m = std::max(m, v);
    return m > 0.0 ? 1.0 / m : std::numeric_limits<double>::infinity();
}

double Model::stability_bound(const std::vector<double>& g) const { return stability_bound(rhs(g)); }

void Model::transfer(const std::vector<double>& g, Eigen::MatrixXd& A, std::vector<double>& gel,
                     std::vector<double>& dust) const {
    const int n = grid_->n_cells;
    A.setZero(n, n);
    gel.assign(n, 0.0);
    dust.assign(n, 0.0);
    coag_.add_transfer(g, A, gel);
    frag_.add_transfer(A, dust);
    if (mode_ == Mode::Rescaled) transport_.add_transfer(g, A, gel);
}

namespace {

void clip(Spectrum& s) {
    std::vector<double> added;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.values[i] < 0.0) {
            added.push_back(-s.values[i] * s.grid->mass_w[i]);
            s.values[i] = 0.0;
        }
    }
    if (!added.empty()) s.clip_mass += pairwise_sum(added);
}

Spectrum heun(const Spectrum& s, double dt, const Model& m, const Model::Rhs& r0) {
    const auto& w = s.grid->mass_w;
    Spectrum s1 = s;
    for (std::size_t i = 0; i < s.size(); ++i) s1.values[i] = s.values[i] + dt * r0.mass_rate[i] / w[i];
    clip(s1);
    const Model::Rhs r1 = m.rhs(s1.values);
    Spectrum out = s;
    for (std::size_t i = 0; i < s.size(); ++i)
        out.values[i] = s.values[i] + 0.5 * dt * (r0.mass_rate[i] + r1.mass_rate[i]) / w[i];
    out.gel_mass += 0.5 * dt * (r0.gel_flux + r1.gel_flux);
    out.dust_mass += 0.5 * dt * (r0.dust_flux + r1.dust_flux);
    out.clip_mass = s1.clip_mass;
    clip(out);
    return out;
}

Eigen::VectorXd solve_refined(const Eigen::MatrixXd& M, const Eigen::VectorXd& b) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::VectorXd x = lu.solve(b);
    const Eigen::VectorXd r = b - M * x;
    x += lu.solve(r);
    return x;
}

// Modified Patankar-Runge-Kutta (second order): unconditionally positive and
// conservative, each stage a linear solve with the frozen transfer matrix.
Spectrum patankar(const Spectrum& s, double dt, const Model& m) {
    const int n = s.grid->n_cells;
    const auto& w = s.grid->mass_w;
    Eigen::VectorXd m0(n);
    for (int i = 0; i < n; ++i) m0[i] = s.values[i] * w[i];

    Eigen::MatrixXd A0, A1;
    std::vector<double> gel0, dust0, gel1, dust1;
    m.transfer(s.values, A0, gel0, dust0);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) - dt * A0;
    Eigen::VectorXd m1 = solve_refined(M, m0);
    for (int i = 0; i < n; ++i) m1[i] = std::max(m1[i], 0.0);

    std::vector<double> g1(n);
    for (int i = 0; i < n; ++i) g1[i] = m1[i] / w[i];
    m.transfer(g1, A1, gel1, dust1);

    std::vector<double> ratio(n);
    for (int k = 0; k < n; ++k) ratio[k] = m1[k] > 0.0 ? m0[k] / m1[k] : 1.0;
    for (int k = 0; k < n; ++k) A0.col(k) *= ratio[k];
    M = Eigen::MatrixXd::Identity(n, n) - 0.5 * dt * (A0 + A1);
    Eigen::VectorXd m2 = solve_refined(M, m0);

    Spectrum out = s;
    std::vector<double> gterm(n), dterm(n);
    for (int k = 0; k < n; ++k) {
        const double mk = std::max(m2[k], 0.0);
        if (m2[k] < 0.0) out.clip_mass += -m2[k];
        out.values[k] = mk / w[k];
        gterm[k] = (gel0[k] * ratio[k] + gel1[k]) * m2[k];
        dterm[k] = (dust0[k] * ratio[k] + dust1[k]) * m2[k];
    }
    out.gel_mass += 0.5 * dt * pairwise_sum(gterm);
    out.dust_mass += 0.5 * dt * pairwise_sum(dterm);
    return out;
}

bool all_finite(const Spectrum& s) {
    for (double v : s.values)
        if (!std::isfinite(v)) return false;
    return std::isfinite(s.gel_mass) && std::isfinite(s.dust_mass);
}

}  // namespace

Spectrum step(const Spectrum& s, double dt, const Model& m, Integrator integ) {
    if (!(dt > 0.0)) throw InputError("step: dt must be positive");
    if (integ == Integrator::Patankar) return patankar(s, dt, m);
    const Model::Rhs r0 = m.rhs(s.values);
    const double bound = m.stability_bound(r0);
    if (dt > bound * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "dt = " << dt << " exceeds the stability bound " << bound;
        throw InputError(os.str());
    }
    return heun(s, dt, m, r0);
}

void append_snapshot(TrajectoryRecord& rec, double t, const Spectrum& s, double gel_flux, double rate,
                     bool keep) {
    const auto& p = rec.params;
    rec.time.push_back(t);
    rec.M_m0.push_back(moment(s, p.m0));
    const double mm1 = moment(s, p.m1);
    rec.M_m1.push_back(mm1);
    rec.M_1.push_back(moment(s, 1.0));
    rec.M_lambda.push_back(moment(s, rec.lambda));
    rec.M_1pl.push_back(moment(s, 1.0 + rec.lambda));
    const double lm = log_moment(s);
    rec.logmom.push_back(lm);
    rec.U_m1.push_back(lm + 3.0 / (std::numbers::e * (1.0 - p.m1)) * mm1);
    rec.Lq1.push_back(weighted_lq_norm(s, p.m1, p.q1));
    rec.gel.push_back(s.gel_mass);
    rec.dust.push_back(s.dust_mass);
    rec.clip.push_back(s.clip_mass);
    rec.gel_flux.push_back(gel_flux);
    rec.stationarity.push_back(rate);
    if (keep) rec.spectra.push_back(s);
}

EvolveResult evolve(const Spectrum& f_in, const EvolveConfig& cfg, const Model& m) {
    if (!(cfg.horizon > 0.0)) throw InputError("horizon must be positive");
    if (!(cfg.cfl > 0.0 && cfg.cfl < 1.0)) throw InputError("cfl must lie in (0, 1)");
    if (!(cfg.snapshot_every > 0.0)) throw InputError("snapshot interval must be positive");
    if (cfg.integrator == Integrator::Patankar && !(cfg.dt > 0.0))
        throw InputError("the Patankar integrator needs a fixed dt");
    for (double v : f_in.values)
        if (!(v >= 0.0)) throw InputError("initial spectrum must be non-negative");

    EvolveResult res;
    res.record.params = cfg.params;
    res.record.lambda = m.coeffs().lambda;
    const double mass0 = moment(f_in, 1.0);
    const double clip_budget = cfg.max_clip_mass >= 0.0 ? cfg.max_clip_mass : 1e-8 * mass0;

    Spectrum g = f_in;
    double t = 0.0;
    Model::Rhs r = m.rhs(g.values);
    append_snapshot(res.record, 0.0, g, r.gel_flux, 0.0, cfg.keep_spectra);

    if (mass0 == 0.0) {
        res.final = g;
        res.stationary = true;
        return res;
    }

    long snap_index = 1;
    double next_snap = std::min(cfg.snapshot_every, cfg.horizon);
    double rate = std::numeric_limits<double>::infinity();
    while (t < cfg.horizon) {
        double dt;
        if (cfg.integrator == Integrator::Heun) {
            dt = cfg.cfl * m.stability_bound(r);
            if (cfg.dt > 0.0) dt = std::min(dt, cfg.dt);
        } else {
            dt = cfg.dt;
        }
        bool hits_snap = false;
        if (t + dt >= next_snap * (1.0 - 1e-13)) {
            dt = next_snap - t;
            hits_snap = true;
        }
        if (!(dt > 0.0)) throw NumericalError("time step underflow");

        Spectrum next = cfg.integrator == Integrator::Heun ? heun(g, dt, m, r) : patankar(g, dt, m);
        if (!all_finite(next)) throw NumericalError("non-finite state at t = " + fmt(t));
        if (next.clip_mass > clip_budget) {
            std::ostringstream os;
            os << "positivity failure: clipped mass " << next.clip_mass << " exceeds budget " << clip_budget;
            throw NumericalError(os.str());
        }
        rate = x1_distance(next, g) / dt;
        g = std::move(next);
        t = hits_snap ? next_snap : t + dt;
        ++res.steps;
        r = m.rhs(g.values);

        const bool steady = cfg.steady_tol > 0.0 && rate < cfg.steady_tol;
        if (hits_snap || steady || t >= cfg.horizon) {
            append_snapshot(res.record, t, g, r.gel_flux, rate, cfg.keep_spectra);
            if (hits_snap) {
                ++snap_index;
                next_snap = std::min(snap_index * cfg.snapshot_every, cfg.horizon);
            }
        }
        if (steady) {
            res.stationary = true;
            break;
        }
    }
    res.final = g;
    res.stationarity = rate;
    res.end_time = t;
    return res;
}

double s_lambda(double t, double lambda) {
    const double base = 1.0 + (lambda - 1.0) * t;
    if (!(base > 0.0)) throw InputError("s_lambda: t must exceed -1/(lambda-1)");
    return std::pow(base, 1.0 / (lambda - 1.0));
}

Rescaled scale_to_rescaled(const Spectrum& f, double t, double lambda) {
    const double s = std::log(s_lambda(t, lambda));
    Spectrum g = dilate(f, std::exp(-s), std::exp(-2.0 * s));
    g.gel_mass = f.gel_mass;
    g.dust_mass = f.dust_mass;
    g.clip_mass = f.clip_mass;
    return {std::move(g), s};
}

Physical scale_to_physical(const Spectrum& g, double s, double lambda) {
    const double t = std::expm1((lambda - 1.0) * s) / (lambda - 1.0);
    Spectrum f = dilate(g, std::exp(s), std::exp(2.0 * s));
    f.gel_mass = g.gel_mass;
    f.dust_mass = g.dust_mass;
    f.clip_mass = g.clip_mass;
    return {std::move(f), t};
}

std::optional<double> gelation_monitor(const TrajectoryRecord& rec, double threshold) {
    if (rec.size() == 0) return std::nullopt;
    const double thr = threshold >= 0.0 ? threshold : 1e-6 * rec.M_1.front();
    for (std::size_t k = 0; k < rec.size(); ++k) {
        if (rec.gel_flux[k] > thr) return rec.time[k];
        // Bursts between snapshots show up in the gel mass gained over the interval.
        if (k > 0 && rec.gel[k] - rec.gel[k - 1] > thr * (rec.time[k] - rec.time[k - 1])) return rec.time[k];
    }
    return std::nullopt;
}

void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << "time,M_m0,M_m1,M_1,M_lambda,M_1pl,logmom,U_m1,Lq1,gel,dust,clip\n";
    for (std::size_t k = 0; k < rec.size(); ++k) {
        out << fmt(rec.time[k]) << ',' << fmt(rec.M_m0[k]) << ',' << fmt(rec.M_m1[k]) << ',' << fmt(rec.M_1[k])
            << ',' << fmt(rec.M_lambda[k]) << ',' << fmt(rec.M_1pl[k]) << ',' << fmt(rec.logmom[k]) << ','
            << fmt(rec.U_m1[k]) << ',' << fmt(rec.Lq1[k]) << ',' << fmt(rec.gel[k]) << ',' << fmt(rec.dust[k])
            << ',' << fmt(rec.clip[k]) << '\n';
    }
}

}  // namespace cfselfsim
