#pragma once

#include "cfselfsim/coefficients.hpp"
#include "cfselfsim/diagnostics.hpp"
#include "cfselfsim/dynamics.hpp"
#include "cfselfsim/grid.hpp"
#include "cfselfsim/operators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cfselfsim {

struct WeakResidual {
    std::string label;
    double value = 0.0;  // |imbalance| / (rho sup|theta'|)
};

// Stationary weak-form imbalance for each test function.
std::vector<WeakResidual> weak_residual(const Spectrum& phi, const CoefficientSet& c, const Daughter& d,
                                        const std::vector<TestFunction>& family);
double max_value(const std::vector<WeakResidual>& r);

struct IntegralResidual {
    double sup_defect = 0.0;  // normalized by rho
    double at_y = 0.0;
    int samples = 0;
    bool small_size_ok = true;  // y^2 phi(y) negligible at the smallest cells
};

// sup over log-uniform y of |y^2 phi(y) - J_F(y) + J_C(y)| / rho, with phi
// interpolated log-linearly between cell centers.
IntegralResidual integral_residual(const Spectrum& phi, const CoefficientSet& c, const Daughter& d,
                                   int samples = 256);

struct ProfileConfig {
    double xmin = 1e-6;
    double xmax = 1e3;
    int n_cells = 256;
    Integrator integrator = Integrator::Patankar;
    double dt = 0.05;
    double cfl = 0.9;
    double s_max = 30.0;
    double steady_tol = 1e-7;
    double snapshot_every = 0.1;
    bool keep_spectra = false;
    Reconstruction reconstruction = Reconstruction::VanLeer;
    int ladder_size = 8;
    int residual_samples = 256;
    std::optional<DiagnosticParams> params;
    std::optional<Spectrum> initial;  // defaults to rho e^{-x}
};

struct ProfileCertificate {
    Spectrum phi;
    double rho = 0.0;
    double eps = 0.0;
    bool stationary = false;
    double stationarity_residual = 0.0;
    double end_s = 0.0;
    long steps = 0;
    double rho_star_eps = 0.0;
    bool above_threshold = false;
    std::vector<WeakResidual> weak_residuals;
    IntegralResidual integral;
    InvariantReport invariant_report;
    TrajectoryRecord record;
    DaughterPtr daughter;  // the daughter actually used (mollified when eps > 0)
    std::vector<std::string> warnings;
};

// Evolves the rescaled equation to stationarity. eps = 0 uses the daughter as given.
ProfileCertificate solve_profile(const CoefficientSet& c, const DaughterPtr& d, double eps, double rho,
                                 const ProfileConfig& cfg = {});

struct EpsSweepReport {
    std::vector<double> eps;
    std::vector<ProfileCertificate> certificates;
    std::vector<std::string> failures;           // empty string when the member succeeded
    std::vector<double> moment_orders;           // m0, m1, 1, lambda, 1+lambda
    std::vector<std::vector<double>> moments;    // per eps
    std::vector<std::vector<double>> distances;  // pairwise X1 distances
    std::vector<double> consecutive;             // X1 distance of neighbours in the list
    bool cauchy = true;                          // consecutive distances strictly decreasing
};

EpsSweepReport epsilon_sweep(const CoefficientSet& c, const DaughterPtr& d, double rho,
                             const std::vector<double>& eps_list, const ProfileConfig& cfg = {},
                             int workers = 0);

struct SelfSimilarFamily {
    std::vector<double> times;
    std::vector<Spectrum> F;  // s_lambda(t)^2 phi(x s_lambda(t))
    std::vector<double> mass;
    Spectrum psi;  // remapped profile
    // |int theta F(t_last) - int theta F(t_0) - int_t RHS| / rho per ladder member (trapezoid in t)
    std::vector<WeakResidual> integrated_defect;
};

SelfSimilarFamily build_self_similar(const Spectrum& phi, const CoefficientSet& c, const Daughter& d,
                                     const std::vector<double>& times);

}  // namespace cfselfsim
