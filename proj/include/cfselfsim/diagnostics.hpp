#pragma once

#include "cfselfsim/coefficients.hpp"
#include "cfselfsim/dynamics.hpp"
#include "cfselfsim/grid.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cfselfsim {

// int x ln x h dx + 3 / (e (1 - m)) M_m(h)
double lyapunov_U(const Spectrum& s, double m);

// K0 ln2 (rho_star - rho) / 2; non-positive at or above the threshold.
double delta_rho(const CoefficientSet& c, const Daughter& d, double rho);
// a0 (1 - b_{1+lambda-alpha,1}) rho^{(1-lambda)/(m-1)} / 8
double delta_rho_m(const CoefficientSet& c, const Daughter& d, double rho, double m);

struct InequalityReport {
    std::string name;
    long samples = 0;
    long violations = 0;
    double worst_margin = 0.0;  // min over samples of rhs - lhs
    std::string context;
};

// Samples (x, y) log-uniformly in [lo, hi]^2 and checks xlogx_lhs <= xlogx_rhs.
InequalityReport check_ail(long samples, double lo, double hi, std::uint64_t seed = 1);

struct InvariantReport {
    std::vector<std::pair<std::string, double>> entries;
    double rho = 0.0;
    bool finite = true;

    double value(const std::string& key) const;
};

// Invariant-set quantities: M_1, U_{m1}, M_m for m in {m0, mu1, 1+lambda, 2+lambda},
// int x^{m1} h^{q1}, plus the raw eps-dependent entries M_{lambda-2} and the total variation.
InvariantReport invariant_set_report(const Spectrum& s, const CoefficientSet& c, const Daughter& d, double eps,
                                     const DiagnosticParams& p);

struct RefinementComparison {
    bool stable = true;
    std::vector<std::string> drifting;  // entries whose relative change exceeds tol
};
RefinementComparison compare_reports(const InvariantReport& coarse, const InvariantReport& fine,
                                     double tol = 0.01);

struct MomentBalance {
    double max_defect = 0.0;
    double at_time = 0.0;
    bool too_coarse = false;
    std::vector<double> time, fd_rate, weak_rate;
};

// Centered finite differences of M_m over the kept spectra against the
// instantaneous weak-form rate. Defects are normalized by max(|rate|, M_m).
MomentBalance moment_balance_check(const TrajectoryRecord& rec, const Model& m, double mom,
                                   double t_from = 0.0, double t_to = -1.0);

void write_report(const InvariantReport& r, const std::string& prefix, std::vector<std::string>& lines);

}  // namespace cfselfsim
