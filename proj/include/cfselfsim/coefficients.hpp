#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cfselfsim {

// Homogeneous coefficients: K(x,y) = K0 (x^a y^{l-a} + x^{l-a} y^a), a(x) = a0 x^{l-1}.
// Arbitrary exponents are accepted by the evaluators so test kernels outside the
// admissible family (e.g. K = 2 with lambda = alpha = 0) can be run; use
// validate() to check admissibility.
struct CoefficientSet {
    double lambda = 2.0;
    double alpha = 1.0;
    double K0 = 1.0;
    double a0 = 1.0;

    double gamma() const { return lambda - 1.0; }
};

// Scaling daughter profile B on (0,1), b(x,y) = B(x/y)/y.
class Daughter {
public:
    virtual ~Daughter() = default;

    virtual double nu() const = 0;
    virtual double B(double z) const = 0;
    // Mass fraction of fragments with relative size below z: int_0^z t B(t) dt.
    virtual double mass_cdf(double z) const = 0;
    // int_0^1 z^m B(z)^p dz; callers check (m,p) in A_nu first.
    virtual double moment(double m, double p) const = 0;
    // int_0^1 z |ln z| B(z) dz
    virtual double log_moment() const = 0;
    // int_0^1 fn(z) B(z) dz for fn bounded near 0.
    virtual double integrate(const std::function<double(double)>& fn) const = 0;
    // B vanishes on (0, support_min()].
    virtual double support_min() const { return 0.0; }
    virtual std::string describe() const = 0;
};

using DaughterPtr = std::shared_ptr<const Daughter>;

// B(z) = (nu+2) z^nu.
class PowerDaughter final : public Daughter {
public:
    explicit PowerDaughter(double nu);

    double nu() const override { return nu_; }
    double B(double z) const override;
    double mass_cdf(double z) const override;
    double moment(double m, double p) const override;
    double log_moment() const override;
    double integrate(const std::function<double(double)>& fn) const override;
    std::string describe() const override;

private:
    double nu_;
};

// Piecewise-linear profile through (z_k, B_k). Outside [z_0, z_last] the end
// values are held constant up to 0 and 1. If `zero_below_first` is set the
// profile is identically 0 on (0, z_0] instead.
class TabulatedDaughter : public Daughter {
public:
    TabulatedDaughter(std::vector<double> z, std::vector<double> b, double nu, bool zero_below_first);

    double nu() const override { return nu_; }
    double B(double z) const override;
    double mass_cdf(double z) const override;
    double moment(double m, double p) const override;
    double log_moment() const override;
    double integrate(const std::function<double(double)>& fn) const override;
    double support_min() const override { return zero_below_ ? z_.front() : 0.0; }
    std::string describe() const override;

    const std::vector<double>& nodes() const { return z_; }
    const std::vector<double>& values() const { return b_; }
    // Scales B so that int z B = 1 exactly for the piecewise-linear representation.
    void renormalize();
    // int_0^1 z B(z) dz of the representation, in closed form.
    double first_moment_exact() const;

private:
    void build_cdf();
    double segment_integral(const std::function<double(double)>& fn, double a, double b) const;

    std::vector<double> z_;
    std::vector<double> b_;
    std::vector<double> cdf_;  // mass_cdf at nodes
    double nu_;
    bool zero_below_;
};

// Mollified daughter B_eps tabulated on a uniform grid plus the support node eps - eps^2.
class MollifiedDaughter final : public TabulatedDaughter {
public:
    MollifiedDaughter(std::vector<double> z, std::vector<double> b, double nu, double eps, double beta,
                      DaughterPtr parent);

    double eps() const { return eps_; }
    double beta() const { return beta_; }
    const DaughterPtr& parent() const { return parent_; }
    std::string describe() const override;

private:
    double eps_;
    double beta_;
    DaughterPtr parent_;
};

using MollifiedPtr = std::shared_ptr<const MollifiedDaughter>;

struct DiagnosticParams {
    double m0 = 0.5;
    double m1 = 0.5;
    double q1 = 1.95;
    double mu1 = 0.0;
};

inline constexpr int kMollifierTableSize = 4096;

std::vector<std::string> validate(const CoefficientSet& c);
std::vector<std::string> validate(const CoefficientSet& c, const Daughter& d);

double kernel_eval(const CoefficientSet& c, double x, double y);
double frag_rate(const CoefficientSet& c, double x);

bool in_admissible_set(double nu, double m, double p);
// Throws InputError when (m,p) is outside A_nu.
double daughter_moment(const Daughter& d, double m, double p);
double daughter_log_moment(const Daughter& d);

double rho_star(const CoefficientSet& c, const Daughter& d);
double rho_star_eps(const CoefficientSet& c, const MollifiedDaughter& d);

// Bump zeta(z) = c (1 - z^2)^4 on (-1,1) with unit integral.
double bump(double z);

// Throws InputError("eps too large") unless beta_eps > 1/2.
MollifiedPtr mollify(const DaughterPtr& d, double eps, int table_size = kMollifierTableSize);

// Two-column CSV (z, B). Normalization must hold to 1e-6; the result is renormalized.
std::shared_ptr<TabulatedDaughter> load_daughter_csv(const std::string& path, double nu);

DiagnosticParams default_diagnostic_params(const CoefficientSet& c, const Daughter& d);
std::vector<std::string> validate(const DiagnosticParams& p, const CoefficientSet& c, const Daughter& d);
// mu1 = (m1 + 1 + q1 (lambda - 2)) / q1
double mu1_of(double m1, double q1, double lambda);

}  // namespace cfselfsim
