#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfselfsim {

// Thrown for invalid inputs the caller can correct (bad config, bad ranges).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical procedure does not deliver (quadrature, positivity).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fixed-tree pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> v);

// Integral of x^p over [a, b], 0 < a <= b.
double power_integral(double a, double b, double p);

// Integral of x ln x over [a, b].
double xlogx_integral(double a, double b);

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// Composite Gauss-Legendre over [a, b] with `pieces` equal subintervals.
double composite_gauss(const std::function<double(double)>& f, double a, double b, int pieces = 1,
                       int order = 8);

// Adaptive Gauss-Kronrod on a finite interval. Throws NumericalError when the
// relative error estimate exceeds max(1e4 * rel_tol, 1e-6).
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-12);

// Integral over (0, b] of an integrand behaving like z^s near 0 (s > -1).
// Uses z = u^{1/(1+s)} on (0, b] to remove the endpoint singularity.
double integrate_singular_left(const std::function<double(double)>& f, double b, double s,
                               double rel_tol = 1e-12);

}  // namespace cfselfsim
