#include "cfselfsim/numerics.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <map>
#include <mutex>

namespace cfselfsim {

double pairwise_sum(std::span<const double> v) {
    constexpr std::size_t block = 8;
    if (v.size() <= block) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

double power_integral(double a, double b, double p) {
    if (std::abs(p + 1.0) < 1e-14) return std::log(b / a);
    const double q = p + 1.0;
    // b^q - a^q = a^q (e^{q ln(b/a)} - 1), stable for narrow cells.
    return std::pow(a, q) * std::expm1(q * std::log(b / a)) / q;
}

double xlogx_integral(double a, double b) {
    auto prim = [](double x) { return 0.5 * x * x * std::log(x) - 0.25 * x * x; };
    return prim(b) - prim(a);
}

namespace {

template <int N>
GaussRule expand_rule() {
    using Q = boost::math::quadrature::gauss<double, N>;
    const auto& x = Q::abscissa();
    const auto& w = Q::weights();
    GaussRule r;
    for (std::size_t i = x.size(); i-- > 0;) {
        if (x[i] == 0.0) continue;
        r.nodes.push_back(-x[i]);
        r.weights.push_back(w[i]);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.nodes.push_back(x[i]);
        r.weights.push_back(w[i]);
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    static const std::map<int, GaussRule> rules = [] {
        std::map<int, GaussRule> m;
        m[1] = GaussRule{{0.0}, {2.0}};
        m[2] = expand_rule<2>();
        m[3] = expand_rule<3>();
        m[4] = expand_rule<4>();
        m[5] = expand_rule<5>();
        m[8] = expand_rule<8>();
        m[16] = expand_rule<16>();
        return m;
    }();
    auto it = rules.find(n);
    if (it == rules.end()) throw InputError("unsupported Gauss-Legendre order " + std::to_string(n));
    return it->second;
}

double composite_gauss(const std::function<double(double)>& f, double a, double b, int pieces, int order) {
    const GaussRule& g = gauss_legendre(order);
    const double h = (b - a) / pieces;
    double total = 0.0;
    for (int p = 0; p < pieces; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        double s = 0.0;
        for (std::size_t q = 0; q < g.nodes.size(); ++q) s += g.weights[q] * f(mid + 0.5 * h * g.nodes[q]);
        total += 0.5 * h * s;
    }
    return total;
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
    if (b <= a) return 0.0;
    double err = 0.0;
    double l1 = 0.0;
    const double val =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel_tol, &err, &l1);
    if (!std::isfinite(val)) throw NumericalError("quadrature produced a non-finite value");
    // Boost reports the error relative to the L1 norm of the integrand.
    if (err > std::max(1e4 * rel_tol, 1e-6))
        throw NumericalError("quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) + "] (error " + std::to_string(err) + ", l1 " + std::to_string(l1) + ")");
    return val;
}

double integrate_singular_left(const std::function<double(double)>& f, double b, double s, double rel_tol) {
    if (s <= -1.0) throw InputError("integrand is not integrable at 0");
    // z = u^k, dz = k u^{k-1} du, with k = 1/(1+s) making z^s dz ~ k du.
    const double k = 1.0 / (1.0 + s);
    const double ub = std::pow(b, 1.0 / k);
    auto g = [&](double u) {
        if (u <= 0.0) return 0.0;
        const double z = std::pow(u, k);
        return f(z) * k * std::pow(u, k - 1.0);
    };
    return integrate(g, 0.0, ub, rel_tol);
}

}  // namespace cfselfsim
