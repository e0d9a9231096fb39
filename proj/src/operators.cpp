#include "cfselfsim/operators.hpp"

#include "cfselfsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cfselfsim {

// ---------------------------------------------------------------- coagulation

CoagulationOperator::CoagulationOperator(GridPtr grid, const CoefficientSet& c, int quad_order)
    : grid_(std::move(grid)), c_(c), q_(quad_order), active_(c.K0 != 0.0) {
    const SizeGrid& G = *grid_;
    const int n = G.n_cells;
    const double p1 = c_.lambda - c_.alpha;
    const double p2 = c_.alpha;
    P1_ = G.power_weights(p1);
    P2_ = G.power_weights(p2);
    if (!active_) return;

    const GaussRule& rule = gauss_legendre(q_);
    offset_.resize(n + 1);
    std::size_t total = 0;
    for (int k = 0; k < n; ++k) {
        offset_[k] = total;
        total += static_cast<std::size_t>(n - k) * q_;
    }
    offset_[n] = total;
    entries_.resize(total);

    for (int k = 0; k < n; ++k) {
        const double lo = G.edges[k], hi = G.edges[k + 1];
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int q = 0; q < q_; ++q) {
            const double u = mid + half * rule.nodes[q];
            const double w = half * rule.weights[q];
            const double a1 = c_.K0 * w * std::pow(u, 1.0 + c_.alpha);
            const double a2 = c_.K0 * w * std::pow(u, 1.0 + p1);
            for (int e = k + 1; e <= n; ++e) {
                const double x = G.edges[e] - u;
                Entry& en = entries_[offset_[k] + static_cast<std::size_t>(e - k - 1) * q_ + q];
                en.a1 = a1;
                en.a2 = a2;
                const int cell = G.locate(x);
                en.cell = cell;
                if (cell < 0) {
                    en.A1 = en.A2 = 0.0;
                } else {
                    en.A1 = power_integral(x, G.edges[cell + 1], p1);
                    en.A2 = power_integral(x, G.edges[cell + 1], p2);
                }
            }
        }
    }
}

void CoagulationOperator::suffix_sums(const std::vector<double>& g, std::vector<double>& S1,
                                      std::vector<double>& S2) const {
    const int n = grid_->n_cells;
    S1.assign(n + 1, 0.0);
    S2.assign(n + 1, 0.0);
    for (int j = n - 1; j >= 0; --j) {
        S1[j] = S1[j + 1] + g[j] * P1_[j];
        S2[j] = S2[j + 1] + g[j] * P2_[j];
    }
}

void CoagulationOperator::crossing(const std::vector<double>& g, const std::vector<double>& S1,
                                   const std::vector<double>& S2, int k, double* out) const {
    const int n = grid_->n_cells;
    const Entry* en = entries_.data() + offset_[k];
    for (int e = k + 1; e <= n; ++e) {
        double acc = 0.0;
        for (int q = 0; q < q_; ++q, ++en) {
            double t1, t2;
            if (en->cell < 0) {
                t1 = S1[0];
                t2 = S2[0];
            } else {
                const double gc = g[en->cell];
                t1 = gc * en->A1 + S1[en->cell + 1];
                t2 = gc * en->A2 + S2[en->cell + 1];
            }
            acc += en->a1 * t1 + en->a2 * t2;
        }
        out[e - k - 1] = acc;
    }
}

std::vector<double> CoagulationOperator::edge_flux(const std::vector<double>& g) const {
    const int n = grid_->n_cells;
    std::vector<double> J(n + 1, 0.0);
    if (!active_) return J;
    std::vector<double> S1, S2, buf(n);
    suffix_sums(g, S1, S2);
    for (int k = 0; k < n; ++k) {
        if (g[k] == 0.0) continue;
        crossing(g, S1, S2, k, buf.data());
        for (int e = k + 1; e <= n; ++e) J[e] += g[k] * buf[e - k - 1];
    }
    return J;
}

double CoagulationOperator::apply(const std::vector<double>& g, std::vector<double>& mass_rate,
                                  std::vector<double>* loss_rate) const {
    const int n = grid_->n_cells;
    if (static_cast<int>(mass_rate.size()) != n) mass_rate.assign(n, 0.0);
    if (loss_rate) loss_rate->assign(n, 0.0);
    if (!active_) return 0.0;
    std::vector<double> S1, S2, buf(n);
    suffix_sums(g, S1, S2);
    std::vector<double> J(n + 1, 0.0);
    for (int k = 0; k < n; ++k) {
        if (g[k] == 0.0 && !loss_rate) continue;
        crossing(g, S1, S2, k, buf.data());
        if (loss_rate) (*loss_rate)[k] = buf[0] / grid_->mass_w[k];
        if (g[k] == 0.0) continue;
        for (int e = k + 1; e <= n; ++e) J[e] += g[k] * buf[e - k - 1];
    }
    for (int i = 0; i < n; ++i) mass_rate[i] += J[i] - J[i + 1];
    return J[n];
}

void CoagulationOperator::add_transfer(const std::vector<double>& g, Eigen::MatrixXd& A,
                                       std::vector<double>& sink) const {
    if (!active_) return;
    const int n = grid_->n_cells;
    std::vector<double> S1, S2, buf(n);
    suffix_sums(g, S1, S2);
    for (int k = 0; k < n; ++k) {
        crossing(g, S1, S2, k, buf.data());
        const double inv = 1.0 / grid_->mass_w[k];
        // buf[e-k-1] = crossing of edge e; cell i > k receives c(i) - c(i+1).
        for (int i = k + 1; i < n; ++i) A(i, k) += (buf[i - k - 1] - buf[i - k]) * inv;
        const double out = buf[n - k - 1] * inv;
        A(k, k) -= buf[0] * inv;
        sink[k] += out;
    }
}

// ---------------------------------------------------------------- fragmentation

FragmentationOperator::FragmentationOperator(GridPtr grid, const CoefficientSet& c, DaughterPtr d, int pieces,
                                             int order)
    : grid_(std::move(grid)), active_(c.a0 != 0.0 && d != nullptr) {
    const SizeGrid& G = *grid_;
    const int n = G.n_cells;
    W_.assign(tri(n), 0.0);
    D_.assign(n, 0.0);
    L_.assign(n, 0.0);
    if (!active_) return;

    const GaussRule& rule = gauss_legendre(order);
    std::vector<double> phi(n + 1);
    for (int i = 0; i < n; ++i) {
        const double lo = G.edges[i], hi = G.edges[i + 1];
        const double h = (hi - lo) / pieces;
        double* Wi = W_.data() + tri(i);
        for (int p = 0; p < pieces; ++p) {
            const double mid = lo + (p + 0.5) * h;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double y = mid + 0.5 * h * rule.nodes[q];
                const double w = 0.5 * h * rule.weights[q] * frag_rate(c, y) * y;
                for (int j = 0; j <= i + 1; ++j) phi[j] = d->mass_cdf(G.edges[j] / y);
                D_[i] += w * phi[0];
                for (int j = 0; j <= i; ++j) Wi[j] += w * (phi[j + 1] - phi[j]);
            }
        }
        double out = D_[i];
        for (int j = 0; j < i; ++j) out += Wi[j];
        L_[i] = out;
    }
}

double FragmentationOperator::apply(const std::vector<double>& g, std::vector<double>& mass_rate) const {
    const int n = grid_->n_cells;
    if (static_cast<int>(mass_rate.size()) != n) mass_rate.assign(n, 0.0);
    if (!active_) return 0.0;
    std::vector<double> dust(n);
    for (int i = 0; i < n; ++i) {
        const double gi = g[i];
        dust[i] = gi * D_[i];
        if (gi == 0.0) continue;
        const double* Wi = W_.data() + tri(i);
        for (int j = 0; j < i; ++j) mass_rate[j] += gi * Wi[j];
        mass_rate[i] -= gi * L_[i];
    }
    return pairwise_sum(dust);
}

void FragmentationOperator::add_transfer(Eigen::MatrixXd& A, std::vector<double>& sink) const {
    if (!active_) return;
    const int n = grid_->n_cells;
    for (int i = 0; i < n; ++i) {
        const double inv = 1.0 / grid_->mass_w[i];
        const double* Wi = W_.data() + tri(i);
        for (int j = 0; j < i; ++j) A(j, i) += Wi[j] * inv;
        A(i, i) -= L_[i] * inv;
        sink[i] += D_[i] * inv;
    }
}

// ---------------------------------------------------------------- transport

TransportOperator::TransportOperator(GridPtr grid, Reconstruction rec) : grid_(std::move(grid)), rec_(rec) {}

double TransportOperator::edge_value(const std::vector<double>& g, int i) const {
    const int n = grid_->n_cells;
    const double gi = g[i];
    if (rec_ == Reconstruction::Upwind || i == 0 || i == n - 1) return gi;
    const double a = gi - g[i - 1];
    const double b = g[i + 1] - gi;
    if (a * b <= 0.0) return gi;
    return gi + a * b / (a + b);
}

double TransportOperator::apply(const std::vector<double>& g, std::vector<double>& mass_rate) const {
    const SizeGrid& G = *grid_;
    const int n = G.n_cells;
    if (static_cast<int>(mass_rate.size()) != n) mass_rate.assign(n, 0.0);
    double prev = 0.0;  // no inflow through xmin
    for (int i = 0; i < n; ++i) {
        const double e = G.edges[i + 1];
        const double F = e * e * edge_value(g, i);
        mass_rate[i] += prev - F;
        prev = F;
    }
    return prev;
}

void TransportOperator::add_transfer(const std::vector<double>& g, Eigen::MatrixXd& A,
                                     std::vector<double>& sink) const {
    const SizeGrid& G = *grid_;
    const int n = G.n_cells;
    for (int i = 0; i < n; ++i) {
        const double e = G.edges[i + 1];
        const double ratio = g[i] > 0.0 ? edge_value(g, i) / g[i] : 1.0;
        const double r = e * e * ratio / G.mass_w[i];
        A(i, i) -= r;
        if (i + 1 < n)
            A(i + 1, i) += r;
        else
            sink[i] += r;
    }
}

double TransportOperator::max_rate() const {
    const SizeGrid& G = *grid_;
    const double factor = rec_ == Reconstruction::VanLeer ? 2.0 : 1.0;
    double m = 0.0;
    for (int i = 0; i < G.n_cells; ++i) {
        const double e = G.edges[i + 1];
        m = std::max(m, factor * e * e / G.mass_w[i]);
    }
    return m;
}

// ---------------------------------------------------------------- wrappers

namespace {

Spectrum to_density_rate(const Spectrum& s, const std::vector<double>& mass_rate) {
    Spectrum r(s.grid);
    for (std::size_t i = 0; i < r.size(); ++i) r.values[i] = mass_rate[i] / s.grid->mass_w[i];
    return r;
}

}  // namespace

OperatorResult coagulation_apply(const Spectrum& s, const CoefficientSet& c) {
    CoagulationOperator op(s.grid, c);
    std::vector<double> mr(s.size(), 0.0);
    const double gel = op.apply(s.values, mr);
    return {to_density_rate(s, mr), gel};
}

OperatorResult fragmentation_apply(const Spectrum& s, const CoefficientSet& c, const DaughterPtr& d) {
    FragmentationOperator op(s.grid, c, d);
    std::vector<double> mr(s.size(), 0.0);
    const double dust = op.apply(s.values, mr);
    return {to_density_rate(s, mr), dust};
}

OperatorResult transport_apply(const Spectrum& s, Reconstruction rec) {
    TransportOperator op(s.grid, rec);
    std::vector<double> mr(s.size(), 0.0);
    const double out = op.apply(s.values, mr);
    return {to_density_rate(s, mr), out};
}

// ---------------------------------------------------------------- weak form

TestFunction identity_test() {
    TestFunction t;
    t.eval = [](double x) { return x; };
    t.deriv = [](double) { return 1.0; };
    t.gap = [](double) { return 0.0; };
    t.label = "x";
    t.lipschitz = 1.0;
    t.homogeneity = 1.0;
    return t;
}

TestFunction saturating_test(double xi) {
    TestFunction t;
    t.eval = [xi](double x) { return x / (1.0 + x / xi); };
    t.deriv = [xi](double x) {
        const double d = 1.0 + x / xi;
        return 1.0 / (d * d);
    };
    t.gap = [xi](double x) {
        const double d = 1.0 + x / xi;
        return x * (x / xi) / (d * d);
    };
    t.label = "x/(1+x/" + fmt(xi) + ")";
    t.lipschitz = 1.0;
    return t;
}

TestFunction power_test(double m) {
    TestFunction t;
    t.eval = [m](double x) { return std::pow(x, m); };
    t.deriv = [m](double x) { return m * std::pow(x, m - 1.0); };
    t.label = "x^" + fmt(m);
    t.gap = [m](double x) { return (1.0 - m) * std::pow(x, m); };
    t.lipschitz = m == 1.0 ? 1.0 : std::numeric_limits<double>::infinity();
    t.homogeneity = m;
    return t;
}

TestFunction xlogx_test() {
    TestFunction t;
    t.eval = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    t.deriv = [](double x) { return std::log(x) + 1.0; };
    t.label = "x ln x";
    t.lipschitz = std::numeric_limits<double>::infinity();
    return t;
}

std::vector<TestFunction> saturating_ladder(const SizeGrid& g, int count) {
    // Geometric ladder over the decades carrying the mass of typical profiles,
    // from one decade above xmin to one decade below xmax.
    const double lo = std::log(g.xmin) + std::log(10.0);
    const double hi = std::log(g.xmax) - std::log(10.0);
    std::vector<TestFunction> out;
    for (int k = 0; k < count; ++k) {
        const double t = count == 1 ? 0.5 : static_cast<double>(k) / (count - 1);
        out.push_back(saturating_test(std::exp(lo + t * (hi - lo))));
    }
    return out;
}

double chi_theta(const TestFunction& t, double x, double y) { return t.eval(x + y) - t.eval(x) - t.eval(y); }

double n_theta(const TestFunction& t, const Daughter& d, double y) {
    const double zs = d.support_min();
    if (!(zs > 0.0)) return t.eval(y) - d.integrate([&](double z) { return t.eval(y * z); });
    // Integration by parts against the mass CDF Phi (Phi(zs) = 0, Phi(1) = 1):
    // N(y) = -int_zs^1 Phi(z) (theta(yz) - yz theta'(yz)) / z^2 dz.
    auto f = [&](double z) { return -d.mass_cdf(z) * t.tangent_gap(y * z) / (z * z); };
    const int pieces = static_cast<int>(std::ceil(std::log(1.0 / zs) / std::log(1.25)));
    const double r = std::pow(1.0 / zs, 1.0 / pieces);
    double total = 0.0, lo = zs;
    for (int p = 0; p < pieces; ++p) {
        const double hi = p + 1 == pieces ? 1.0 : lo * r;
        total += composite_gauss(f, lo, hi, 1, 8);
        lo = hi;
    }
    return total;
}

WeakTerms weak_form_terms(const Spectrum& h, const CoefficientSet& c, const Daughter* d, const TestFunction& t,
                          int order) {
    const SizeGrid& G = *h.grid;
    const int n = G.n_cells;
    const GaussRule& rule = gauss_legendre(order);
    const int Q = static_cast<int>(rule.nodes.size());
    const std::size_t np = static_cast<std::size_t>(n) * Q;
    std::vector<double> x(np), w(np), th(np), gap(np);
    for (int i = 0; i < n; ++i) {
        const double mid = 0.5 * (G.edges[i] + G.edges[i + 1]), half = 0.5 * G.widths[i];
        for (int q = 0; q < Q; ++q) {
            const std::size_t k = static_cast<std::size_t>(i) * Q + q;
            x[k] = mid + half * rule.nodes[q];
            w[k] = half * rule.weights[q];
            th[k] = t.eval(x[k]);
            gap[k] = t.tangent_gap(x[k]);
        }
    }

    WeakTerms out;
    std::vector<double> acc(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (h.values[i] == 0.0) continue;
        double s = 0.0;
        for (int q = 0; q < Q; ++q) {
            const std::size_t k = static_cast<std::size_t>(i) * Q + q;
            s += w[k] * gap[k];
        }
        acc[i] = s * h.values[i];
    }
    out.transport = pairwise_sum(acc);

    if (c.K0 != 0.0) {
        std::vector<double> pa(np), pb(np);
        for (std::size_t k = 0; k < np; ++k) {
            pa[k] = std::pow(x[k], c.alpha);
            pb[k] = std::pow(x[k], c.lambda - c.alpha);
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            if (h.values[i] == 0.0) continue;
            double row = 0.0;
            for (int j = i; j < n; ++j) {
                if (h.values[j] == 0.0) continue;
                double s = 0.0;
                for (int q = 0; q < Q; ++q) {
                    const std::size_t a = static_cast<std::size_t>(i) * Q + q;
                    for (int r = 0; r < Q; ++r) {
                        const std::size_t b = static_cast<std::size_t>(j) * Q + r;
                        const double K = pa[a] * pb[b] + pb[a] * pa[b];
                        s += w[a] * w[b] * K * (t.eval(x[a] + x[b]) - th[a] - th[b]);
                    }
                }
                row += (j == i ? 1.0 : 2.0) * s * h.values[j];
            }
            acc[i] = row * h.values[i];
        }
        out.coagulation = 0.5 * c.K0 * pairwise_sum(acc);
    }

    if (d != nullptr && c.a0 != 0.0) {
        const bool homogeneous = !std::isnan(t.homogeneity);
        const double keep = homogeneous ? d->moment(t.homogeneity, 1.0) : 0.0;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (int i = 0; i < n; ++i) {
            if (h.values[i] == 0.0) continue;
            double s = 0.0;
            for (int q = 0; q < Q; ++q) {
                const std::size_t k = static_cast<std::size_t>(i) * Q + q;
                const double N = homogeneous ? th[k] * (1.0 - keep) : n_theta(t, *d, x[k]);
                s += w[k] * frag_rate(c, x[k]) * N;
            }
            acc[i] = s * h.values[i];
        }
        out.fragmentation = pairwise_sum(acc);
    }
    return out;
}

double xlogx_lhs(double x, double y) {
    return x * std::log1p(y / x) + y * std::log1p(x / y);
}

double xlogx_rhs(double x, double y) { return 2.0 * std::numbers::ln2 * std::sqrt(x * y); }

}  // namespace cfselfsim
