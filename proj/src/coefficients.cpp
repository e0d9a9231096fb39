#include "cfselfsim/coefficients.hpp"

#include "cfselfsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cfselfsim {

std::vector<std::string> validate(const CoefficientSet& c) {
    std::vector<std::string> v;
    if (!(c.lambda > 1.0 && c.lambda <= 2.0)) v.push_back("lambda must lie in (1, 2]");
    const double alpha_lo = std::max(0.5, c.lambda - 1.0);
    if (!(c.alpha >= alpha_lo)) v.push_back("alpha must be >= max(1/2, lambda - 1)");
    if (!(c.alpha <= 0.5 * c.lambda)) v.push_back("alpha must be <= lambda / 2");
    if (!(c.K0 > 0.0)) v.push_back("K0 must be positive");
    if (!(c.a0 > 0.0)) v.push_back("a0 must be positive");
    return v;
}

std::vector<std::string> validate(const CoefficientSet& c, const Daughter& d) {
    auto v = validate(c);
    const double nu = d.nu();
    if (!(nu > -2.0 && nu <= 0.0)) v.push_back("nu must lie in (-2, 0]");
    if (!(-nu - 1.0 < c.alpha)) v.push_back("alpha must exceed -nu - 1");
    return v;
}

double kernel_eval(const CoefficientSet& c, double x, double y) {
    const double b = c.lambda - c.alpha;
    return c.K0 * (std::pow(x, c.alpha) * std::pow(y, b) + std::pow(x, b) * std::pow(y, c.alpha));
}

double frag_rate(const CoefficientSet& c, double x) { return c.a0 * std::pow(x, c.lambda - 1.0); }

bool in_admissible_set(double nu, double m, double p) { return m > -1.0 && p >= 1.0 && m + p * nu > -1.0; }

double daughter_moment(const Daughter& d, double m, double p) {
    if (!in_admissible_set(d.nu(), m, p)) {
        std::ostringstream os;
        os << "(m, p) = (" << m << ", " << p << ") is outside the admissible set for nu = " << d.nu();
        throw InputError(os.str());
    }
    return d.moment(m, p);
}

double daughter_log_moment(const Daughter& d) { return d.log_moment(); }

double rho_star(const CoefficientSet& c, const Daughter& d) {
    return c.a0 * d.log_moment() / (2.0 * c.K0 * std::numbers::ln2);
}

double rho_star_eps(const CoefficientSet& c, const MollifiedDaughter& d) { return rho_star(c, d); }

// ---------------------------------------------------------------- power family

PowerDaughter::PowerDaughter(double nu) : nu_(nu) {
    if (!(nu > -2.0 && nu <= 0.0)) throw InputError("nu must lie in (-2, 0]");
}

double PowerDaughter::B(double z) const {
    if (z <= 0.0 || z > 1.0) return 0.0;
    return (nu_ + 2.0) * std::pow(z, nu_);
}

double PowerDaughter::mass_cdf(double z) const {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return std::pow(z, nu_ + 2.0);
}

double PowerDaughter::moment(double m, double p) const {
    const double e = m + p * nu_ + 1.0;
    if (e <= 0.0) throw InputError("moment diverges");
    return std::pow(nu_ + 2.0, p) / e;
}

double PowerDaughter::log_moment() const { return 1.0 / (nu_ + 2.0); }

double PowerDaughter::integrate(const std::function<double(double)>& fn) const {
    auto g = [&](double z) { return fn(z) * B(z); };
    return integrate_singular_left(g, 1.0, nu_);
}

std::string PowerDaughter::describe() const {
    std::ostringstream os;
    os << "power(nu=" << nu_ << ")";
    return os.str();
}

// ---------------------------------------------------------------- tabulated

namespace {

// int_{z0}^{t} s (v0 + k (s - z0)) ds
double seg_first_moment(double z0, double v0, double k, double t) {
    const double t2 = t * t, z2 = z0 * z0;
    return v0 * 0.5 * (t2 - z2) + k * ((t2 * t - z2 * z0) / 3.0 - z0 * 0.5 * (t2 - z2));
}

}  // namespace

TabulatedDaughter::TabulatedDaughter(std::vector<double> z, std::vector<double> b, double nu,
                                     bool zero_below_first)
    : z_(std::move(z)), b_(std::move(b)), nu_(nu), zero_below_(zero_below_first) {
    if (z_.size() != b_.size() || z_.size() < 2) throw InputError("daughter table needs at least two rows");
    for (std::size_t k = 0; k < z_.size(); ++k) {
        if (!(z_[k] >= 0.0 && z_[k] <= 1.0)) throw InputError("daughter table z outside [0, 1]");
        if (!(b_[k] >= 0.0) || !std::isfinite(b_[k])) throw InputError("daughter table B must be non-negative");
        if (k > 0 && !(z_[k] > z_[k - 1])) throw InputError("daughter table z must be strictly increasing");
    }
    build_cdf();
}

void TabulatedDaughter::build_cdf() {
    cdf_.assign(z_.size(), 0.0);
    cdf_[0] = zero_below_ ? 0.0 : 0.5 * b_[0] * z_[0] * z_[0];
    for (std::size_t k = 0; k + 1 < z_.size(); ++k) {
        const double slope = (b_[k + 1] - b_[k]) / (z_[k + 1] - z_[k]);
        cdf_[k + 1] = cdf_[k] + seg_first_moment(z_[k], b_[k], slope, z_[k + 1]);
    }
}

double TabulatedDaughter::B(double z) const {
    if (z <= 0.0 || z > 1.0) return 0.0;
    if (z <= z_.front()) return zero_below_ ? 0.0 : b_.front();
    if (z >= z_.back()) return b_.back();
    const auto it = std::upper_bound(z_.begin(), z_.end(), z);
    const std::size_t k = static_cast<std::size_t>(it - z_.begin()) - 1;
    const double w = (z - z_[k]) / (z_[k + 1] - z_[k]);
    return (1.0 - w) * b_[k] + w * b_[k + 1];
}

double TabulatedDaughter::mass_cdf(double z) const {
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) z = 1.0;
    if (z <= z_.front()) return zero_below_ ? 0.0 : 0.5 * b_.front() * z * z;
    if (z >= z_.back()) return cdf_.back() + 0.5 * b_.back() * (z * z - z_.back() * z_.back());
    const auto it = std::upper_bound(z_.begin(), z_.end(), z);
    const std::size_t k = static_cast<std::size_t>(it - z_.begin()) - 1;
    const double slope = (b_[k + 1] - b_[k]) / (z_[k + 1] - z_[k]);
    return cdf_[k] + seg_first_moment(z_[k], b_[k], slope, z);
}

double TabulatedDaughter::first_moment_exact() const { return mass_cdf(1.0); }

void TabulatedDaughter::renormalize() {
    const double m = first_moment_exact();
    if (!(m > 0.0)) throw InputError("daughter profile has zero mass");
    for (double& v : b_) v /= m;
    build_cdf();
}

double TabulatedDaughter::segment_integral(const std::function<double(double)>& fn, double a, double b) const {
    return composite_gauss(fn, a, b, 1, 4);
}

double TabulatedDaughter::integrate(const std::function<double(double)>& fn) const {
    double total = 0.0;
    if (!zero_below_ && z_.front() > 0.0) {
        total += b_.front() * cfselfsim::integrate(fn, 0.0, z_.front(), 1e-12);
    }
    for (std::size_t k = 0; k + 1 < z_.size(); ++k) {
        if (b_[k] == 0.0 && b_[k + 1] == 0.0) continue;
        const double z0 = z_[k], z1 = z_[k + 1], v0 = b_[k], v1 = b_[k + 1];
        auto g = [&](double z) { return fn(z) * (v0 + (v1 - v0) * (z - z0) / (z1 - z0)); };
        total += segment_integral(g, z0, z1);
    }
    if (z_.back() < 1.0) total += b_.back() * cfselfsim::integrate(fn, z_.back(), 1.0, 1e-12);
    return total;
}

double TabulatedDaughter::moment(double m, double p) const {
    double total = 0.0;
    if (!zero_below_ && z_.front() > 0.0) total += std::pow(b_.front(), p) * std::pow(z_.front(), m + 1.0) / (m + 1.0);
    for (std::size_t k = 0; k + 1 < z_.size(); ++k) {
        if (b_[k] == 0.0 && b_[k + 1] == 0.0) continue;
        const double z0 = z_[k], z1 = z_[k + 1], v0 = b_[k], v1 = b_[k + 1];
        auto g = [&](double z) {
            const double bz = v0 + (v1 - v0) * (z - z0) / (z1 - z0);
            return std::pow(z, m) * std::pow(bz, p);
        };
        if (z0 == 0.0)
            total += integrate_singular_left(g, z1, m);
        else
            total += composite_gauss(g, z0, z1, 1, 8);
    }
    if (z_.back() < 1.0) total += std::pow(b_.back(), p) * power_integral(z_.back(), 1.0, m);
    return total;
}

double TabulatedDaughter::log_moment() const {
    return integrate([](double z) { return z > 0.0 ? -z * std::log(z) : 0.0; });
}

std::string TabulatedDaughter::describe() const {
    std::ostringstream os;
    os << "tabulated(rows=" << z_.size() << ", nu=" << nu_ << ")";
    return os.str();
}

// ---------------------------------------------------------------- mollifier

double bump(double z) {
    if (z <= -1.0 || z >= 1.0) return 0.0;
    const double t = 1.0 - z * z;
    const double t2 = t * t;
    return (315.0 / 256.0) * t2 * t2;
}

MollifiedDaughter::MollifiedDaughter(std::vector<double> z, std::vector<double> b, double nu, double eps,
                                     double beta, DaughterPtr parent)
    : TabulatedDaughter(std::move(z), std::move(b), nu, true), eps_(eps), beta_(beta), parent_(std::move(parent)) {}

std::string MollifiedDaughter::describe() const {
    std::ostringstream os;
    os << "mollified(eps=" << eps_ << ", beta=" << beta_ << ", parent=" << parent_->describe() << ")";
    return os.str();
}

MollifiedPtr mollify(const DaughterPtr& d, double eps, int table_size) {
    if (!d) throw InputError("mollify: no daughter");
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("eps must lie in (0, 1)");
    if (table_size < 16) throw InputError("mollifier table too small");
    const double e2 = eps * eps;
    const double z_lo = eps - e2;

    std::vector<double> z{z_lo};
    std::vector<double> u{0.0};
    for (int k = 0; k < table_size; ++k) {
        const double zk = static_cast<double>(k) / (table_size - 1);
        if (zk <= z_lo) continue;
        const double lo = std::max(eps, zk - e2);
        const double hi = std::min(1.0, zk + e2);
        double val = 0.0;
        if (hi > lo) {
            auto f = [&](double t) { return bump((zk - t) / e2) / e2 * d->B(t); };
            val = composite_gauss(f, lo, hi, 4, 16);
        }
        z.push_back(zk);
        u.push_back(val);
    }

    TabulatedDaughter raw(z, u, d->nu(), true);
    const double beta = raw.first_moment_exact();
    if (!(beta > 0.5)) {
        std::ostringstream os;
        os << "eps too large (beta_eps = " << beta << ")";
        throw InputError(os.str());
    }
    for (double& v : u) v /= beta;
    return std::make_shared<MollifiedDaughter>(std::move(z), std::move(u), d->nu(), eps, beta, d);
}

// ---------------------------------------------------------------- csv loader

std::shared_ptr<TabulatedDaughter> load_daughter_csv(const std::string& path, double nu) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open daughter file " + path);
    std::vector<double> z, b;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw InputError("daughter file row " + std::to_string(row) + ": expected z,B");
        const std::string a = line.substr(0, comma), c = line.substr(comma + 1);
        char* end = nullptr;
        const double zv = std::strtod(a.c_str(), &end);
        if (end == a.c_str()) {
            if (z.empty()) continue;  // header
            throw InputError("daughter file row " + std::to_string(row) + ": bad number");
        }
        char* end2 = nullptr;
        const double bv = std::strtod(c.c_str(), &end2);
        if (end2 == c.c_str()) throw InputError("daughter file row " + std::to_string(row) + ": bad number");
        if (!(zv > 0.0 && zv < 1.0)) throw InputError("daughter file: z must lie in (0, 1)");
        z.push_back(zv);
        b.push_back(bv);
    }
    auto t = std::make_shared<TabulatedDaughter>(z, b, nu, false);
    const double m = t->first_moment_exact();
    const double check = t->integrate([](double s) { return s; });
    if (std::abs(check - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "daughter file: int z B(z) dz = " << m << ", expected 1 within 1e-6";
        throw InputError(os.str());
    }
    t->renormalize();
    return t;
}

// ---------------------------------------------------------------- diagnostic params

double mu1_of(double m1, double q1, double lambda) { return (m1 + 1.0 + q1 * (lambda - 2.0)) / q1; }

DiagnosticParams default_diagnostic_params(const CoefficientSet& c, const Daughter& d) {
    const double nu = d.nu();
    const double lo = std::max(0.0, -nu - 1.0);
    const double hi = std::min(c.alpha, 1.0);
    if (!(hi > lo)) throw InputError("no admissible m0: (max(0,-nu-1), min(alpha,1)) is empty");
    DiagnosticParams p;
    p.m0 = 0.5 * (lo + hi);
    p.m1 = std::max(p.m0, 2.0 - c.lambda);

    // Feasible q: q in (1,2), m1 + q nu > -1, mu1(q) in (m0, lambda).
    // mu1 = (m1+1)/q + lambda - 2 is decreasing in q.
    double q_sup = 2.0;
    if (nu < 0.0) q_sup = std::min(q_sup, (p.m1 + 1.0) / (-nu));
    const double gap = p.m0 - c.lambda + 2.0;  // mu1 > m0  <=>  (m1+1)/q > gap
    if (gap > 0.0) q_sup = std::min(q_sup, (p.m1 + 1.0) / gap);
    const double q_inf = std::max(1.0, 0.5 * (p.m1 + 1.0));  // mu1 < lambda  <=>  q > (m1+1)/2
    if (!(q_sup > q_inf)) throw InputError("no admissible q1 for the given coefficients");
    p.q1 = q_sup - 0.05 * (q_sup - q_inf);
    p.mu1 = mu1_of(p.m1, p.q1, c.lambda);
    return p;
}

std::vector<std::string> validate(const DiagnosticParams& p, const CoefficientSet& c, const Daughter& d) {
    std::vector<std::string> v;
    const double nu = d.nu();
    if (!(p.m0 > -nu - 1.0 && p.m0 < c.alpha && p.m0 >= 0.0 && p.m0 < 1.0))
        v.push_back("m0 must lie in (-nu-1, alpha) and [0, 1)");
    if (std::abs(p.m1 - std::max(p.m0, 2.0 - c.lambda)) > 1e-15) v.push_back("m1 must equal max(m0, 2 - lambda)");
    if (!(p.q1 > 1.0 && p.q1 < 2.0)) v.push_back("q1 must lie in (1, 2)");
    if (!in_admissible_set(nu, p.m1, p.q1)) v.push_back("(m1, q1) must lie in the admissible set");
    const double mu = mu1_of(p.m1, p.q1, c.lambda);
    if (!(mu > p.m0 && mu < c.lambda)) v.push_back("mu1 must lie in (m0, lambda)");
    return v;
}

}  // namespace cfselfsim
