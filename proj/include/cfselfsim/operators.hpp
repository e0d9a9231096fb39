#pragma once

#include "cfselfsim/coefficients.hpp"
#include "cfselfsim/grid.hpp"

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace cfselfsim {

// All operators work on cell-average densities g and return d/dt of cell
// masses (g_i * int_cell x dx). Mass moves only between cells or into the
// recorded sink channel, so the mass rates sum to minus the sink flux.

// Mass-flux form: J(x) = int_0^x int_{x-u}^inf u K(u,v) f(u) f(v) dv du, with f
// piecewise constant. The v-integral is exact; the u-integral uses Gauss
// points inside each cell.
class CoagulationOperator {
public:
    CoagulationOperator(GridPtr grid, const CoefficientSet& c, int quad_order = 3);

    // Returns the flux through xmax (gel flux). loss_rate, if given, receives
    // the per-unit-mass loss rate of each cell.
    double apply(const std::vector<double>& g, std::vector<double>& mass_rate,
                 std::vector<double>* loss_rate = nullptr) const;
    // Edge fluxes J_0..J_n (J_0 = 0).
    std::vector<double> edge_flux(const std::vector<double>& g) const;
    // Adds per-unit-mass transfer coefficients (column = source cell) and
    // per-unit-mass sink rates.
    void add_transfer(const std::vector<double>& g, Eigen::MatrixXd& A, std::vector<double>& sink) const;

    bool active() const { return active_; }

private:
    struct Entry {
        int cell;      // cell holding x - u, or -1 below xmin
        double a1, a2; // K0 w u^{1+alpha}, K0 w u^{1+lambda-alpha}
        double A1, A2; // int_{x-u}^{edge} v^{lambda-alpha} dv, same with v^alpha
    };
    // per-unit-density crossing c(k, e) for e = k+1..n
    void crossing(const std::vector<double>& g, const std::vector<double>& S1, const std::vector<double>& S2, int k,
                  double* out) const;
    void suffix_sums(const std::vector<double>& g, std::vector<double>& S1, std::vector<double>& S2) const;

    GridPtr grid_;
    CoefficientSet c_;
    int q_;
    bool active_;
    std::vector<double> P1_, P2_;  // cell integrals of v^{lambda-alpha}, v^alpha
    std::vector<std::size_t> offset_;
    std::vector<Entry> entries_;
};

// Per-parent-cell redistribution weights computed from the daughter mass
// distribution: W_ij = int_{cell i} a(y) y [Phi(x_{j+1/2}/y) - Phi(x_{j-1/2}/y)] dy.
class FragmentationOperator {
public:
    FragmentationOperator(GridPtr grid, const CoefficientSet& c, DaughterPtr d, int pieces = 8, int order = 4);

    // Returns the flux of fragment mass below xmin (dust flux).
    double apply(const std::vector<double>& g, std::vector<double>& mass_rate) const;
    void add_transfer(Eigen::MatrixXd& A, std::vector<double>& sink) const;

    // weight parent i -> target j (j <= i), per unit density of the parent
    double weight(int i, int j) const { return W_[tri(i) + j]; }
    double dust_weight(int i) const { return D_[i]; }
    // Mass leaving cell i per unit density (fragments landing in cell i stay).
    double loss_weight(int i) const { return L_[i]; }
    bool active() const { return active_; }

private:
    static std::size_t tri(int i) { return static_cast<std::size_t>(i) * (i + 1) / 2; }

    GridPtr grid_;
    bool active_;
    std::vector<double> W_;
    std::vector<double> D_;
    std::vector<double> L_;
};

enum class Reconstruction { Upwind, VanLeer };

// -y d_y g - 2 g written as the mass flux F = y^2 g directed to larger y.
class TransportOperator {
public:
    explicit TransportOperator(GridPtr grid, Reconstruction rec = Reconstruction::VanLeer);

    // Returns the mass flux leaving through xmax.
    double apply(const std::vector<double>& g, std::vector<double>& mass_rate) const;
    void add_transfer(const std::vector<double>& g, Eigen::MatrixXd& A, std::vector<double>& sink) const;
    // Upper bound of the per-unit-mass outflow rate over all cells.
    double max_rate() const;
    Reconstruction reconstruction() const { return rec_; }

private:
    double edge_value(const std::vector<double>& g, int i) const;

    GridPtr grid_;
    Reconstruction rec_;
};

// ---------------------------------------------------------------- spectrum-level wrappers

struct OperatorResult {
    Spectrum rate;      // d/dt of cell averages
    double flux = 0.0;  // gel flux (coagulation, transport) or dust flux (fragmentation)
};

OperatorResult coagulation_apply(const Spectrum& s, const CoefficientSet& c);
OperatorResult fragmentation_apply(const Spectrum& s, const CoefficientSet& c, const DaughterPtr& d);
OperatorResult transport_apply(const Spectrum& s, Reconstruction rec = Reconstruction::VanLeer);

// ---------------------------------------------------------------- weak form

struct TestFunction {
    std::function<double(double)> eval;
    std::function<double(double)> deriv;
    std::string label;
    double lipschitz = 1.0;  // sup |theta'|
    // theta(x) - x theta'(x) in a cancellation-free form; optional.
    std::function<double(double)> gap;
    // Degree m when theta(x) = x^m up to a constant factor; NaN otherwise.
    double homogeneity = std::numeric_limits<double>::quiet_NaN();

    double tangent_gap(double x) const { return gap ? gap(x) : eval(x) - x * deriv(x); }
};

TestFunction identity_test();
TestFunction saturating_test(double xi);  // x / (1 + x/xi)
TestFunction power_test(double m);        // x^m
TestFunction xlogx_test();                // x ln x
// xi on a geometric ladder spanning the grid.
std::vector<TestFunction> saturating_ladder(const SizeGrid& g, int count = 8);

double chi_theta(const TestFunction& t, double x, double y);
double n_theta(const TestFunction& t, const Daughter& d, double y);

// Terms of the stationary weak form for a piecewise-constant h:
//   transport     = int (theta - x theta') h
//   coagulation   = 1/2 int int K chi_theta h h
//   fragmentation = int a N_theta h
// The rescaled equation gives d/ds int theta h = -transport + coagulation - fragmentation.
struct WeakTerms {
    double transport = 0.0;
    double coagulation = 0.0;
    double fragmentation = 0.0;

    double rate() const { return -transport + coagulation - fragmentation; }
};
// d may be null (no fragmentation). Cell integrals use `order` Gauss points per cell and direction.
WeakTerms weak_form_terms(const Spectrum& h, const CoefficientSet& c, const Daughter* d, const TestFunction& t,
                          int order = 3);

// (x+y) ln(x+y) - x ln x - y ln y and its bound 2 ln 2 sqrt(xy).
double xlogx_lhs(double x, double y);
double xlogx_rhs(double x, double y);

}  // namespace cfselfsim
