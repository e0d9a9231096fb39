#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cfselfsim {

// Geometric mesh: edges x_{i-1/2} = xmin r^i, centers are geometric means.
struct SizeGrid {
    double xmin = 0.0;
    double xmax = 0.0;
    int n_cells = 0;
    double ratio = 1.0;
    std::vector<double> edges;    // n_cells + 1
    std::vector<double> centers;  // n_cells
    std::vector<double> widths;   // n_cells
    std::vector<double> mass_w;   // int_cell x dx

    // int_cell x^p dx
    double power_weight(int i, double p) const;
    std::vector<double> power_weights(double p) const;
    // Cell index containing x; -1 below xmin, n_cells at or above xmax.
    int locate(double x) const;
    double log_step() const;
};

using GridPtr = std::shared_ptr<const SizeGrid>;

GridPtr make_grid(double xmin, double xmax, int n_cells);

// Cell averages of a number density plus mass-accounting side channels.
struct Spectrum {
    GridPtr grid;
    std::vector<double> values;
    double gel_mass = 0.0;
    double dust_mass = 0.0;
    double clip_mass = 0.0;

    Spectrum() = default;
    explicit Spectrum(GridPtr g) : grid(std::move(g)), values(grid->n_cells, 0.0) {}
    std::size_t size() const { return values.size(); }
};

Spectrum project(const std::function<double(double)>& fn, const GridPtr& grid);

double moment(const Spectrum& s, double m);
// int x^m |h|^q dx
double weighted_lq_norm(const Spectrum& s, double m, double q);
// int x ln x h dx
double log_moment(const Spectrum& s);
// int x |a - b| dx; both spectra must share the grid.
double x1_distance(const Spectrum& a, const Spectrum& b);
// Sum over cells of |h_{i+1} - h_i| plus the end jumps: total variation of the step function.
double total_variation(const Spectrum& s);

// h(x) = amp * f(c x) on the same grid, mass-conservative per overlap interval.
// Mass mapped outside the grid is dropped.
Spectrum dilate(const Spectrum& f, double c, double amp);

// Fixed format used by every numeric output: 17 significant digits.
std::string fmt(double v);

void write_snapshot_csv(const Spectrum& s, const std::string& path);
Spectrum read_snapshot_csv(const std::string& path, const GridPtr& grid);

}  // namespace cfselfsim
