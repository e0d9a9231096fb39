#include "cfselfsim/grid.hpp"

#include "cfselfsim/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cfselfsim {

double SizeGrid::power_weight(int i, double p) const { return power_integral(edges[i], edges[i + 1], p); }

std::vector<double> SizeGrid::power_weights(double p) const {
    std::vector<double> w(n_cells);
    for (int i = 0; i < n_cells; ++i) w[i] = power_weight(i, p);
    return w;
}

int SizeGrid::locate(double x) const {
    if (x < xmin) return -1;
    if (x >= xmax) return n_cells;
    int i = static_cast<int>(std::floor(std::log(x / xmin) / std::log(ratio)));
    i = std::clamp(i, 0, n_cells - 1);
    while (i > 0 && x < edges[i]) --i;
    while (i < n_cells - 1 && x >= edges[i + 1]) ++i;
    return i;
}

double SizeGrid::log_step() const { return std::log(ratio); }

GridPtr make_grid(double xmin, double xmax, int n_cells) {
    if (!(xmin > 0.0 && xmax > xmin && std::isfinite(xmax))) throw InputError("grid bounds must satisfy 0 < xmin < xmax");
    if (n_cells < 8) throw InputError("grid needs at least 8 cells");
    auto g = std::make_shared<SizeGrid>();
    g->xmin = xmin;
    g->xmax = xmax;
    g->n_cells = n_cells;
    const double lr = std::log(xmax / xmin) / n_cells;
    g->ratio = std::exp(lr);
    g->edges.resize(n_cells + 1);
    for (int i = 0; i <= n_cells; ++i) g->edges[i] = xmin * std::exp(lr * i);
    g->edges.back() = xmax;
    g->centers.resize(n_cells);
    g->widths.resize(n_cells);
    g->mass_w.resize(n_cells);
    for (int i = 0; i < n_cells; ++i) {
        g->centers[i] = std::sqrt(g->edges[i] * g->edges[i + 1]);
        g->widths[i] = g->edges[i + 1] - g->edges[i];
        g->mass_w[i] = power_integral(g->edges[i], g->edges[i + 1], 1.0);
    }
    return g;
}

Spectrum project(const std::function<double(double)>& fn, const GridPtr& grid) {
    Spectrum s(grid);
    for (int i = 0; i < grid->n_cells; ++i) {
        const double a = grid->edges[i], b = grid->edges[i + 1];
        // Mass-weighted average, so the projection carries the exact mass of fn.
        s.values[i] = composite_gauss([&](double x) { return x * fn(x); }, a, b, 4, 8) / grid->mass_w[i];
    }
    return s;
}

double moment(const Spectrum& s, double m) {
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = (m == 1.0 ? s.grid->mass_w[i] : s.grid->power_weight(static_cast<int>(i), m)) * s.values[i];
    }
    return pairwise_sum(t);
}

double weighted_lq_norm(const Spectrum& s, double m, double q) {
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = s.grid->power_weight(static_cast<int>(i), m) * std::pow(std::abs(s.values[i]), q);
    return pairwise_sum(t);
}

double log_moment(const Spectrum& s) {
    std::vector<double> t(s.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        t[i] = xlogx_integral(s.grid->edges[i], s.grid->edges[i + 1]) * s.values[i];
    return pairwise_sum(t);
}

double x1_distance(const Spectrum& a, const Spectrum& b) {
    if (a.grid != b.grid && (a.size() != b.size() || a.grid->xmin != b.grid->xmin || a.grid->xmax != b.grid->xmax))
        throw InputError("x1_distance: spectra live on different grids");
    std::vector<double> t(a.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = a.grid->mass_w[i] * std::abs(a.values[i] - b.values[i]);
    return pairwise_sum(t);
}

double total_variation(const Spectrum& s) {
    std::vector<double> t(s.size() + 1);
    t[0] = std::abs(s.values.front());
    for (std::size_t i = 1; i < s.size(); ++i) t[i] = std::abs(s.values[i] - s.values[i - 1]);
    t[s.size()] = std::abs(s.values.back());
    return pairwise_sum(t);
}

Spectrum dilate(const Spectrum& f, double c, double amp) {
    const SizeGrid& g = *f.grid;
    Spectrum h(f.grid);
    // Source cell k occupies [e_k / c, e_{k+1} / c] in the target variable.
    int k = 0;
    for (int i = 0; i < g.n_cells; ++i) {
        const double a = g.edges[i], b = g.edges[i + 1];
        while (k < g.n_cells && g.edges[k + 1] / c <= a) ++k;
        double mass = 0.0;
        for (int j = k; j < g.n_cells; ++j) {
            const double lo = std::max(a, g.edges[j] / c);
            const double hi = std::min(b, g.edges[j + 1] / c);
            if (lo >= b) break;
            if (hi > lo) mass += f.values[j] * power_integral(lo, hi, 1.0);
        }
        // int_{cell} x amp f(c x) dx with f piecewise constant.
        h.values[i] = amp * mass / g.mass_w[i];
    }
    return h;
}

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_snapshot_csv(const Spectrum& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << "x_center,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) out << fmt(s.grid->centers[i]) << ',' << fmt(s.values[i]) << '\n';
}

Spectrum read_snapshot_csv(const std::string& path, const GridPtr& grid) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::string line;
    std::getline(in, line);
    Spectrum s(grid);
    std::size_t i = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || i >= s.size()) throw InputError("snapshot does not match the grid: " + path);
        s.values[i++] = std::stod(line.substr(comma + 1));
    }
    if (i != s.size()) throw InputError("snapshot does not match the grid: " + path);
    return s;
}

}  // namespace cfselfsim
