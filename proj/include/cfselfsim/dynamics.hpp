#pragma once

#include "cfselfsim/coefficients.hpp"
#include "cfselfsim/grid.hpp"
#include "cfselfsim/operators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cfselfsim {

enum class Mode { Physical, Rescaled };
enum class Integrator { Heun, Patankar };

// Physical: df/dt = C f + F f.  Rescaled: dg/ds = -y dg/dy - 2g + C g + F g.
class Model {
public:
    Model(GridPtr grid, const CoefficientSet& c, DaughterPtr d, Mode mode,
          Reconstruction rec = Reconstruction::VanLeer);

    struct Rhs {
        std::vector<double> mass_rate;  // d/dt of cell masses
        std::vector<double> loss;       // per-unit-mass loss rate of each cell
        double gel_flux = 0.0;          // coagulation past xmax, plus transport outflow when rescaled
        double dust_flux = 0.0;
    };
    Rhs rhs(const std::vector<double>& g) const;
    // Largest dt keeping a forward-Euler stage non-negative at state g.
    double stability_bound(const std::vector<double>& g) const;
    double stability_bound(const Rhs& r) const;

    // Dense per-unit-mass transfer matrix (column = source cell) and sinks.
    void transfer(const std::vector<double>& g, Eigen::MatrixXd& A, std::vector<double>& gel,
                  std::vector<double>& dust) const;

    const GridPtr& grid() const { return grid_; }
    const CoefficientSet& coeffs() const { return c_; }
    const DaughterPtr& daughter() const { return d_; }
    Mode mode() const { return mode_; }
    const CoagulationOperator& coagulation() const { return coag_; }
    const FragmentationOperator& fragmentation() const { return frag_; }

private:
    GridPtr grid_;
    CoefficientSet c_;
    DaughterPtr d_;
    Mode mode_;
    CoagulationOperator coag_;
    FragmentationOperator frag_;
    TransportOperator transport_;
};

struct EvolveConfig {
    Mode mode = Mode::Physical;
    Integrator integrator = Integrator::Heun;
    double horizon = 1.0;         // t_end or s_end
    double cfl = 0.9;             // fraction of the stability bound (Heun)
    double dt = 0.0;              // fixed step (Patankar); cap for Heun when > 0
    double snapshot_every = 0.1;
    double steady_tol = 1e-8;     // X1 distance per unit time
    double max_clip_mass = -1.0;  // < 0: 1e-8 * M1(f_in)
    bool keep_spectra = false;
    DiagnosticParams params;
};

struct TrajectoryRecord {
    std::vector<double> time;
    std::vector<double> M_m0, M_m1, M_1, M_lambda, M_1pl, logmom, U_m1, Lq1, gel, dust, clip;
    std::vector<double> gel_flux;    // instantaneous, at each snapshot
    std::vector<double> stationarity;  // X1 rate of the last step before the snapshot
    std::vector<Spectrum> spectra;   // when keep_spectra
    DiagnosticParams params;
    double lambda = 2.0;

    std::size_t size() const { return time.size(); }
};

struct EvolveResult {
    TrajectoryRecord record;
    Spectrum final;
    bool stationary = false;
    double stationarity = 0.0;  // last X1 rate
    double end_time = 0.0;
    long steps = 0;
};

// One step of size dt. Heun rejects dt above the stability bound (InputError
// carrying the bound). Side channels of the returned spectrum are updated.
Spectrum step(const Spectrum& s, double dt, const Model& m, Integrator integ = Integrator::Heun);

EvolveResult evolve(const Spectrum& f_in, const EvolveConfig& cfg, const Model& m);

void append_snapshot(TrajectoryRecord& rec, double t, const Spectrum& s, double gel_flux, double rate,
                     bool keep);

double s_lambda(double t, double lambda);
struct Rescaled {
    Spectrum g;
    double s;
};
struct Physical {
    Spectrum f;
    double t;
};
Rescaled scale_to_rescaled(const Spectrum& f, double t, double lambda);
Physical scale_to_physical(const Spectrum& g, double s, double lambda);

// First snapshot time whose instantaneous gel flux, or the mean gel flux over the
// preceding interval, exceeds the threshold (default 1e-6 * M1 at the first snapshot).
std::optional<double> gelation_monitor(const TrajectoryRecord& rec, double threshold = -1.0);

void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path);

}  // namespace cfselfsim
