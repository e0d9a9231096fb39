#include "catch_amalgamated.hpp"

#include "cfselfsim/dynamics.hpp"
#include "cfselfsim/numerics.hpp"

#include <cmath>

using namespace cfselfsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const CoefficientSet kProduct{};
const DaughterPtr kP0 = std::make_shared<PowerDaughter>(0.0);

}  // namespace

TEST_CASE("heun rejects steps above the stability bound") {
    const GridPtr g = make_grid(1e-6, 1e3, 128);
    const Model m(g, kProduct, kP0, Mode::Physical);
    const Spectrum f = project([](double x) { return std::exp(-x); }, g);
    const double bound = m.stability_bound(f.values);
    // Fragments landing in their own cell do not count as loss, so the bound exceeds 1 / a(xmax).
    CHECK(bound > 1.0 / g->edges.back());
    CHECK(bound < 2.0 / g->edges.back());
    CHECK_THROWS_AS(step(f, 2.0 * bound, m), InputError);
    CHECK_NOTHROW(step(f, 0.5 * bound, m));
}

TEST_CASE("zero initial state is stationary") {
    const GridPtr g = make_grid(1e-6, 1e3, 64);
    const Model m(g, kProduct, kP0, Mode::Rescaled);
    EvolveConfig cfg;
    cfg.mode = Mode::Rescaled;
    const EvolveResult r = evolve(Spectrum(g), cfg, m);
    CHECK(r.stationary);
    CHECK(r.steps == 0);
}

TEST_CASE("scale maps") {
    CHECK_THAT(s_lambda(3.0, 2.0), WithinRel(4.0, 1e-14));
    CHECK_THAT(s_lambda(0.0, 1.5), WithinRel(1.0, 1e-14));
    const GridPtr g = make_grid(1e-6, 1e3, 256);
    const Spectrum f = project([](double x) { return std::exp(-x); }, g);
    const Rescaled r = scale_to_rescaled(f, 3.0, 2.0);
    CHECK_THAT(r.s, WithinRel(std::log(4.0), 1e-14));
    CHECK_THAT(moment(r.g, 1.0), WithinRel(moment(f, 1.0), 1e-12));
    const Physical back = scale_to_physical(r.g, r.s, 2.0);
    CHECK_THAT(back.t, WithinRel(3.0, 1e-13));
    CHECK_THAT(moment(back.f, 1.0), WithinRel(moment(f, 1.0), 1e-12));
    // A whole number of cells per factor 4 makes the remap a pure relabeling.
    const GridPtr h = make_grid(1e-6, 1.048576e0, 120);  // ratio 4^(1/12)
    const Spectrum u = project([](double x) { return x < 1e-3 ? std::exp(-1e3 * x) : 0.0; }, h);
    const Physical rt = scale_to_physical(scale_to_rescaled(u, 3.0, 2.0).g, std::log(4.0), 2.0);
    for (std::size_t i = 12; i + 12 < u.size(); ++i) CHECK_THAT(rt.f.values[i], WithinAbs(u.values[i], 1e-12));
}

TEST_CASE("mass is conserved before gelation") {
    const GridPtr g = make_grid(1e-6, 1e3, 128);
    const Model m(g, kProduct, kP0, Mode::Physical);
    const double rho = 0.1 * rho_star(kProduct, *kP0);
    const Spectrum f = project([rho](double x) { return rho * std::exp(-x); }, g);
    EvolveConfig cfg;
    cfg.horizon = 0.5;
    cfg.snapshot_every = 0.1;
    cfg.params = default_diagnostic_params(kProduct, *kP0);
    const EvolveResult r = evolve(f, cfg, m);
    const double m0 = r.record.M_1.front();
    for (std::size_t k = 0; k < r.record.size(); ++k)
        CHECK(std::abs(r.record.M_1[k] + r.record.gel[k] + r.record.dust[k] - m0) <= 1e-10 * m0);
    CHECK_FALSE(gelation_monitor(r.record).has_value());
}

TEST_CASE("no coagulation never gels") {
    const GridPtr g = make_grid(1e-6, 1e3, 64);
    const CoefficientSet c{2.0, 1.0, 0.0, 1.0};
    const Model m(g, c, kP0, Mode::Physical);
    const Spectrum f = project([](double x) { return 2.0 * std::exp(-x); }, g);
    EvolveConfig cfg;
    cfg.horizon = 0.5;
    cfg.params = default_diagnostic_params(c, *kP0);
    CHECK_FALSE(gelation_monitor(evolve(f, cfg, m).record).has_value());
}

TEST_CASE("heun is second order in time") {
    const GridPtr g = make_grid(1e-4, 1e2, 64);
    const CoefficientSet c{2.0, 1.0, 1.0, 0.2};
    const Model m(g, c, kP0, Mode::Physical);
    const Spectrum f = project([](double x) { return 0.1 * std::exp(-x); }, g);
    auto run = [&](double dt) {
        Spectrum s = f;
        const int n = static_cast<int>(std::lround(0.4 / dt));
        for (int k = 0; k < n; ++k) s = step(s, dt, m);
        return moment(s, 2.0);
    };
    const double a = run(0.004), b = run(0.002), ref = run(0.0005);
    const double e1 = std::abs(a - ref), e2 = std::abs(b - ref);
    CHECK(e2 < 0.35 * e1);
}

TEST_CASE("patankar keeps positivity and mass") {
    const GridPtr g = make_grid(1e-6, 1e3, 96);
    const Model m(g, kProduct, kP0, Mode::Rescaled);
    const Spectrum f = project([](double x) { return 0.18 * std::exp(-x); }, g);
    Spectrum s = f;
    for (int k = 0; k < 20; ++k) s = step(s, 0.1, m, Integrator::Patankar);
    for (double v : s.values) CHECK(v >= 0.0);
    CHECK_THAT(moment(s, 1.0) + s.gel_mass + s.dust_mass, WithinRel(moment(f, 1.0), 1e-10));
}
