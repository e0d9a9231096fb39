#include "catch_amalgamated.hpp"

#include "cfselfsim/diagnostics.hpp"
#include "cfselfsim/numerics.hpp"

#include <cmath>
#include <numbers>

using namespace cfselfsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("lyapunov functional of e^{-x}") {
    const GridPtr g = make_grid(1e-9, 1e3, 16384);
    const Spectrum e = project([](double x) { return std::exp(-x); }, g);
    const double expected = 1.0 - std::numbers::egamma + 6.0 / std::numbers::e * std::tgamma(1.5);
    CHECK_THAT(lyapunov_U(e, 0.5), WithinAbs(expected, 1e-5));
    CHECK_THAT(lyapunov_U(e, 0.5), WithinAbs(2.3790, 1e-4));
    CHECK(lyapunov_U(Spectrum(g), 0.5) == 0.0);
    CHECK_THROWS_AS(lyapunov_U(e, 1.0), InputError);
}

TEST_CASE("distance to the threshold") {
    const CoefficientSet c;
    const PowerDaughter p0(0.0);
    const double rs = rho_star(c, p0);
    CHECK_THAT(delta_rho(c, p0, rs / 2.0), WithinAbs(0.0625, 1e-12));
    CHECK_THAT(delta_rho(c, p0, rs), WithinAbs(0.0, 1e-15));
    CHECK(delta_rho(c, p0, 2.0 * rs) < 0.0);
    CHECK(delta_rho_m(c, p0, 0.1, 0.5) > 0.0);
}

TEST_CASE("sampled inequality") {
    const InequalityReport r = check_ail(100000, 1e-6, 1e6, 7);
    CHECK(r.violations == 0);
    CHECK(r.samples == 100000);
    CHECK(r.worst_margin > -1e-12);
    const InequalityReport again = check_ail(1000, 1e-6, 1e6, 7);
    CHECK(again.worst_margin >= r.worst_margin);
}

TEST_CASE("invariant report") {
    const CoefficientSet c;
    const PowerDaughter p0(0.0);
    const DiagnosticParams p = default_diagnostic_params(c, p0);
    const GridPtr g = make_grid(1e-6, 1e3, 256);
    const double rho = 0.18;
    const Spectrum s = project([rho](double x) { return rho * std::exp(-x); }, g);
    const InvariantReport r = invariant_set_report(s, c, p0, 0.01, p);
    CHECK(r.finite);
    CHECK_THAT(r.value("M_1"), WithinRel(rho, 1e-8));
    CHECK_THROWS_AS(r.value("nope"), InputError);

    // Heavy tail x^{-2.05}: M_{1+lambda} grows like xmax^{lambda - 0.05}.
    auto tail = [&](double xmax) {
        const GridPtr h = make_grid(1e-6, xmax, static_cast<int>(std::lround(32 * std::log10(xmax / 1e-6))));
        const Spectrum t = project([](double x) { return x < 1.0 ? 0.0 : std::pow(x, -2.05); }, h);
        return invariant_set_report(t, c, p0, 0.0, p);
    };
    const InvariantReport a = tail(1e3), b = tail(1e4);
    const double growth = b.value("M_1+lambda") / a.value("M_1+lambda");
    CHECK_THAT(std::log10(growth), WithinAbs(1.95, 0.02));
    const RefinementComparison cmp = compare_reports(a, b);
    CHECK_FALSE(cmp.stable);
    CHECK(std::find(cmp.drifting.begin(), cmp.drifting.end(), "M_1+lambda") != cmp.drifting.end());
}

TEST_CASE("moment balance on a pure fragmentation run") {
    const GridPtr g = make_grid(1e-6, 1e3, 512);
    const CoefficientSet c{2.0, 1.0, 0.0, 1.0};
    const DaughterPtr d = std::make_shared<PowerDaughter>(0.0);
    const Model m(g, c, d, Mode::Physical);
    EvolveConfig cfg;
    cfg.horizon = 0.3;
    cfg.snapshot_every = 0.02;
    cfg.keep_spectra = true;
    cfg.params = default_diagnostic_params(c, *d);
    const auto rec = evolve(project([](double x) { return std::exp(-x); }, g), cfg, m).record;
    const MomentBalance mb = moment_balance_check(rec, m, 0.0);
    CHECK_FALSE(mb.too_coarse);
    CHECK(mb.max_defect < 1e-3);

    EvolveConfig coarse = cfg;
    coarse.snapshot_every = 0.15;
    const auto rec2 = evolve(project([](double x) { return std::exp(-x); }, g), coarse, m).record;
    CHECK(moment_balance_check(rec2, m, 0.0).too_coarse);
}
