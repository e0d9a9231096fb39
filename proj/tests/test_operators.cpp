#include "catch_amalgamated.hpp"

#include "cfselfsim/operators.hpp"

#include <cmath>

using namespace cfselfsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

GridPtr grid256() { return make_grid(1e-6, 1e3, 256); }
Spectrum exp_spec(const GridPtr& g) { return project([](double x) { return std::exp(-x); }, g); }

}  // namespace

TEST_CASE("zero state gives zero rates") {
    const Spectrum z(grid256());
    const CoefficientSet c;
    const DaughterPtr d = std::make_shared<PowerDaughter>(0.0);
    const auto co = coagulation_apply(z, c);
    CHECK(moment(co.rate, 0.0) == 0.0);
    CHECK(co.flux == 0.0);
    CHECK(moment(fragmentation_apply(z, c, d).rate, 0.0) == 0.0);
    CHECK(moment(transport_apply(z).rate, 0.0) == 0.0);
}

TEST_CASE("constant kernel number decay rate") {
    const Spectrum f = exp_spec(grid256());
    const auto r = coagulation_apply(f, CoefficientSet{0.0, 0.0, 1.0, 0.0});
    CHECK_THAT(moment(r.rate, 0.0), WithinAbs(-1.0, 0.02));
    CHECK_THAT(moment(r.rate, 1.0) + r.flux, WithinAbs(0.0, 1e-13));
}

TEST_CASE("fragmentation number gain and mass balance") {
    const Spectrum f = exp_spec(grid256());
    const CoefficientSet c{2.0, 1.0, 0.0, 1.0};
    const DaughterPtr d = std::make_shared<PowerDaughter>(0.0);
    const auto r = fragmentation_apply(f, c, d);
    CHECK_THAT(moment(r.rate, 0.0), WithinAbs(moment(f, 1.0), 0.02));
    CHECK_THAT(moment(r.rate, 1.0) + r.flux, WithinAbs(0.0, 1e-13));

    const FragmentationOperator op(f.grid, c, d);
    const auto& g = *f.grid;
    for (int i : {0, 17, 128, 255}) {
        double fragments = op.dust_weight(i);
        for (int j = 0; j <= i; ++j) fragments += op.weight(i, j);
        const double parent = c.a0 * g.power_weight(i, 2.0);
        CHECK_THAT(fragments, WithinRel(parent, 1e-12));
    }
}

TEST_CASE("coagulation mass balance for the product kernel") {
    const Spectrum f = exp_spec(grid256());
    const auto r = coagulation_apply(f, CoefficientSet{});
    CHECK_THAT(moment(r.rate, 1.0) + r.flux, WithinAbs(0.0, 1e-13));
    // d/dt M_0 = -1/2 int int K f f = -M_1^2 for K = 2xy.
    CHECK_THAT(moment(r.rate, 0.0), WithinRel(-1.0, 0.02));
}

TEST_CASE("transport identities") {
    const Spectrum f = exp_spec(grid256());
    for (auto rec : {Reconstruction::Upwind, Reconstruction::VanLeer}) {
        const auto r = transport_apply(f, rec);
        CHECK_THAT(moment(r.rate, 1.0) + r.flux, WithinAbs(0.0, 1e-13));
        // Upwind is first order in the log step.
        const double tol = rec == Reconstruction::Upwind ? 0.05 : 0.02;
        CHECK_THAT(moment(r.rate, 0.0), WithinRel(-moment(f, 0.0), tol));
    }
}

TEST_CASE("weak form kernels") {
    const DaughterPtr d = std::make_shared<PowerDaughter>(0.0);
    const TestFunction id = identity_test();
    CHECK(chi_theta(id, 1.5, 2.5) == 0.0);
    CHECK_THAT(n_theta(id, *d, 3.0), WithinAbs(0.0, 1e-14));
    CHECK_THAT(chi_theta(power_test(2.0), 1.0, 2.0), WithinAbs(4.0, 1e-14));
    for (double y : {0.3, 1.0, 7.0}) CHECK_THAT(n_theta(xlogx_test(), *d, y), WithinRel(0.5 * y, 1e-8));
    // Cut-off daughter: the integration-by-parts path must agree with the generic one.
    const MollifiedPtr m = mollify(d, 0.05);
    CHECK_THAT(n_theta(xlogx_test(), *m, 2.0), WithinRel(m->log_moment() * 2.0, 1e-6));
}

TEST_CASE("inequality sides") {
    CHECK_THAT(xlogx_lhs(1.0, 4.0), WithinAbs(5.0 * std::log(5.0) - 4.0 * std::log(4.0), 1e-12));
    CHECK_THAT(xlogx_rhs(1.0, 4.0), WithinAbs(4.0 * std::log(2.0), 1e-12));
    CHECK(xlogx_lhs(1.0, 4.0) <= xlogx_rhs(1.0, 4.0));
    for (double x : {1e-3, 1.0, 42.0}) CHECK_THAT(xlogx_lhs(x, x), WithinRel(xlogx_rhs(x, x), 1e-12));
}
