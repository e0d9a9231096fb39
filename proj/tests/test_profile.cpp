#include "catch_amalgamated.hpp"

#include "cfselfsim/numerics.hpp"
#include "cfselfsim/profile.hpp"

#include <cmath>

using namespace cfselfsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const CoefficientSet kProduct{};
const DaughterPtr kP0 = std::make_shared<PowerDaughter>(0.0);

const ProfileCertificate& product_profile() {
    static const ProfileCertificate cert = solve_profile(kProduct, kP0, 1e-2, 0.5 * rho_star(kProduct, *kP0));
    return cert;
}

}  // namespace

TEST_CASE("residuals of trivial inputs") {
    const GridPtr g = make_grid(1e-6, 1e3, 128);
    const double rho = 0.18;
    const Spectrum h = project([rho](double x) { return rho * std::exp(-x); }, g);
    CHECK(weak_residual(h, kProduct, *kP0, {identity_test()}).front().value < 1e-13);
    CHECK(max_value(weak_residual(h, kProduct, *kP0, saturating_ladder(*g))) > 1e-2);
    CHECK(integral_residual(h, kProduct, *kP0).sup_defect > 1e-2);
    CHECK(integral_residual(Spectrum(g), kProduct, *kP0).sup_defect == 0.0);
    Spectrum neg = h;
    neg.values[3] = -1.0;
    CHECK_THROWS_AS(weak_residual(neg, kProduct, *kP0, {identity_test()}), InputError);
}

TEST_CASE("small-mass profile is certified") {
    const ProfileCertificate& cert = product_profile();
    CHECK(cert.stationary);
    CHECK(cert.stationarity_residual < 1e-6);
    CHECK(cert.end_s <= 30.0);
    CHECK_FALSE(cert.above_threshold);
    CHECK_THAT(moment(cert.phi, 1.0), WithinRel(cert.rho, 1e-6));
    CHECK(max_value(cert.weak_residuals) < 1e-3);
    CHECK(cert.integral.sup_defect < 1e-2);
    CHECK(cert.integral.small_size_ok);
    CHECK(cert.invariant_report.finite);
}

TEST_CASE("residuals agree on perturbed profiles") {
    const ProfileCertificate& cert = product_profile();
    Spectrum p = cert.phi;
    for (std::size_t i = 0; i < p.size(); ++i) p.values[i] *= 1.0 + 0.1 * std::sin(std::log(p.grid->centers[i]));
    const auto& d = *cert.daughter;
    CHECK(max_value(weak_residual(p, kProduct, d, saturating_ladder(*p.grid))) > 1e-3);
    CHECK(integral_residual(p, kProduct, d).sup_defect > 1e-2);
}

TEST_CASE("restart from a converged profile returns immediately") {
    const ProfileCertificate& cert = product_profile();
    ProfileConfig cfg;
    cfg.initial = cert.phi;
    cfg.steady_tol = 1e-3;
    const ProfileCertificate again = solve_profile(kProduct, kP0, 1e-2, cert.rho, cfg);
    CHECK(again.stationary);
    CHECK(again.steps == 0);
    CHECK_THAT(max_value(again.weak_residuals), WithinRel(max_value(cert.weak_residuals), 1e-12));
}

TEST_CASE("masses above the threshold run with a warning") {
    ProfileConfig cfg;
    cfg.n_cells = 96;
    cfg.s_max = 1.0;
    const ProfileCertificate cert = solve_profile(kProduct, kP0, 0.05, 0.5, cfg);
    CHECK(cert.above_threshold);
    CHECK_FALSE(cert.warnings.empty());
}

TEST_CASE("self-similar family") {
    const ProfileCertificate& cert = product_profile();
    const SelfSimilarFamily fam = build_self_similar(cert.phi, kProduct, *cert.daughter, {0.0, 0.5, 1.0});
    REQUIRE(fam.F.size() == 3);
    CHECK(x1_distance(fam.F.front(), cert.phi) == 0.0);
    CHECK_THAT(fam.mass[2], WithinRel(cert.rho, 1e-6));
    CHECK_THAT(moment(fam.psi, 1.0), WithinRel(cert.rho, 1e-6));
}

TEST_CASE("epsilon sweep bookkeeping") {
    ProfileConfig cfg;
    cfg.n_cells = 64;
    cfg.s_max = 2.0;
    const EpsSweepReport one = epsilon_sweep(kProduct, kP0, 0.1, {0.1}, cfg);
    CHECK(one.consecutive.empty());
    CHECK_THROWS_AS(epsilon_sweep(kProduct, kP0, 0.1, {0.05, 0.1}, cfg), InputError);
}
