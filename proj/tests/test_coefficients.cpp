#include "catch_amalgamated.hpp"

#include "cfselfsim/coefficients.hpp"
#include "cfselfsim/numerics.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace cfselfsim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent log-moment: with z = e^{-u}, int z |ln z| B(z) dz = (nu+2) int u e^{-(nu+2) u} du.
double bln_quadrature(double nu) {
    return integrate([nu](double u) { return (nu + 2.0) * u * std::exp(-(nu + 2.0) * u); }, 0.0, 80.0);
}

}  // namespace

TEST_CASE("admissibility of coefficient sets") {
    PowerDaughter p0(0.0), pm1(-1.0);
    CHECK(validate(CoefficientSet{2.0, 1.0, 1.0, 1.0}, p0).empty());
    CHECK(validate(CoefficientSet{2.0, 1.0, 1.0, 1.0}, pm1).empty());
    const auto bad = validate(CoefficientSet{2.0, 0.4, 1.0, 1.0}, p0);
    REQUIRE(bad.size() == 1);
    CHECK(bad.front().find("alpha") != std::string::npos);
    CHECK_FALSE(validate(CoefficientSet{1.5, 0.8, 1.0, 1.0}, p0).empty());
}

TEST_CASE("kernel and fragmentation rate") {
    CHECK_THAT(kernel_eval(CoefficientSet{2.0, 1.0, 1.0, 1.0}, 2.0, 3.0), WithinRel(12.0, 1e-14));
    CHECK_THAT(kernel_eval(CoefficientSet{1.5, 0.75, 1.0, 1.0}, 4.0, 1.0), WithinRel(5.656854249492381, 1e-12));
    CHECK_THAT(kernel_eval(CoefficientSet{1.5, 0.75, 3.0, 1.0}, 1.0, 1.0), WithinRel(6.0, 1e-14));
    CHECK_THAT(frag_rate(CoefficientSet{2.0, 1.0, 1.0, 1.0}, 5.0), WithinRel(5.0, 1e-14));
    CHECK_THAT(frag_rate(CoefficientSet{1.5, 0.75, 1.0, 2.0}, 4.0), WithinRel(4.0, 1e-14));
    CHECK_THAT(frag_rate(CoefficientSet{1.5, 0.75, 1.0, 0.7}, 1.0), WithinRel(0.7, 1e-14));
}

TEST_CASE("daughter moments against quadrature") {
    PowerDaughter p0(0.0), pm1(-1.0);
    CHECK_THAT(daughter_moment(p0, 1.0, 1.0), WithinAbs(1.0, 1e-12));
    CHECK_THAT(daughter_moment(pm1, 1.0, 1.0), WithinAbs(1.0, 1e-12));
    const double b01 = integrate([](double) { return 2.0; }, 0.0, 1.0);
    CHECK_THAT(daughter_moment(p0, 0.0, 1.0), WithinAbs(b01, 1e-10));
    CHECK_THAT(daughter_moment(p0, 0.0, 1.0), WithinAbs(2.0, 1e-10));
    CHECK_THROWS_AS(daughter_moment(pm1, 0.0, 1.0), InputError);

    CHECK_THAT(daughter_log_moment(p0), WithinAbs(bln_quadrature(0.0), 1e-10));
    CHECK_THAT(daughter_log_moment(pm1), WithinAbs(bln_quadrature(-1.0), 1e-10));
    CHECK_THAT(daughter_log_moment(p0), WithinAbs(0.5, 1e-12));
    CHECK_THAT(daughter_log_moment(pm1), WithinAbs(1.0, 1e-12));
}

TEST_CASE("mass threshold") {
    const CoefficientSet c;
    PowerDaughter p0(0.0), pm1(-1.0);
    CHECK_THAT(rho_star(c, p0), WithinAbs(0.360674, 1e-6));
    CHECK_THAT(rho_star(c, pm1), WithinAbs(0.721348, 1e-6));
    CHECK_THAT(rho_star(c, p0), WithinRel(1.0 / (4.0 * std::numbers::ln2), 1e-12));
}

TEST_CASE("mollified daughter") {
    const DaughterPtr p0 = std::make_shared<PowerDaughter>(0.0);
    const double eps = 0.05;
    const MollifiedPtr m = mollify(p0, eps);
    CHECK_THAT(m->first_moment_exact(), WithinAbs(1.0, 1e-10));
    CHECK_THAT(m->mass_cdf(1.0), WithinAbs(1.0, 1e-10));
    for (double z : {0.0, 1e-4, 0.01, eps - eps * eps}) CHECK(m->B(z) == 0.0);
    CHECK(m->B(0.5) > 0.0);
    CHECK(m->beta() > 0.5);

    const MollifiedPtr small = mollify(p0, 1e-3);
    CHECK(std::abs(small->beta() - 1.0) < 1e-2);

    double prev = 1.0;
    for (double e : {0.1, 0.05, 0.025, 0.0125}) {
        const double err = std::abs(mollify(p0, e)->log_moment() - 0.5);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev < 1e-2);
    CHECK_THROWS_AS(mollify(p0, 1.5), InputError);
}

TEST_CASE("tabulated daughter from CSV") {
    const auto path = std::filesystem::temp_directory_path() / "cfselfsim_daughter.csv";
    {
        std::ofstream out(path);
        out << "z,B\n";
        for (int k = 1; k < 100; ++k) out << k / 100.0 << ",2\n";
    }
    const auto d = load_daughter_csv(path.string(), 0.0);
    CHECK_THAT(d->first_moment_exact(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(d->B(0.5), WithinAbs(2.0, 1e-6));
    {
        std::ofstream out(path);
        for (int k = 1; k < 100; ++k) out << k / 100.0 << ",3\n";
    }
    CHECK_THROWS_AS(load_daughter_csv(path.string(), 0.0), InputError);
    std::filesystem::remove(path);
}

TEST_CASE("diagnostic parameters are admissible") {
    const CoefficientSet c;
    PowerDaughter p0(0.0), pm1(-1.0);
    CHECK(validate(default_diagnostic_params(c, p0), c, p0).empty());
    CHECK(validate(default_diagnostic_params(c, pm1), c, pm1).empty());
    const DiagnosticParams p = default_diagnostic_params(c, p0);
    CHECK_THAT(p.mu1, WithinAbs(mu1_of(p.m1, p.q1, c.lambda), 1e-15));
}
