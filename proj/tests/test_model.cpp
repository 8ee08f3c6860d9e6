#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "dendrite/eigenproblem.hpp"
#include "dendrite/model.hpp"
#include "dendrite/optimize.hpp"
#include "oracles.hpp"

using namespace dendrite;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
PhysicalParams desk_params(double Gs = 0.5) {
    PhysicalParams p;
    p.G_s = Gs;
    return p;
}
}  // namespace

TEST_CASE("physical parameters expose the derived constants") {
    PhysicalParams p = desk_params(0.5);
    REQUIRE_THAT(p.gamma(), WithinRel(1.0, 1e-15));
    REQUIRE_THAT(p.soma_weight(), WithinRel(1.0, 1e-15));
    p.validate();

    PhysicalParams bad = p;
    bad.G_s = 2.0;  // gamma would be negative
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = p;
    bad.R_a = 0.0;
    REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("taper profile rejects degenerate data") {
    REQUIRE_THROWS_AS(TaperProfile({0.0, 0.5, 0.5}, {1.0, 1.0, 1.0}),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(TaperProfile({0.0, 1.0}, {1.0, -0.1}), std::invalid_argument);
    REQUIRE_THROWS_AS(TaperProfile({0.1, 1.0}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("surface area: constant and linear tapers in closed form") {
    const double a0 = 0.7, ell = 1.3;
    REQUIRE_THAT(surface_area(TaperProfile::constant(a0, ell)),
                 WithinRel(2.0 * std::numbers::pi * a0 * ell, 1e-14));

    // a(x) = a0 (1 + x) on [0,1]: slope a0, integral of a is 3 a0 / 2
    const TaperProfile ramp({0.0, 1.0}, {a0, 2.0 * a0});
    const double expected =
        2.0 * std::numbers::pi * a0 * 1.5 * std::sqrt(1.0 + a0 * a0);
    REQUIRE_THAT(surface_area(ramp), WithinRel(expected, 1e-14));
}

TEST_CASE("surface area matches adaptive quadrature on an 8-node profile") {
    const std::vector<double> x = {0.0, 0.13, 0.27, 0.42, 0.55, 0.71, 0.86, 1.0};
    const std::vector<double> a = {1.0, 1.42, 1.17, 1.51, 1.08, 1.33, 1.22, 1.05};
    const TaperProfile taper(x, a);
    const auto integrand = [&taper](double t) {
        const double s = taper.slope(taper.cell_of(t));
        return taper.radius(t) * std::sqrt(1.0 + s * s);
    };
    const double ref =
        2.0 * std::numbers::pi * oracle::integrate_split(integrand, 0.0, 1.0, x);
    REQUIRE_THAT(surface_area(taper), WithinRel(ref, 1e-12));
}

TEST_CASE("admissibility: floor, surface bound, and empty-class rejection") {
    const double a0 = 1.0, ell = 1.0;
    const TaperProfile cyl = TaperProfile::constant(a0, ell);
    REQUIRE(is_admissible(cyl, a0, 2.0 * a0 * ell).admissible);

    const TaperProfile thin = TaperProfile::constant(0.5 * a0, ell);
    const auto rep = is_admissible(thin, a0, 2.0);
    REQUIRE_FALSE(rep.admissible);
    REQUIRE_FALSE(rep.floor_ok);

    // steep sawtooth: floor holds but the lateral surface blows past S
    std::vector<double> xs, as;
    for (int i = 0; i <= 16; ++i) {
        xs.push_back(static_cast<double>(i) / 16.0);
        as.push_back(i % 2 ? 2.0 : 1.0);
    }
    const TaperProfile saw(xs, as);
    REQUIRE(surface_integral(saw) > 2.0);  // derived via surface_area/2pi
    const auto saw_rep = is_admissible(saw, a0, 2.0);
    REQUIRE_FALSE(saw_rep.admissible);
    REQUIRE(saw_rep.floor_ok);
    REQUIRE_FALSE(saw_rep.surface_ok);

    REQUIRE_THROWS_AS(is_admissible(cyl, a0, a0 * ell), std::invalid_argument);
}

TEST_CASE("inner product: constants, zero, and mismatched grids") {
    const PhysicalParams p = desk_params();
    const double a0 = 1.2, ell = 0.9;
    const TaperProfile cyl = TaperProfile::constant(a0, ell);
    GridFunction one{{0.0, 0.45, 0.9}, {1.0, 1.0, 1.0}};
    GridFunction zero{{0.0, 0.45, 0.9}, {0.0, 0.0, 0.0}};
    REQUIRE_THAT(inner_product_a(one, one, cyl, p),
                 WithinRel(p.soma_weight() + a0 * ell, 1e-13));
    REQUIRE_THAT(inner_product_a(one, zero, cyl, p), WithinAbs(0.0, 1e-15));

    GridFunction other{{0.0, 0.5, 0.9}, {1.0, 1.0, 1.0}};
    REQUIRE_THROWS_AS(inner_product_a(one, other, cyl, p), std::invalid_argument);
}

TEST_CASE("inner product reproduces the eigensolver normalization") {
    const PhysicalParams p = desk_params();
    std::mt19937_64 rng(21);
    const TaperProfile taper = random_taper(1.0, 2.0, 1.0, 9, rng);
    const auto pairs = solve_spectrum(assemble(taper, p, 2048), 3);
    REQUIRE_THAT(inner_product_a(pairs[0].phi, pairs[0].phi, taper, p),
                 WithinAbs(1.0, 1e-8));
    // higher modes oscillate more; give the trapezoid a finer refinement
    for (const auto& pair : pairs)
        REQUIRE_THAT(inner_product_a(pair.phi, pair.phi, taper, p, 16),
                     WithinAbs(1.0, 1e-8));
}

TEST_CASE("change of variable: constant tapers") {
    const PhysicalParams p = desk_params();
    for (double c : {1.0, 1.7}) {
        const TaperProfile cyl = TaperProfile::constant(c, 2.0);
        const ChangeOfVariable cov = change_of_variable(cyl);
        REQUIRE_THAT(cov.ell1(), WithinRel(2.0 / (c * c), 1e-14));
        for (double y : {0.0, 0.3 * cov.ell1(), cov.ell1()})
            REQUIRE_THAT(cov.rho(y), WithinRel(c * c * c, 1e-14));
    }
}

TEST_CASE("change of variable: two-segment profile") {
    // nodes 0, 0.5, 1 with radii 1, 1.5, 1.2
    const TaperProfile taper({0.0, 0.5, 1.0}, {1.0, 1.5, 1.2});
    const ChangeOfVariable cov = change_of_variable(taper);
    const double s0 = taper.slope(0), s1 = taper.slope(1);

    // rho is smooth per segment with one-sided values a_i^3 sqrt(1+slope^2)
    const double ybreak = cov.breakpoints()[1];
    const double eps = 1e-9;
    REQUIRE_THAT(cov.rho(0.0), WithinRel(std::sqrt(1.0 + s0 * s0), 1e-12));
    REQUIRE_THAT(cov.rho(ybreak - eps),
                 WithinRel(std::pow(1.5, 3) * std::sqrt(1.0 + s0 * s0), 1e-6));
    REQUIRE_THAT(cov.rho(ybreak + eps),
                 WithinRel(std::pow(1.5, 3) * std::sqrt(1.0 + s1 * s1), 1e-6));

    // substitution identity, quadrature cross-check
    const auto rho_fn = [&cov](double y) { return cov.rho(y); };
    const double lhs = oracle::integrate_split(rho_fn, 0.0, cov.ell1(), {ybreak});
    REQUIRE_THAT(lhs, WithinRel(surface_integral(taper), 1e-10));
}

TEST_CASE("change of variable invariants on random profiles") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        const TaperProfile taper = random_taper(1.0, 2.0, 1.0, 11, rng);
        const ChangeOfVariable cov = change_of_variable(taper);

        // exact substitution identity
        REQUIRE_THAT(cov.rho_integral(0.0, cov.ell1()),
                     WithinRel(surface_integral(taper), 1e-10));

        // y_of_x strictly increasing, inverse compose to identity
        double prev = -1.0;
        for (int i = 0; i <= 40; ++i) {
            const double x = static_cast<double>(i) / 40.0;
            const double y = cov.y_of_x(x);
            REQUIRE(y > prev);
            prev = y;
            REQUIRE_THAT(cov.x_of_y(y), WithinAbs(x, 1e-10));
        }

        // resampling preserves the integral (cell averages)
        const RhoProfile rho = cov.resample(512);
        REQUIRE_THAT(rho.integral(), WithinRel(surface_integral(taper), 1e-10));
        REQUIRE(rho.in_class(1.0, 2.0, 1e-9));
    }
}

TEST_CASE("surface integral dominates the floor cost") {
    std::mt19937_64 rng(11);
    const double a0 = 1.0, ell = 1.0;
    REQUIRE_THAT(surface_integral(TaperProfile::constant(a0, ell)),
                 WithinRel(a0 * ell, 1e-14));
    for (int trial = 0; trial < 25; ++trial) {
        const TaperProfile taper = random_taper(a0, 2.0, ell, 9, rng);
        if (!taper.is_constant(1e-12))
            REQUIRE(surface_integral(taper) > a0 * ell);
    }
}

TEST_CASE("grid function interpolation and exact integration") {
    GridFunction f{{0.0, 1.0, 2.0}, {0.0, 2.0, 1.0}};
    REQUIRE_THAT(f(0.5), WithinRel(1.0, 1e-15));
    REQUIRE_THAT(f(1.5), WithinRel(1.5, 1e-15));
    REQUIRE_THAT(integrate(f, 0.0, 2.0), WithinRel(2.5, 1e-15));
    REQUIRE_THAT(integrate(f, 0.5, 1.5), WithinRel(0.5 * (1.0 + 2.0) * 0.5 +
                                                   0.5 * (2.0 + 1.5) * 0.5, 1e-14));
}
