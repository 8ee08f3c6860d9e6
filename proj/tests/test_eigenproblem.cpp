#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "dendrite/eigenproblem.hpp"
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

TaperProfile bump_profile(double a0, double ell, double amp, std::size_t n_nodes = 17) {
    std::vector<double> x(n_nodes), a(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        x[i] = ell * double(i) / double(n_nodes - 1);
        const double s = std::sin(std::numbers::pi * x[i] / ell);
        a[i] = a0 * (1.0 + amp * s * s);
    }
    return TaperProfile(x, a);
}

}  // namespace

TEST_CASE("assembled matrices match a dense quadrature oracle entrywise") {
    std::mt19937_64 rng(3);
    const TaperProfile taper = random_taper(1.0, 2.0, 1.0, 7, rng);
    const PhysicalParams p = desk_params();
    const std::size_t n_cells = 64;
    const AssembledSystem sys = assemble(taper, p, n_cells);

    const double h = taper.ell() / double(n_cells);
    const auto hat = [&](std::size_t i, double x) {
        const double xi = double(i) * h;
        const double d = 1.0 - std::fabs(x - xi) / h;
        return std::max(d, 0.0);
    };
    const auto dhat = [&](std::size_t i, double x) {
        const double xi = double(i) * h;
        if (x < xi - h || x > xi + h) return 0.0;
        return x < xi ? 1.0 / h : -1.0 / h;
    };
    std::vector<double> splits = taper.nodes();
    for (std::size_t i = 0; i <= n_cells; ++i) splits.push_back(double(i) * h);
    std::sort(splits.begin(), splits.end());

    for (std::size_t i = 0; i <= n_cells; ++i) {
        for (std::size_t j = i; j <= std::min(i + 1, n_cells); ++j) {
            const double lo = (i == 0 ? 0.0 : (double(i) - 1.0) * h);
            const double hi = std::min(taper.ell(), (double(j) + 1.0) * h);
            double kij = oracle::integrate_split(
                [&](double x) {
                    const double a = taper.radius(x);
                    return a * a * dhat(i, x) * dhat(j, x);
                },
                lo, hi, splits, 1e-15);
            double mij = oracle::integrate_split(
                [&](double x) {
                    const double s = taper.slope(taper.cell_of(x));
                    return taper.radius(x) * std::sqrt(1.0 + s * s) * hat(i, x) *
                           hat(j, x);
                },
                lo, hi, splits, 1e-15);
            if (i == 0 && j == 0) {
                kij -= p.soma_weight() * p.gamma();
                mij += p.soma_weight();
            }
            const double kgot = (i == j) ? sys.stiffness().diag[i] : sys.stiffness().sub[i];
            const double mgot = (i == j) ? sys.mass().diag[i] : sys.mass().sub[i];
            REQUIRE_THAT(kgot, WithinAbs(kij, 1e-10 * std::max(1.0, std::fabs(kij))));
            REQUIRE_THAT(mgot, WithinAbs(mij, 1e-10 * std::max(1.0, std::fabs(mij))));
        }
    }
}

TEST_CASE("constant test function reproduces the Lemma 2.1 upper bound") {
    std::mt19937_64 rng(17);
    for (double Gs : {1.0, 0.5}) {
        const PhysicalParams p = desk_params(Gs);
        const TaperProfile taper = random_taper(1.0, 2.0, 1.0, 9, rng);
        const AssembledSystem sys = assemble(taper, p, 256);
        const std::vector<double> ones(sys.size(), 1.0);
        const double expected =
            -p.soma_weight() * p.gamma() / (surface_integral(taper) + p.soma_weight());
        REQUIRE_THAT(sys.rayleigh(ones), WithinAbs(expected, 1e-12));
    }
}

TEST_CASE("constant profile, gamma = 0: zero eigenvalue and flat mode") {
    const PhysicalParams p = desk_params(1.0);  // G_s = G_m means gamma = 0
    const double a0 = 1.0, ell = 1.0;
    const auto pairs = solve_spectrum(assemble(TaperProfile::constant(a0, ell), p, 512), 2);
    REQUIRE_THAT(pairs[0].mu, WithinAbs(0.0, 1e-10));
    const double flat = 1.0 / std::sqrt(p.soma_weight() + a0 * ell);
    for (double v : pairs[0].phi.v) REQUIRE_THAT(v, WithinAbs(flat, 1e-8));
    REQUIRE(pairs[1].mu > 0.0);
}

TEST_CASE("constant profile, gamma > 0: secular equation oracle") {
    const PhysicalParams p = desk_params(0.5);
    for (double a0 : {1.0, 1.4}) {
        const double ell = 1.0;
        const double expected = oracle::secular_mu1(a0, ell, p);
        const auto pairs =
            solve_spectrum(assemble(TaperProfile::constant(a0, ell), p, 2048), 1);
        REQUIRE_THAT(pairs[0].mu, WithinRel(expected, 1e-6));
    }
}

TEST_CASE("sign bounds and positive second eigenvalue on random profiles") {
    const PhysicalParams p = desk_params(0.5);
    const double gamma = p.gamma();
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 15; ++trial) {
        const TaperProfile taper = random_taper(1.0, 2.0, 1.0, 11, rng);
        const auto pairs = solve_spectrum(assemble(taper, p, 512), 2);
        REQUIRE(pairs[0].mu > -gamma + 1e-10);
        REQUIRE(pairs[0].mu < -1e-10);
        REQUIRE(pairs[1].mu > 0.0);
    }
}

TEST_CASE("spectrum: residuals, orthonormality, and the variational principle") {
    const PhysicalParams p = desk_params(0.5);
    std::mt19937_64 rng(31);
    const TaperProfile taper = random_taper(1.0, 2.0, 1.0, 9, rng);
    const AssembledSystem sys = assemble(taper, p, 1024);
    const auto pairs = solve_spectrum(sys, 6);

    std::vector<double> Kx, Mx;
    for (const auto& pr : pairs) {
        sys.stiffness().apply(pr.phi.v, Kx);
        sys.mass().apply(pr.phi.v, Mx);
        double rn = 0.0, mn = 0.0;
        for (std::size_t i = 0; i < Kx.size(); ++i) {
            const double r = Kx[i] - pr.mu * Mx[i];
            rn += r * r;
            mn += Mx[i] * Mx[i];
        }
        REQUIRE(std::sqrt(rn) <= 1e-8 * std::sqrt(mn));
        REQUIRE(pr.phi.front() >= 0.0);  // sign convention
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        sys.mass().apply(pairs[i].phi.v, Mx);
        for (std::size_t j = 0; j <= i; ++j) {
            double dot = 0.0;
            for (std::size_t r = 0; r < Mx.size(); ++r) dot += pairs[j].phi.v[r] * Mx[r];
            REQUIRE_THAT(dot, WithinAbs(i == j ? 1.0 : 0.0, 1e-8));
        }
    }
    REQUIRE_THAT(sys.rayleigh(pairs[0].phi.v), WithinAbs(pairs[0].mu, 1e-12));

    // increasing order, and mu_1 is the infimum over random test vectors
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i + 1 < pairs.size(); ++i)
        REQUIRE(pairs[i].mu < pairs[i + 1].mu);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> v(sys.size());
        for (double& vi : v) vi = u(rng);
        REQUIRE(sys.rayleigh(v) >= pairs[0].mu - 1e-10);
    }

    REQUIRE_THROWS_AS(solve_spectrum(sys, sys.size() + 1), std::invalid_argument);
}

TEST_CASE("monotonicity mechanism: numerator and denominator bounds at phi_1") {
    const PhysicalParams p = desk_params(0.5);
    std::mt19937_64 rng(41);
    const double a0 = 1.0;
    for (int trial = 0; trial < 10; ++trial) {
        const TaperProfile taper = random_taper(a0, 2.0, 1.0, 9, rng);
        const std::size_t cells = 512;
        const AssembledSystem sys = assemble(taper, p, cells);
        const AssembledSystem cyl =
            assemble(TaperProfile::constant(a0, taper.ell()), p, cells);
        const auto phi = solve_spectrum(sys, 1)[0].phi.v;
        const double Agam = p.soma_weight() * p.gamma();
        const double A = p.soma_weight();
        const double phi0sq = phi[0] * phi[0];
        // int a^2 phi'^2 >= a0^2 int phi'^2 and the weighted mass dominates
        const double num_a = sys.stiffness().quadratic_form(phi) + Agam * phi0sq;
        const double num_0 = cyl.stiffness().quadratic_form(phi) + Agam * phi0sq;
        REQUIRE(num_a >= num_0 - 1e-12);
        const double den_a = sys.mass().quadratic_form(phi) - A * phi0sq;
        const double den_0 = cyl.mass().quadratic_form(phi) - A * phi0sq;
        REQUIRE(den_a >= den_0 - 1e-12);
    }
}

TEST_CASE("compare_mu1: cylinder margin vanishes, bumps pay") {
    const PhysicalParams p = desk_params(0.5);
    const double a0 = 1.0, ell = 1.0;

    const auto self = compare_mu1(TaperProfile::constant(a0, ell), a0, p, 512);
    REQUIRE_THAT(self.margin, WithinAbs(0.0, 1e-13));

    const auto bump = compare_mu1(bump_profile(a0, ell, 0.5), a0, p, 512);
    REQUIRE(bump.margin > 0.0);

    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 15; ++trial) {
        const TaperProfile taper = random_taper(a0, 2.0, ell, 9, rng);
        if (taper.is_constant(1e-12)) continue;
        REQUIRE(compare_mu1(taper, a0, p, 512).margin > 0.0);
    }
}

TEST_CASE("grid convergence: second-order Richardson ratios for mu_1") {
    const PhysicalParams p = desk_params(0.5);

    const auto mu1_at = [&](const TaperProfile& taper, std::size_t cells) {
        return solve_spectrum(assemble(taper, p, cells), 1)[0].mu;
    };

    for (int which : {0, 1}) {
        const TaperProfile taper = which == 0 ? TaperProfile::constant(1.0, 1.0)
                                              : bump_profile(1.0, 1.0, 0.4);
        double v[4];
        for (int g = 0; g < 4; ++g) v[g] = mu1_at(taper, 128u << g);
        const double r1 = (v[0] - v[1]) / (v[1] - v[2]);
        const double r2 = (v[1] - v[2]) / (v[2] - v[3]);
        REQUIRE(r1 > 3.5);
        REQUIRE(r1 < 4.5);
        REQUIRE(r2 > 3.5);
        REQUIRE(r2 < 4.5);
    }
}
