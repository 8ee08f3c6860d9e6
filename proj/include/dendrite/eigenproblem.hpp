#pragma once

// Discretization of the radius-weighted eigenproblem
//
//   -(a^2 phi')' = mu a sqrt(1+a'^2) phi,   phi'(ell) = 0,
//   (2pi/A_s) a^2(0) phi'(0) + (mu + gamma) phi(0) = 0,
//
// with the eigenvalue in the x=0 boundary condition. Conforming P1 elements
// turn it into the symmetric generalized problem K u = mu M u where the
// boundary condition contributes -A*gamma to K(0,0) and +A to M(0,0); the
// matrices are the discrete numerator/denominator of the Rayleigh quotient.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dendrite/linalg.hpp"
#include "dendrite/model.hpp"

namespace dendrite {

/// (mu_n, phi_n), normalized so ||phi_n||_a = 1 and phi_n(0) >= 0.
struct EigenPair {
    double mu = 0.0;
    GridFunction phi;
    std::size_t index = 0;  ///< 1-based, mu_1 is the smallest
};

class AssembledSystem {
  public:
    AssembledSystem(linalg::SymTridiagonal K, linalg::SymTridiagonal M,
                    std::vector<double> nodes)
        : K_(std::move(K)), M_(std::move(M)), x_(std::move(nodes)) {}

    const linalg::SymTridiagonal& stiffness() const { return K_; }
    const linalg::SymTridiagonal& mass() const { return M_; }
    const std::vector<double>& nodes() const { return x_; }
    std::size_t size() const { return x_.size(); }

    /// Discrete Rayleigh quotient (v'Kv)/(v'Mv); the denominator is positive
    /// for any nonzero v since M is positive definite.
    double rayleigh(const std::vector<double>& v) const {
        if (v.size() != size())
            throw std::invalid_argument("rayleigh: vector does not match the grid");
        const double den = M_.quadratic_form(v);
        if (den == 0.0) throw std::invalid_argument("rayleigh: zero vector");
        return K_.quadratic_form(v) / den;
    }

    double mass_norm(const std::vector<double>& v) const {
        return std::sqrt(M_.quadratic_form(v));
    }

  private:
    linalg::SymTridiagonal K_, M_;
    std::vector<double> x_;
};

/// P1 assembly on a uniform grid of n_cells over [0, taper.ell()]. Element
/// integrals split at taper nodes and use 2-point Gauss, which is exact for
/// the piecewise-polynomial integrands (a^2 phi' psi' and a sqrt(1+a'^2)
/// phi psi with a linear per piece).
inline AssembledSystem assemble(const TaperProfile& a, const PhysicalParams& params,
                                std::size_t n_cells) {
    if (n_cells < 8) throw std::invalid_argument("assemble: need n_cells >= 8");
    params.validate();
    if (!(a.min_radius() > 0.0))
        throw std::invalid_argument("assemble: degenerate profile, non-positive radius");

    const double ell = a.ell();
    const double h = ell / static_cast<double>(n_cells);
    const std::size_t n = n_cells + 1;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std::min(static_cast<double>(i) * h, ell);

    linalg::SymTridiagonal K, M;
    K.diag.assign(n, 0.0);
    K.sub.assign(n - 1, 0.0);
    M.diag.assign(n, 0.0);
    M.sub.assign(n - 1, 0.0);

    static constexpr double kGauss = 0.57735026918962576;  // 1/sqrt(3)
    const auto& tx = a.nodes();

    for (std::size_t c = 0; c < n_cells; ++c) {
        const double xl = x[c], xr = x[c + 1];
        // sub-interval endpoints: cell ends plus any taper nodes inside
        double lo = xl;
        auto it = std::upper_bound(tx.begin(), tx.end(), xl);
        while (true) {
            const double hi = (it != tx.end() && *it < xr) ? *it++ : xr;
            const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
            if (half > 0.0) {
                const double s = a.slope(a.cell_of(mid));
                const double wlat = std::sqrt(1.0 + s * s);
                for (const double g : {mid - kGauss * half, mid + kGauss * half}) {
                    const double w = half;  // Gauss-2 weights are both 1
                    const double av = a.radius(g);
                    const double pl = (xr - g) / h, pr = (g - xl) / h;
                    const double kf = w * av * av / (h * h);
                    K.diag[c] += kf;
                    K.diag[c + 1] += kf;
                    K.sub[c] -= kf;
                    const double mf = w * av * wlat;
                    M.diag[c] += mf * pl * pl;
                    M.diag[c + 1] += mf * pr * pr;
                    M.sub[c] += mf * pl * pr;
                }
            }
            if (hi >= xr) break;
            lo = hi;
        }
    }

    K.diag[0] -= params.soma_weight() * params.gamma();
    M.diag[0] += params.soma_weight();
    return AssembledSystem(std::move(K), std::move(M), std::move(x));
}

namespace detail {

inline void mass_normalize(const linalg::SymTridiagonal& M, std::vector<double>& v) {
    std::vector<double> Mv;
    M.apply(v, Mv);
    double nrm = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) nrm += v[i] * Mv[i];
    nrm = std::sqrt(nrm);
    for (double& vi : v) vi /= nrm;
}

}  // namespace detail

/// The k smallest eigenpairs of K u = mu M u, in increasing order of mu.
/// Eigenvalues come from LAPACK's banded bisection; each eigenvector from
/// shifted inverse iteration on the tridiagonal pencil, polished with a
/// Rayleigh quotient. Throws with the residual norms on non-convergence.
inline std::vector<EigenPair> solve_spectrum(const AssembledSystem& sys, std::size_t k,
                                             double residual_tol = 1e-8) {
    const std::size_t n = sys.size();
    if (k == 0 || k > n)
        throw std::invalid_argument("solve_spectrum: need 1 <= k <= matrix dimension");
    const auto& K = sys.stiffness();
    const auto& M = sys.mass();
    const std::vector<double> mus = linalg::smallest_eigenvalues(K, M, k);

    std::vector<EigenPair> pairs(k);
    std::vector<double> Mv, Kv, prev;
    double prev_mu = 0.0;
    std::mt19937_64 rng(0x9e3779b97f4a7c15ull);  // fixed: results are deterministic
    std::normal_distribution<double> gauss;

    for (std::size_t j = 0; j < k; ++j) {
        const double scale = std::max(1.0, std::fabs(mus[j]));
        const linalg::ShiftedPencilFactor lu(K, M, mus[j] - 1e-12 * scale);

        std::vector<double> v(n);
        for (double& vi : v) vi = gauss(rng);
        double mu = mus[j];
        double rel_res = std::numeric_limits<double>::infinity();
        for (int iter = 0; iter < 8 && rel_res > 0.1 * residual_tol; ++iter) {
            M.apply(v, Mv);
            lu.solve_in_place(Mv);
            v = Mv;
            // near-degenerate neighbor: keep the M-orthogonality explicit
            if (j > 0 && std::fabs(mus[j] - prev_mu) < 1e-8 * scale) {
                M.apply(prev, Mv);
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += v[i] * Mv[i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= dot * prev[i];
            }
            detail::mass_normalize(M, v);
            M.apply(v, Mv);
            K.apply(v, Kv);
            double num = 0.0;
            for (std::size_t i = 0; i < n; ++i) num += v[i] * Kv[i];
            mu = num;  // v is M-normalized, so the Rayleigh quotient is v'Kv
            double rn = 0.0, mn = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = Kv[i] - mu * Mv[i];
                rn += r * r;
                mn += Mv[i] * Mv[i];
            }
            rel_res = std::sqrt(rn / mn);
        }
        if (rel_res > residual_tol) {
            std::ostringstream msg;
            msg << "solve_spectrum: inverse iteration did not converge for mode "
                << (j + 1) << ": residual " << rel_res << " > " << residual_tol;
            throw std::runtime_error(msg.str());
        }
        if (v[0] < 0.0 || (v[0] == 0.0 && v[n - 1] < 0.0))
            for (double& vi : v) vi = -vi;
        pairs[j].mu = mu;
        pairs[j].phi = GridFunction{sys.nodes(), v};
        pairs[j].index = j + 1;
        prev = std::move(v);
        prev_mu = mu;
    }
    return pairs;
}

/// Rayleigh quotient of a nodal test function against a freshly assembled
/// system; always >= mu_1 by the variational principle.
inline double rayleigh(const TaperProfile& a, const PhysicalParams& params,
                       const std::vector<double>& v, std::size_t n_cells) {
    return assemble(a, params, n_cells).rayleigh(v);
}

struct Mu1Comparison {
    double mu1 = 0.0;           ///< first eigenvalue of the tested profile
    double mu1_cylinder = 0.0;  ///< first eigenvalue of a == a0
    double margin = 0.0;        ///< mu1 - mu1_cylinder; positive off the cylinder
};

/// mu_1(a) against mu_1(a0): the margin is strictly positive whenever a is
/// not the constant profile.
inline Mu1Comparison compare_mu1(const TaperProfile& a, double a0,
                                 const PhysicalParams& params, std::size_t n_cells) {
    Mu1Comparison cmp;
    cmp.mu1 = solve_spectrum(assemble(a, params, n_cells), 1)[0].mu;
    const TaperProfile cyl = TaperProfile::constant(a0, a.ell());
    cmp.mu1_cylinder = solve_spectrum(assemble(cyl, params, n_cells), 1)[0].mu;
    cmp.margin = cmp.mu1 - cmp.mu1_cylinder;
    return cmp;
}

}  // namespace dendrite
