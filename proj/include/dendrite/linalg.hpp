#pragma once

// LAPACK-backed linear algebra for the symmetric tridiagonal systems produced
// by the 1-d piecewise-linear discretizations: SPD solves (dpttrf/dpttrs),
// banded generalized eigenvalues (dsbgvx), and LU solves on shifted pencils
// (dgttrf/dgttrs) for eigenvector inverse iteration.

#include <lapacke.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dendrite::linalg {

/// Symmetric tridiagonal matrix: diag has n entries, sub has n-1.
struct SymTridiagonal {
    std::vector<double> diag;
    std::vector<double> sub;

    std::size_t size() const { return diag.size(); }

    void apply(const std::vector<double>& x, std::vector<double>& y) const {
        const std::size_t n = size();
        y.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = diag[i] * x[i];
            if (i > 0) acc += sub[i - 1] * x[i - 1];
            if (i + 1 < n) acc += sub[i] * x[i + 1];
            y[i] = acc;
        }
    }

    double quadratic_form(const std::vector<double>& x) const {
        const std::size_t n = size();
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += diag[i] * x[i] * x[i];
        for (std::size_t i = 0; i + 1 < n; ++i) acc += 2.0 * sub[i] * x[i] * x[i + 1];
        return acc;
    }
};

/// Cholesky-style factorization of an SPD tridiagonal; solves share it.
class SpdTridiagonalFactor {
  public:
    explicit SpdTridiagonalFactor(const SymTridiagonal& m) : d_(m.diag), e_(m.sub) {
        const lapack_int n = static_cast<lapack_int>(d_.size());
        const lapack_int info = LAPACKE_dpttrf(n, d_.data(), e_.data());
        if (info != 0)
            throw std::runtime_error("SpdTridiagonalFactor: dpttrf failed, info=" +
                                     std::to_string(info));
    }

    std::vector<double> solve(std::vector<double> rhs) const {
        const lapack_int n = static_cast<lapack_int>(d_.size());
        const lapack_int info = LAPACKE_dpttrs(LAPACK_COL_MAJOR, n, 1, d_.data(),
                                               e_.data(), rhs.data(), n);
        if (info != 0)
            throw std::runtime_error("SpdTridiagonalFactor: dpttrs failed, info=" +
                                     std::to_string(info));
        return rhs;
    }

  private:
    std::vector<double> d_, e_;
};

/// Smallest k eigenvalues of the pencil K u = mu M u (both symmetric
/// tridiagonal, M positive definite), via LAPACK's banded reduction and
/// bisection. Eigenvectors are not computed here; see inverse_iterate.
inline std::vector<double> smallest_eigenvalues(const SymTridiagonal& K,
                                                const SymTridiagonal& M,
                                                std::size_t k) {
    const std::size_t n = K.size();
    if (k == 0 || k > n)
        throw std::invalid_argument("smallest_eigenvalues: need 1 <= k <= n");
    std::vector<double> ab(2 * n, 0.0), bb(2 * n, 0.0), w(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        ab[2 * j] = K.diag[j];
        bb[2 * j] = M.diag[j];
        if (j + 1 < n) {
            ab[2 * j + 1] = K.sub[j];
            bb[2 * j + 1] = M.sub[j];
        }
    }
    lapack_int found = 0;
    std::vector<lapack_int> ifail(n, 0);
    const lapack_int info = LAPACKE_dsbgvx(
        LAPACK_COL_MAJOR, 'N', 'I', 'L', static_cast<lapack_int>(n), 1, 1, ab.data(), 2,
        bb.data(), 2, nullptr, static_cast<lapack_int>(n), 0.0, 0.0, 1,
        static_cast<lapack_int>(k), 2.0 * 2.2250738585072014e-308, &found, w.data(),
        nullptr, static_cast<lapack_int>(n), ifail.data());
    if (info != 0 || static_cast<std::size_t>(found) < k)
        throw std::runtime_error("smallest_eigenvalues: dsbgvx failed, info=" +
                                 std::to_string(info) + ", found=" + std::to_string(found));
    w.resize(k);
    return w;
}

/// LU factorization of the shifted pencil K - sigma * M (general tridiagonal,
/// partial pivoting), used for inverse iteration near sigma.
class ShiftedPencilFactor {
  public:
    ShiftedPencilFactor(const SymTridiagonal& K, const SymTridiagonal& M, double sigma) {
        const std::size_t n = K.size();
        d_.resize(n);
        dl_.resize(n - 1);
        du_.resize(n - 1);
        du2_.resize(n >= 2 ? n - 2 : 0);
        ipiv_.resize(n);
        for (std::size_t i = 0; i < n; ++i) d_[i] = K.diag[i] - sigma * M.diag[i];
        for (std::size_t i = 0; i + 1 < n; ++i) {
            dl_[i] = K.sub[i] - sigma * M.sub[i];
            du_[i] = dl_[i];
        }
        const lapack_int info =
            LAPACKE_dgttrf(static_cast<lapack_int>(n), dl_.data(), d_.data(), du_.data(),
                           du2_.data(), ipiv_.data());
        // info > 0 flags an exactly singular pivot; for inverse iteration a
        // near-singular factorization is still usable, so only reject < 0.
        if (info < 0)
            throw std::runtime_error("ShiftedPencilFactor: dgttrf failed, info=" +
                                     std::to_string(info));
    }

    void solve_in_place(std::vector<double>& rhs) const {
        const lapack_int n = static_cast<lapack_int>(d_.size());
        const lapack_int info =
            LAPACKE_dgttrs(LAPACK_COL_MAJOR, 'N', n, 1, dl_.data(), d_.data(), du_.data(),
                           du2_.data(), ipiv_.data(), rhs.data(), n);
        if (info != 0)
            throw std::runtime_error("ShiftedPencilFactor: dgttrs failed, info=" +
                                     std::to_string(info));
    }

  private:
    std::vector<double> dl_, d_, du_, du2_;
    std::vector<lapack_int> ipiv_;
};

}  // namespace dendrite::linalg
