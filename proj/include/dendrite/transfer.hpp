#pragma once

// The reduced (Laplace-route) machinery on [0, ell1]:
//
//   (1/2R_a) w0'' = rho G_m w0,  (pi/R_a) w0'(0) = A_s G_s w0(0) - 1,  w0'(ell1) = 0,
//
// the criterion T1(rho) = w0(0)/w0(ell1), the adjoint states q1/q2 with the
// gradient density w0*f, the two-level closed forms in the transition point
// xi1, and the p->0 family w_p.
//
// Variationally the boundary condition contributes A*G_s*w(0)*z(0) on the
// left and z(0)/(2pi) on the right (A = A_s/2pi), as integration by parts of
// the strong form gives directly.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dendrite/linalg.hpp"
#include "dendrite/model.hpp"

namespace dendrite {

/// omega = sqrt(2 R_a G_m level): the cosh/sinh rate of a constant-rho cable.
inline double omega_of_level(double level, const PhysicalParams& params) {
    return std::sqrt(2.0 * params.R_a * params.G_m * level);
}

/// A coefficient on [0, ell1] that is smooth between interior breakpoints.
/// Element integrals split at the breakpoints, so step profiles and the
/// rational pullback of a taper are both integrated accurately.
struct Coefficient {
    double ell1 = 0.0;
    std::vector<double> breaks;  ///< sorted interior breakpoints (may be empty)
    std::function<double(double)> value;

    static Coefficient constant(double level, double ell1) {
        return {ell1, {}, [level](double) { return level; }};
    }

    static Coefficient from(const RhoProfile& rho) {
        Coefficient c;
        c.ell1 = rho.ell1;
        const double dy = rho.cell_width();
        c.breaks.resize(rho.cell_count() - 1);
        for (std::size_t i = 0; i + 1 < rho.cell_count(); ++i)
            c.breaks[i] = static_cast<double>(i + 1) * dy;
        c.value = [rho](double y) {
            auto i = static_cast<std::size_t>(y / rho.cell_width());
            return rho.value[std::min(i, rho.cell_count() - 1)];
        };
        return c;
    }

    static Coefficient from(const ChangeOfVariable& cov) {
        Coefficient c;
        c.ell1 = cov.ell1();
        c.breaks.assign(cov.breakpoints().begin() + 1, cov.breakpoints().end() - 1);
        c.value = [cov](double y) { return cov.rho(y); };
        return c;
    }

    /// Step profile: hi on [0, xi1), lo on (xi1, ell1].
    static Coefficient step(double hi, double lo, double xi1, double ell1) {
        Coefficient c{ell1, {}, [hi, lo, xi1](double y) { return y < xi1 ? hi : lo; }};
        if (xi1 > 0.0 && xi1 < ell1) c.breaks = {xi1};
        return c;
    }
};

namespace detail {

// 3-point Gauss-Legendre on [-1,1]; exact through degree 5.
inline constexpr double kG3x[3] = {-0.77459666924148338, 0.0, 0.77459666924148338};
inline constexpr double kG3w[3] = {0.55555555555555556, 0.88888888888888889,
                                   0.55555555555555556};

/// Integrate f over [lo, hi] split at the coefficient's breakpoints.
template <typename F>
double gauss_split(const Coefficient& rho, double lo, double hi, F&& f) {
    double acc = 0.0;
    auto it = std::upper_bound(rho.breaks.begin(), rho.breaks.end(), lo);
    double a = lo;
    while (true) {
        const double b = (it != rho.breaks.end() && *it < hi) ? *it++ : hi;
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        if (half > 0.0)
            for (int g = 0; g < 3; ++g)
                acc += half * kG3w[g] * f(mid + half * kG3x[g]);
        if (b >= hi) break;
        a = b;
    }
    return acc;
}

}  // namespace detail

/// Assembled reduced BVP on a uniform y-grid:
///   (1/2R_a) int w'z' + react * int rho w z + bweight * w(0)z(0) = rhs(z).
/// All four states (w0, q1, q2, w_p) share this form; only react, bweight
/// and the right-hand side vary.
class ReducedSystem {
  public:
    ReducedSystem(const Coefficient& rho, const PhysicalParams& params,
                  std::size_t n_cells, double react, double bweight)
        : rho_(rho), params_(params) {
        if (n_cells < 8) throw std::invalid_argument("ReducedSystem: need n_cells >= 8");
        if (!(rho.ell1 > 0.0)) throw std::invalid_argument("ReducedSystem: ell1 <= 0");
        const std::size_t n = n_cells + 1;
        const double h = rho.ell1 / static_cast<double>(n_cells);
        y_.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            y_[i] = std::min(static_cast<double>(i) * h, rho.ell1);
        mat_.diag.assign(n, 0.0);
        mat_.sub.assign(n - 1, 0.0);
        const double kstiff = 1.0 / (2.0 * params.R_a);
        for (std::size_t c = 0; c < n_cells; ++c) {
            const double yl = y_[c], yr = y_[c + 1];
            mat_.diag[c] += kstiff / h;
            mat_.diag[c + 1] += kstiff / h;
            mat_.sub[c] -= kstiff / h;
            const auto& rv = rho_.value;
            mat_.diag[c] += react * detail::gauss_split(rho_, yl, yr, [&](double y) {
                const double p = (yr - y) / h;
                return rv(y) * p * p;
            });
            mat_.diag[c + 1] += react * detail::gauss_split(rho_, yl, yr, [&](double y) {
                const double p = (y - yl) / h;
                return rv(y) * p * p;
            });
            mat_.sub[c] += react * detail::gauss_split(rho_, yl, yr, [&](double y) {
                return rv(y) * (yr - y) * (y - yl) / (h * h);
            });
        }
        mat_.diag[0] += bweight;
        factor_.emplace(mat_);
    }

    const std::vector<double>& nodes() const { return y_; }
    const linalg::SymTridiagonal& matrix() const { return mat_; }

    /// Energy a(v,v) of a nodal vector; used for the coercivity check.
    double energy(const std::vector<double>& v) const { return mat_.quadratic_form(v); }

    /// Solve with point load rhs0 * z(0).
    GridFunction solve_point_load(double rhs0) const {
        std::vector<double> b(y_.size(), 0.0);
        b[0] = rhs0;
        return GridFunction{y_, factor_->solve(std::move(b))};
    }

    /// Solve with rhs(z) = scale * int rho * source(y) * z dy.
    GridFunction solve_weighted_load(double scale,
                                     const std::function<double(double)>& source) const {
        const std::size_t n = y_.size();
        std::vector<double> b(n, 0.0);
        const double h = y_[1] - y_[0];
        for (std::size_t c = 0; c + 1 < n; ++c) {
            const double yl = y_[c], yr = y_[c + 1];
            b[c] += scale * detail::gauss_split(rho_, yl, yr, [&](double y) {
                return rho_.value(y) * source(y) * (yr - y) / h;
            });
            b[c + 1] += scale * detail::gauss_split(rho_, yl, yr, [&](double y) {
                return rho_.value(y) * source(y) * (y - yl) / h;
            });
        }
        return GridFunction{y_, factor_->solve(std::move(b))};
    }

  private:
    Coefficient rho_;
    PhysicalParams params_;
    std::vector<double> y_;
    linalg::SymTridiagonal mat_;
    std::optional<linalg::SpdTridiagonalFactor> factor_;
};

/// Steady state w0: the p->0 Laplace transform of the potential.
inline GridFunction solve_w0(const Coefficient& rho, const PhysicalParams& params,
                             std::size_t n_cells) {
    const ReducedSystem sys(rho, params, n_cells, params.G_m,
                            params.soma_weight() * params.G_s);
    return sys.solve_point_load(1.0 / (2.0 * std::numbers::pi));
}

inline GridFunction solve_w0(const RhoProfile& rho, const PhysicalParams& params,
                             std::size_t n_cells) {
    return solve_w0(Coefficient::from(rho), params, n_cells);
}

/// w_p for p >= 0; the reaction picks up C_m p and the boundary weight
/// becomes A (C_m p + G_s). p = 0 coincides with solve_w0.
inline GridFunction solve_wp(const Coefficient& rho, const PhysicalParams& params,
                             std::size_t n_cells, double p) {
    if (p < 0.0) throw std::invalid_argument("solve_wp: need p >= 0");
    const ReducedSystem sys(rho, params, n_cells, params.C_m * p + params.G_m,
                            params.soma_weight() * (params.C_m * p + params.G_s));
    return sys.solve_point_load(1.0 / (2.0 * std::numbers::pi));
}

inline GridFunction solve_wp(const RhoProfile& rho, const PhysicalParams& params,
                             std::size_t n_cells, double p) {
    return solve_wp(Coefficient::from(rho), params, n_cells, p);
}

/// Adjoint states: q1 with source y, q2 with source 1, both with the w0
/// operator and no point load.
inline std::pair<GridFunction, GridFunction> solve_adjoints(const Coefficient& rho,
                                                            const PhysicalParams& params,
                                                            std::size_t n_cells) {
    const ReducedSystem sys(rho, params, n_cells, params.G_m,
                            params.soma_weight() * params.G_s);
    GridFunction q1 = sys.solve_weighted_load(params.G_m, [](double y) { return y; });
    GridFunction q2 = sys.solve_weighted_load(params.G_m, [](double) { return 1.0; });
    return {std::move(q1), std::move(q2)};
}

inline std::pair<GridFunction, GridFunction> solve_adjoints(const RhoProfile& rho,
                                                            const PhysicalParams& params,
                                                            std::size_t n_cells) {
    return solve_adjoints(Coefficient::from(rho), params, n_cells);
}

/// T1(rho) = w0(0) / w0(ell1); always exceeds one for valid inputs.
inline double transfer_T1(const Coefficient& rho, const PhysicalParams& params,
                          std::size_t n_cells) {
    const GridFunction w0 = solve_w0(rho, params, n_cells);
    return w0.front() / w0.back();
}

inline double transfer_T1(const RhoProfile& rho, const PhysicalParams& params,
                          std::size_t n_cells) {
    return transfer_T1(Coefficient::from(rho), params, n_cells);
}

/// w0, the adjoints, and the gradient factor f on one shared grid, with
///   f = (2 R_a G_m / w0(ell1)^2) [ (w0(ell1)-w0(0))/Atilde (q2-1) - w0(0)(q1-y) ],
///   Atilde = 2 A G_s R_a,
/// so that <dT1/drho, h> = int h w0 f dy.
struct SteadyState {
    GridFunction w0, q1, q2;
    GridFunction f;        ///< gradient factor
    GridFunction g;        ///< (q1 - y)/(q2 - 1), increasing in y
    GridFunction density;  ///< w0 * f, the gradient density
    double Atilde = 0.0;

    double T1() const { return w0.front() / w0.back(); }

    /// Directional derivative against a cellwise-constant perturbation h on
    /// the grid of `cells` (exact: density is piecewise linear per cell).
    double directional_derivative(const RhoProfile& h) const {
        double acc = 0.0;
        for (std::size_t c = 0; c < h.cell_count(); ++c) {
            const double lo = h.cell_left(c);
            const double hi = lo + h.cell_width();
            acc += h.value[c] * integrate(density, lo, hi);
        }
        return acc;
    }
};

inline SteadyState compute_steady_state(const Coefficient& rho,
                                        const PhysicalParams& params,
                                        std::size_t n_cells) {
    const ReducedSystem sys(rho, params, n_cells, params.G_m,
                            params.soma_weight() * params.G_s);
    SteadyState st;
    st.w0 = sys.solve_point_load(1.0 / (2.0 * std::numbers::pi));
    st.q1 = sys.solve_weighted_load(params.G_m, [](double y) { return y; });
    st.q2 = sys.solve_weighted_load(params.G_m, [](double) { return 1.0; });
    st.Atilde = 2.0 * params.soma_weight() * params.G_s * params.R_a;

    const auto& y = st.w0.x;
    const double w_end = st.w0.back(), w_0 = st.w0.front();
    const double pref = 2.0 * params.R_a * params.G_m / (w_end * w_end);
    st.f.x = y;
    st.g.x = y;
    st.density.x = y;
    st.f.v.resize(y.size());
    st.g.v.resize(y.size());
    st.density.v.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dq2 = st.q2.v[i] - 1.0;
        const double dq1 = st.q1.v[i] - y[i];
        st.f.v[i] = pref * ((w_end - w_0) / st.Atilde * dq2 - w_0 * dq1);
        st.g.v[i] = dq1 / dq2;
        st.density.v[i] = st.w0.v[i] * st.f.v[i];
    }
    return st;
}

inline SteadyState compute_steady_state(const RhoProfile& rho,
                                        const PhysicalParams& params,
                                        std::size_t n_cells) {
    return compute_steady_state(Coefficient::from(rho), params, n_cells);
}

/// Gradient density y -> w0(y) f(y) alone.
inline GridFunction gradient_T1(const RhoProfile& rho, const PhysicalParams& params,
                                std::size_t n_cells) {
    return compute_steady_state(rho, params, n_cells).density;
}

/// Two-level profile rho = M on [0, xi1), a0^3 on (xi1, ell1].
struct BangBangProfile {
    double xi1 = 0.0;
    double level_M = 0.0;  ///< upper level
    double base = 0.0;     ///< a0^3
    double ell1 = 0.0;
    double omega0 = 0.0;  ///< sqrt(2 R_a G_m base)
    double omegaM = 0.0;  ///< sqrt(2 R_a G_m level_M)

    BangBangProfile(double xi1_, double M, double a0, double ell1_,
                    const PhysicalParams& params)
        : xi1(xi1_), level_M(M), base(a0 * a0 * a0), ell1(ell1_) {
        if (!(xi1 >= 0.0 && xi1 <= ell1))
            throw std::invalid_argument("BangBangProfile: need 0 <= xi1 <= ell1");
        if (!(level_M > base))
            throw std::invalid_argument("BangBangProfile: need M > a0^3");
        omega0 = omega_of_level(base, params);
        omegaM = omega_of_level(level_M, params);
    }

    Coefficient coefficient() const {
        return Coefficient::step(level_M, base, xi1, ell1);
    }
};

/// Closed-form T1 of the two-level profile, from the C^1 matching of the
/// cosh/sinh branches at xi1.
inline double bang_bang_T1(const BangBangProfile& bb) {
    const double c0l = std::cosh(bb.omega0 * bb.ell1), s0l = std::sinh(bb.omega0 * bb.ell1);
    const double c0 = std::cosh(bb.omega0 * bb.xi1), s0 = std::sinh(bb.omega0 * bb.xi1);
    const double cM = std::cosh(bb.omegaM * bb.xi1), sM = std::sinh(bb.omegaM * bb.xi1);
    const double r = bb.omega0 / bb.omegaM;
    return c0l * (c0 * cM - r * sM * s0) - s0l * (s0 * cM - r * sM * c0);
}

/// d T1 / d xi1 = ((omegaM^2 - omega0^2)/omegaM) sinh(omegaM xi1)
///                 cosh(omega0 (ell1 - xi1)); non-negative, zero only at xi1=0.
inline double bang_bang_dT1(const BangBangProfile& bb) {
    return (bb.omegaM * bb.omegaM - bb.omega0 * bb.omega0) / bb.omegaM *
           std::sinh(bb.omegaM * bb.xi1) * std::cosh(bb.omega0 * (bb.ell1 - bb.xi1));
}

/// Discrete H1 norm of a piecewise-linear grid function (exact integrals).
inline double h1_norm(const GridFunction& u) {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < u.x.size(); ++i) {
        const double h = u.x[i + 1] - u.x[i];
        const double du = u.v[i + 1] - u.v[i];
        acc += du * du / h;
        acc += h * (u.v[i] * u.v[i] + u.v[i] * u.v[i + 1] + u.v[i + 1] * u.v[i + 1]) / 3.0;
    }
    return std::sqrt(acc);
}

inline GridFunction difference(const GridFunction& u, const GridFunction& w) {
    if (u.x.size() != w.x.size())
        throw std::invalid_argument("difference: grids do not match");
    GridFunction d{u.x, u.v};
    for (std::size_t i = 0; i < d.v.size(); ++i) d.v[i] -= w.v[i];
    return d;
}

}  // namespace dendrite
