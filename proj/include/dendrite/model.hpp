#pragma once

// Fiber geometry and electrical parameters: taper profiles a(x), the
// boundary-weighted inner product <.,.>_a, admissibility checks, and the
// change of variables y = int dx/a^2 that produces the reduced conductance
// weight rho(y) = a^3 sqrt(1 + a'^2).
//
// Units follow Rall's cable model: R_a in kOhm*cm, C_m in uF/cm^2,
// G_m and G_s in mS/cm^2, A_s in cm^2, lengths in cm.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dendrite {

/// Electrical constants of the fiber/soma system.
struct PhysicalParams {
    double R_a = 1.0;  ///< axial resistance
    double C_m = 1.0;  ///< membrane capacitance
    double G_m = 1.0;  ///< fiber membrane conductance
    double G_s = 1.0;  ///< soma membrane conductance
    double A_s = 2.0 * std::numbers::pi;  ///< soma surface area

    /// gamma = 2 R_a (G_m - G_s); non-negative by assumption (G_m >= G_s).
    double gamma() const { return 2.0 * R_a * (G_m - G_s); }

    /// Point mass A = A_s / (2 pi) carried by the soma end in <.,.>_a.
    double soma_weight() const { return A_s / (2.0 * std::numbers::pi); }

    void validate() const {
        if (!(R_a > 0.0 && C_m > 0.0 && G_m > 0.0 && G_s > 0.0 && A_s > 0.0))
            throw std::invalid_argument(
                "PhysicalParams: R_a, C_m, G_m, G_s, A_s must all be positive");
        if (G_m < G_s)
            throw std::invalid_argument(
                "PhysicalParams: gamma = 2 R_a (G_m - G_s) must be non-negative");
    }
};

/// A function sampled on a 1-d grid, interpreted piecewise-linearly.
struct GridFunction {
    std::vector<double> x;  ///< strictly increasing nodes
    std::vector<double> v;  ///< nodal values

    double front() const { return v.front(); }
    double back() const { return v.back(); }

    /// Linear interpolation; clamps to the end values outside the grid.
    double operator()(double xq) const {
        if (xq <= x.front()) return v.front();
        if (xq >= x.back()) return v.back();
        const auto it = std::upper_bound(x.begin(), x.end(), xq);
        const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
        const double t = (xq - x[i]) / (x[i + 1] - x[i]);
        return (1.0 - t) * v[i] + t * v[i + 1];
    }
};

/// Exact integral of a piecewise-linear grid function over [lo, hi].
inline double integrate(const GridFunction& f, double lo, double hi) {
    lo = std::max(lo, f.x.front());
    hi = std::min(hi, f.x.back());
    if (hi <= lo) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < f.x.size(); ++i) {
        const double a = std::max(lo, f.x[i]);
        const double b = std::min(hi, f.x[i + 1]);
        if (b <= a) continue;
        acc += 0.5 * (f(a) + f(b)) * (b - a);
    }
    return acc;
}

/// Piecewise-linear fiber radius a(x) on [0, ell]. Nodal radii are strictly
/// positive, so the interpolant is positive and Lipschitz; a' is constant on
/// each cell.
class TaperProfile {
  public:
    TaperProfile(std::vector<double> nodes, std::vector<double> radii)
        : x_(std::move(nodes)), a_(std::move(radii)) {
        if (x_.size() < 2 || x_.size() != a_.size())
            throw std::invalid_argument("TaperProfile: need n >= 2 nodes with matching radii");
        if (x_.front() != 0.0)
            throw std::invalid_argument("TaperProfile: grid must start at x = 0");
        for (std::size_t i = 0; i + 1 < x_.size(); ++i)
            if (!(x_[i + 1] > x_[i]))
                throw std::invalid_argument("TaperProfile: grid must be strictly increasing");
        for (double ai : a_)
            if (!(ai > 0.0) || !std::isfinite(ai))
                throw std::invalid_argument("TaperProfile: radii must be positive and finite");
    }

    static TaperProfile constant(double a0, double ell) {
        return TaperProfile({0.0, ell}, {a0, a0});
    }

    double ell() const { return x_.back(); }
    std::size_t cell_count() const { return x_.size() - 1; }
    const std::vector<double>& nodes() const { return x_; }
    const std::vector<double>& radii() const { return a_; }

    double slope(std::size_t cell) const {
        return (a_[cell + 1] - a_[cell]) / (x_[cell + 1] - x_[cell]);
    }

    /// Index of the cell containing x (last cell for x = ell).
    std::size_t cell_of(double x) const {
        const auto it = std::upper_bound(x_.begin(), x_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - x_.begin());
        return std::min(std::max<std::size_t>(i, 1) - 1, x_.size() - 2);
    }

    double radius(double x) const {
        const std::size_t c = cell_of(std::clamp(x, x_.front(), x_.back()));
        return a_[c] + slope(c) * (x - x_[c]);
    }

    double min_radius() const { return *std::min_element(a_.begin(), a_.end()); }

    bool is_constant(double tol = 0.0) const {
        const auto [lo, hi] = std::minmax_element(a_.begin(), a_.end());
        return *hi - *lo <= tol;
    }

  private:
    std::vector<double> x_;
    std::vector<double> a_;
};

/// int_0^ell a sqrt(1 + a'^2) dx, cell-exact (the integrand is linear per
/// cell). This is the un-scaled surface bound of the admissible class.
inline double surface_integral(const TaperProfile& a) {
    const auto& x = a.nodes();
    const auto& r = a.radii();
    double acc = 0.0;
    for (std::size_t c = 0; c + 1 < x.size(); ++c) {
        const double s = a.slope(c);
        acc += std::sqrt(1.0 + s * s) * 0.5 * (r[c] + r[c + 1]) * (x[c + 1] - x[c]);
    }
    return acc;
}

/// Lateral surface area 2 pi int a sqrt(1 + a'^2) dx.
inline double surface_area(const TaperProfile& a) {
    return 2.0 * std::numbers::pi * surface_integral(a);
}

struct AdmissibilityReport {
    bool admissible = false;
    bool floor_ok = false;    ///< a(x) >= a0 everywhere
    bool surface_ok = false;  ///< int a sqrt(1+a'^2) <= S
    double min_radius = 0.0;
    double surface = 0.0;  ///< the integral tested against S
};

/// Membership test for the admissible class {a >= a0, int a sqrt(1+a'^2) <= S}.
/// Rejects S <= a0 * ell: the class would be empty.
inline AdmissibilityReport is_admissible(const TaperProfile& a, double a0, double S,
                                         double tol = 1e-12) {
    if (!(a0 > 0.0)) throw std::invalid_argument("is_admissible: a0 must be positive");
    if (!(S > a0 * a.ell()))
        throw std::invalid_argument("is_admissible: need S > a0 * ell, class is empty");
    AdmissibilityReport rep;
    rep.min_radius = a.min_radius();
    rep.surface = surface_integral(a);
    rep.floor_ok = rep.min_radius >= a0 - tol;
    rep.surface_ok = rep.surface <= S + tol;
    rep.admissible = rep.floor_ok && rep.surface_ok;
    return rep;
}

/// <f,g>_a = A f(0) g(0) + int a sqrt(1+a'^2) f g dx, by composite trapezoid
/// on each f-grid cell subdivided `refine` times. f and g must share a grid.
inline double inner_product_a(const GridFunction& f, const GridFunction& g,
                              const TaperProfile& a, const PhysicalParams& params,
                              std::size_t refine = 4) {
    if (f.x.size() != g.x.size() || !std::equal(f.x.begin(), f.x.end(), g.x.begin()))
        throw std::invalid_argument("inner_product_a: f and g live on different grids");
    if (refine == 0) refine = 1;
    const auto& tx = a.nodes();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < f.x.size(); ++i) {
        // the weight a sqrt(1+a'^2) jumps at taper nodes: integrate per piece
        double lo = f.x[i];
        auto it = std::upper_bound(tx.begin(), tx.end(), lo);
        while (true) {
            const double hi = (it != tx.end() && *it < f.x[i + 1]) ? *it++ : f.x[i + 1];
            if (hi > lo) {
                const double s = a.slope(a.cell_of(0.5 * (lo + hi)));
                const double root = std::sqrt(1.0 + s * s);
                const double h = (hi - lo) / static_cast<double>(refine);
                double left = a.radius(lo) * root * f(lo) * g(lo);
                for (std::size_t r = 1; r <= refine; ++r) {
                    const double xr = lo + static_cast<double>(r) * h;
                    const double right = a.radius(xr) * root * f(xr) * g(xr);
                    acc += 0.5 * (left + right) * h;
                    left = right;
                }
            }
            if (hi >= f.x[i + 1]) break;
            lo = hi;
        }
    }
    return params.soma_weight() * f.v.front() * g.v.front() + acc;
}

/// Reduced conductance weight rho(y) on [0, ell1], piecewise constant on a
/// uniform cell grid. The admissible class asks rho >= a0^3, int rho <= S,
/// and optionally rho <= M.
struct RhoProfile {
    double ell1 = 0.0;
    std::vector<double> value;  ///< one value per cell

    std::size_t cell_count() const { return value.size(); }
    double cell_width() const { return ell1 / static_cast<double>(value.size()); }
    double cell_left(std::size_t c) const { return static_cast<double>(c) * cell_width(); }

    double integral() const {
        double sum = 0.0;
        for (double v : value) sum += v;
        return sum * cell_width();
    }

    double min_value() const { return *std::min_element(value.begin(), value.end()); }
    double max_value() const { return *std::max_element(value.begin(), value.end()); }

    bool in_class(double a0, double S, double tol = 1e-12) const {
        return min_value() >= a0 * a0 * a0 - tol && integral() <= S + tol;
    }
    bool in_bounded_class(double a0, double S, double M, double tol = 1e-12) const {
        return in_class(a0, S, tol) && max_value() <= M + tol;
    }
};

/// The substitution y = int_0^x dt/a^2(t). Per taper cell the map and its
/// inverse are closed-form: int dt/a^2 over a linear segment equals
/// dx / (a_left * a_right), and a(x(y)) = a_i / (1 - s a_i (y - y_i)).
/// Carries rho(y) = a^3(x(y)) sqrt(1+a'^2) exactly, plus exact integrals.
class ChangeOfVariable {
  public:
    explicit ChangeOfVariable(const TaperProfile& a) : taper_(a) {
        const auto& x = a.nodes();
        const auto& r = a.radii();
        y_.resize(x.size());
        y_[0] = 0.0;
        for (std::size_t c = 0; c + 1 < x.size(); ++c)
            y_[c + 1] = y_[c] + (x[c + 1] - x[c]) / (r[c] * r[c + 1]);
    }

    double ell1() const { return y_.back(); }
    const TaperProfile& taper() const { return taper_; }

    /// Images of the taper nodes; rho is smooth between consecutive entries.
    const std::vector<double>& breakpoints() const { return y_; }

    double y_of_x(double x) const {
        x = std::clamp(x, 0.0, taper_.ell());
        const std::size_t c = taper_.cell_of(x);
        const double a_left = taper_.radii()[c];
        return y_[c] + (x - taper_.nodes()[c]) / (a_left * taper_.radius(x));
    }

    double x_of_y(double y) const {
        y = std::clamp(y, 0.0, ell1());
        const std::size_t c = cell_of_y(y);
        const double a_left = taper_.radii()[c];
        const double s = taper_.slope(c);
        const double dy = y - y_[c];
        return taper_.nodes()[c] + dy * a_left * a_left / (1.0 - s * a_left * dy);
    }

    /// Radius transported to the y variable: a(x(y)).
    double radius_at_y(double y) const {
        y = std::clamp(y, 0.0, ell1());
        const std::size_t c = cell_of_y(y);
        const double a_left = taper_.radii()[c];
        const double s = taper_.slope(c);
        return a_left / (1.0 - s * a_left * (y - y_[c]));
    }

    /// rho(y) = a^3(x(y)) sqrt(1 + a'^2(x(y))).
    double rho(double y) const {
        const std::size_t c = cell_of_y(std::clamp(y, 0.0, ell1()));
        const double s = taper_.slope(c);
        const double a = radius_at_y(y);
        return a * a * a * std::sqrt(1.0 + s * s);
    }

    /// Exact int_{y0}^{y1} rho dy. By substitution this is the surface
    /// integral of the taper between x(y0) and x(y1).
    double rho_integral(double y0, double y1) const {
        y0 = std::clamp(y0, 0.0, ell1());
        y1 = std::clamp(y1, 0.0, ell1());
        if (y1 <= y0) return 0.0;
        double acc = 0.0;
        for (std::size_t c = 0; c + 1 < y_.size(); ++c) {
            const double lo = std::max(y0, y_[c]);
            const double hi = std::min(y1, y_[c + 1]);
            if (hi <= lo) continue;
            const double s = taper_.slope(c);
            const double xa = x_of_y(lo), xb = x_of_y(hi);
            acc += std::sqrt(1.0 + s * s) * 0.5 *
                   (taper_.radius(xa) + taper_.radius(xb)) * (xb - xa);
        }
        return acc;
    }

    /// Piecewise-constant resampling on a uniform y-grid. Cell values are the
    /// exact cell averages of rho, so the integral (and hence membership in
    /// the reduced class) is preserved exactly.
    RhoProfile resample(std::size_t n_cells) const {
        if (n_cells == 0) throw std::invalid_argument("resample: need n_cells >= 1");
        RhoProfile out;
        out.ell1 = ell1();
        out.value.resize(n_cells);
        const double dy = ell1() / static_cast<double>(n_cells);
        for (std::size_t c = 0; c < n_cells; ++c) {
            const double lo = static_cast<double>(c) * dy;
            const double hi = (c + 1 == n_cells) ? ell1() : lo + dy;
            out.value[c] = rho_integral(lo, hi) / (hi - lo);
        }
        return out;
    }

  private:
    std::size_t cell_of_y(double y) const {
        const auto it = std::upper_bound(y_.begin(), y_.end(), y);
        const std::size_t i = static_cast<std::size_t>(it - y_.begin());
        return std::min(std::max<std::size_t>(i, 1) - 1, y_.size() - 2);
    }

    TaperProfile taper_;
    std::vector<double> y_;
};

/// Spec'd entry point: ell1, the monotone map y(x), and rho(y), bundled.
inline ChangeOfVariable change_of_variable(const TaperProfile& a) {
    return ChangeOfVariable(a);
}

}  // namespace dendrite
