#pragma once

// Constrained searches over the admissible classes: projected gradient with
// Armijo backtracking (with a derivative-free simplex fallback for mu_1),
// plus the cross-module pullback check T(a0) = T1(a0^3).
//
// Both searches converge to the constant profile, which sits on the floor
// constraint; the projections clip exactly, so converged iterates match the
// cylinder bitwise on the clipped nodes.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "dendrite/eigenproblem.hpp"
#include "dendrite/model.hpp"
#include "dendrite/transfer.hpp"
#include "dendrite/transient.hpp"

namespace dendrite {

struct SearchConfig {
    std::size_t max_iterations = 500;
    double value_tol = 1e-10;  ///< stop on relative value change below this
    std::size_t taper_nodes = 17;
    std::size_t fem_cells = 512;   ///< x-grid used inside the mu_1 search
    std::size_t y_cells = 2048;    ///< y-grid used inside the T1 search
    std::uint64_t seed = 1;
    double armijo_c = 1e-4;
    bool use_simplex = false;  ///< derivative-free fallback for mu_1
};

struct OptimizationReport {
    std::string criterion;  ///< "mu1" or "T"
    double best_value = 0.0;
    double cylinder_value = 0.0;
    std::vector<double> history;  ///< accepted value per iteration
    std::size_t iterations = 0;
    bool converged = false;
    double floor_active_fraction = 0.0;  ///< nodes/cells sitting on the floor
    bool surface_active = false;         ///< integral bound tight at the end
    std::vector<double> interior_fraction_history;  ///< T search: cells strictly
                                                    ///< between the box bounds
    std::optional<TaperProfile> best_taper;
    std::optional<RhoProfile> best_rho;
};

/// Clip to the floor, then shrink the excess above a0 until the surface
/// bound holds (the surface integral is monotone in the shrink factor).
inline TaperProfile project_to_taper_class(const TaperProfile& a, double a0, double S) {
    std::vector<double> r = a.radii();
    for (double& ri : r) ri = std::max(ri, a0);
    TaperProfile clipped(a.nodes(), r);
    if (surface_integral(clipped) <= S) return clipped;
    double lo = 0.0, hi = 1.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-16; ++iter) {
        const double th = 0.5 * (lo + hi);
        std::vector<double> rt(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) rt[i] = a0 + th * (r[i] - a0);
        (surface_integral(TaperProfile(a.nodes(), rt)) <= S ? lo : hi) = th;
    }
    for (double& ri : r) ri = a0 + lo * (ri - a0);
    return TaperProfile(a.nodes(), r);
}

/// Box clip to [a0^3, M], then rescale the excess above the floor so the
/// integral bound holds exactly (linear in the excess).
inline RhoProfile project_to_rho_class(RhoProfile rho, double a0, double S, double M) {
    const double base = a0 * a0 * a0;
    for (double& v : rho.value) v = std::clamp(v, base, M);
    const double total = rho.integral();
    const double floor_total = base * rho.ell1;
    if (total > S) {
        const double th = (S - floor_total) / (total - floor_total);
        for (double& v : rho.value) v = base + th * (v - base);
    }
    return rho;
}

/// Random member of the taper class: jittered nodal radii, smoothed once,
/// then projected. Deterministic for a fixed engine state.
inline TaperProfile random_taper(double a0, double S, double ell, std::size_t n_nodes,
                                 std::mt19937_64& rng) {
    if (n_nodes < 3) throw std::invalid_argument("random_taper: need n_nodes >= 3");
    std::uniform_real_distribution<double> u(0.0, 0.8);
    std::vector<double> x(n_nodes), r(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
        x[i] = ell * static_cast<double>(i) / static_cast<double>(n_nodes - 1);
        r[i] = a0 * (1.0 + u(rng));
    }
    std::vector<double> sm = r;
    for (std::size_t i = 1; i + 1 < n_nodes; ++i)
        sm[i] = 0.25 * r[i - 1] + 0.5 * r[i] + 0.25 * r[i + 1];
    return project_to_taper_class(TaperProfile(x, sm), a0, S);
}

/// Random member of the bounded reduced class.
inline RhoProfile random_rho(double a0, double S, double M, double ell1,
                             std::size_t n_cells, std::mt19937_64& rng) {
    const double base = a0 * a0 * a0;
    std::uniform_real_distribution<double> u(base, M);
    RhoProfile rho;
    rho.ell1 = ell1;
    rho.value.resize(n_cells);
    for (double& v : rho.value) v = u(rng);
    return project_to_rho_class(std::move(rho), a0, S, M);
}

namespace detail {

/// Nodal derivative of the discrete mu_1 with respect to the taper radii,
/// from stationarity of the Rayleigh quotient at the M-normalized phi_1:
///   d mu_1[da] = int 2 a da phi'^2
///              - mu_1 int (da sqrt(1+a'^2) + a a' da' / sqrt(1+a'^2)) phi^2.
/// Exact for the discretized quotient (2-point Gauss on the grid union).
inline std::vector<double> mu1_nodal_gradient(const TaperProfile& a, double mu1,
                                              const GridFunction& phi) {
    const auto& tx = a.nodes();
    const auto& fx = phi.x;
    std::vector<double> grad(tx.size(), 0.0);
    static constexpr double kGauss = 0.57735026918962576;

    std::size_t tc = 0, fc = 0;
    double lo = 0.0;
    const double end = tx.back();
    while (lo < end) {
        while (tc + 2 < tx.size() && tx[tc + 1] <= lo) ++tc;
        while (fc + 2 < fx.size() && fx[fc + 1] <= lo) ++fc;
        const double hi = std::min(tx[tc + 1], fx[fc + 1]);
        const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
        if (half > 0.0) {
            const double s = a.slope(tc);
            const double root = std::sqrt(1.0 + s * s);
            const double ht = tx[tc + 1] - tx[tc];
            const double dphi = (phi.v[fc + 1] - phi.v[fc]) / (fx[fc + 1] - fx[fc]);
            for (const double g : {mid - kGauss * half, mid + kGauss * half}) {
                const double av = a.radius(g);
                const double pv = phi(g);
                const double hat_r = (g - tx[tc]) / ht;  // hat of node tc+1
                const double hat_l = 1.0 - hat_r;
                const double de_l = -1.0 / ht, de_r = 1.0 / ht;
                const double stiff = 2.0 * av * dphi * dphi;
                const double mass_val = root * pv * pv;
                const double mass_slope = av * s / root * pv * pv;
                grad[tc] += half * (stiff * hat_l - mu1 * (mass_val * hat_l + mass_slope * de_l));
                grad[tc + 1] +=
                    half * (stiff * hat_r - mu1 * (mass_val * hat_r + mass_slope * de_r));
            }
        }
        lo = hi;
    }
    return grad;
}

/// Compact Nelder-Mead on the projected objective; the projection keeps every
/// evaluation inside the admissible class.
inline std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& fn,
    std::vector<double> start, double step, std::size_t max_iter, double tol) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> pts(n + 1, start);
    std::vector<double> val(n + 1);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
    for (std::size_t i = 0; i <= n; ++i) val[i] = fn(pts[i]);

    std::vector<std::size_t> order(n + 1);
    for (std::size_t it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i <= n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a_, std::size_t b_) { return val[a_] < val[b_]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        if (std::fabs(val[worst] - val[best]) <=
            tol * (std::fabs(val[best]) + tol))
            break;
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i)
            if (i != worst)
                for (std::size_t d = 0; d < n; ++d) centroid[d] += pts[i][d] / double(n);
        auto blend = [&](double coef) {
            std::vector<double> p(n);
            for (std::size_t d = 0; d < n; ++d)
                p[d] = centroid[d] + coef * (centroid[d] - pts[worst][d]);
            return p;
        };
        std::vector<double> refl = blend(1.0);
        const double fr = fn(refl);
        if (fr < val[best]) {
            std::vector<double> exp_ = blend(2.0);
            const double fe = fn(exp_);
            if (fe < fr) { pts[worst] = exp_; val[worst] = fe; }
            else { pts[worst] = refl; val[worst] = fr; }
        } else if (fr < val[second]) {
            pts[worst] = refl;
            val[worst] = fr;
        } else {
            std::vector<double> con = blend(-0.5);
            const double fcv = fn(con);
            if (fcv < val[worst]) { pts[worst] = con; val[worst] = fcv; }
            else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
                    val[i] = fn(pts[i]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (val[i] < val[best]) best = i;
    return {pts[best], val[best]};
}

}  // namespace detail

/// Minimize mu_1 over the taper class from an explicit start.
inline OptimizationReport minimize_mu1(const TaperProfile& start, double a0, double S,
                                       const PhysicalParams& params,
                                       const SearchConfig& cfg = {}) {
    if (!(S > a0 * start.ell()))
        throw std::invalid_argument("minimize_mu1: infeasible, need S > a0 * ell");
    const double ell = start.ell();
    auto mu1_of = [&](const TaperProfile& a) {
        return solve_spectrum(assemble(a, params, cfg.fem_cells), 1)[0].mu;
    };

    OptimizationReport rep;
    rep.criterion = "mu1";
    rep.cylinder_value = mu1_of(TaperProfile::constant(a0, ell));

    TaperProfile a = project_to_taper_class(start, a0, S);

    if (cfg.use_simplex) {
        auto objective = [&](const std::vector<double>& r) {
            std::vector<double> rp = r;
            for (double& v : rp) v = std::max(v, 0.5 * a0);  // keep radii positive
            return mu1_of(project_to_taper_class(TaperProfile(a.nodes(), rp), a0, S));
        };
        auto [r_best, v_best] = detail::nelder_mead(objective, a.radii(), 0.1 * a0,
                                                    cfg.max_iterations, cfg.value_tol);
        for (double& v : r_best) v = std::max(v, 0.5 * a0);
        a = project_to_taper_class(TaperProfile(a.nodes(), r_best), a0, S);
        rep.best_value = v_best;
        rep.history.push_back(v_best);
        rep.iterations = cfg.max_iterations;
        rep.converged = true;
    } else {
        double value = mu1_of(a);
        rep.history.push_back(value);
        double step = 0.25 * a0;
        for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
            const auto pair = solve_spectrum(assemble(a, params, cfg.fem_cells), 1)[0];
            const std::vector<double> grad = detail::mu1_nodal_gradient(a, pair.mu, pair.phi);
            // density scaling: nodal gradients carry a cell-width factor
            std::vector<double> dir(grad.size());
            double gmax = 0.0;
            for (std::size_t j = 0; j < grad.size(); ++j) {
                double wj = 0.0;
                if (j > 0) wj += 0.5 * (a.nodes()[j] - a.nodes()[j - 1]);
                if (j + 1 < grad.size()) wj += 0.5 * (a.nodes()[j + 1] - a.nodes()[j]);
                dir[j] = grad[j] / wj;
                gmax = std::max(gmax, std::fabs(dir[j]));
            }
            if (gmax == 0.0) { rep.converged = true; break; }

            bool accepted = false;
            for (int bt = 0; bt < 40; ++bt) {
                std::vector<double> trial = a.radii();
                for (std::size_t j = 0; j < trial.size(); ++j)
                    trial[j] -= step / gmax * dir[j] * a0;
                for (double& v : trial) v = std::max(v, 0.5 * a0);
                const TaperProfile cand =
                    project_to_taper_class(TaperProfile(a.nodes(), trial), a0, S);
                const double cand_value = mu1_of(cand);
                double decrease = 0.0;
                for (std::size_t j = 0; j < grad.size(); ++j)
                    decrease += grad[j] * (a.radii()[j] - cand.radii()[j]);
                if (cand_value <= value - cfg.armijo_c * std::max(decrease, 0.0) &&
                    cand_value < value) {
                    const double rel = (value - cand_value) / std::max(1.0, std::fabs(value));
                    a = cand;
                    value = cand_value;
                    accepted = true;
                    step *= 2.0;
                    rep.history.push_back(value);
                    if (rel < cfg.value_tol) rep.converged = true;
                    break;
                }
                step *= 0.5;
            }
            rep.iterations = it + 1;
            if (!accepted || rep.converged) {
                rep.converged = true;
                break;
            }
        }
        rep.best_value = value;
    }

    std::size_t on_floor = 0;
    for (double v : a.radii())
        if (v <= a0 * (1.0 + 1e-12)) ++on_floor;
    rep.floor_active_fraction = double(on_floor) / double(a.radii().size());
    rep.surface_active = surface_integral(a) >= S * (1.0 - 1e-10);
    rep.best_taper = a;
    return rep;
}

/// Minimize mu_1 from a seeded random start.
inline OptimizationReport minimize_mu1(double a0, double S, double ell,
                                       const PhysicalParams& params,
                                       const SearchConfig& cfg = {}) {
    std::mt19937_64 rng(cfg.seed);
    return minimize_mu1(random_taper(a0, S, ell, cfg.taper_nodes, rng), a0, S, params, cfg);
}

/// Minimize T1 over the bounded reduced class from an explicit start.
inline OptimizationReport minimize_T1_bounded(const RhoProfile& start, double a0,
                                              double S, double M,
                                              const PhysicalParams& params,
                                              const SearchConfig& cfg = {}) {
    const double base = a0 * a0 * a0;
    if (!(M > base))
        throw std::invalid_argument("minimize_T1_bounded: infeasible, need M > a0^3");
    if (!(S > base * start.ell1))
        throw std::invalid_argument("minimize_T1_bounded: infeasible, need S > a0^3 * ell1");

    OptimizationReport rep;
    rep.criterion = "T";
    rep.cylinder_value = std::cosh(omega_of_level(base, params) * start.ell1);

    RhoProfile rho = project_to_rho_class(start, a0, S, M);
    const double box = M - base;
    auto interior_fraction = [&](const RhoProfile& r) {
        std::size_t n = 0;
        for (double v : r.value)
            if (v > base + 1e-6 * box && v < M - 1e-6 * box) ++n;
        return double(n) / double(r.value.size());
    };

    double value = transfer_T1(rho, params, cfg.y_cells);
    rep.history.push_back(value);
    rep.interior_fraction_history.push_back(interior_fraction(rho));
    double step = box;
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
        const SteadyState st = compute_steady_state(rho, params, cfg.y_cells);
        // cell-averaged gradient density
        std::vector<double> dir(rho.cell_count());
        double gmax = 0.0;
        for (std::size_t c = 0; c < dir.size(); ++c) {
            const double lo = rho.cell_left(c);
            dir[c] = integrate(st.density, lo, lo + rho.cell_width()) / rho.cell_width();
            gmax = std::max(gmax, std::fabs(dir[c]));
        }
        if (gmax == 0.0) { rep.converged = true; break; }

        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            RhoProfile trial = rho;
            for (std::size_t c = 0; c < trial.value.size(); ++c)
                trial.value[c] -= step / gmax * dir[c];
            trial = project_to_rho_class(std::move(trial), a0, S, M);
            const double cand_value = transfer_T1(trial, params, cfg.y_cells);
            double decrease = 0.0;
            for (std::size_t c = 0; c < dir.size(); ++c)
                decrease += dir[c] * (rho.value[c] - trial.value[c]) * rho.cell_width();
            if (cand_value <= value - cfg.armijo_c * std::max(decrease, 0.0) &&
                cand_value < value) {
                const double rel = (value - cand_value) / std::max(1.0, std::fabs(value));
                rho = std::move(trial);
                value = cand_value;
                accepted = true;
                step = std::min(step * 2.0, 1e6 * box);
                rep.history.push_back(value);
                rep.interior_fraction_history.push_back(interior_fraction(rho));
                if (rel < cfg.value_tol) rep.converged = true;
                break;
            }
            step *= 0.5;
        }
        rep.iterations = it + 1;
        if (!accepted || rep.converged) {
            rep.converged = true;
            break;
        }
    }
    rep.best_value = value;

    std::size_t on_floor = 0;
    for (double v : rho.value)
        if (v <= base * (1.0 + 1e-12)) ++on_floor;
    rep.floor_active_fraction = double(on_floor) / double(rho.value.size());
    rep.surface_active = rho.integral() >= S * (1.0 - 1e-10);
    rep.best_rho = std::move(rho);
    return rep;
}

/// Minimize T1 from a seeded random start on [0, ell1].
inline OptimizationReport minimize_T1_bounded(double a0, double S, double M, double ell1,
                                              const PhysicalParams& params,
                                              const SearchConfig& cfg = {}) {
    std::mt19937_64 rng(cfg.seed);
    return minimize_T1_bounded(random_rho(a0, S, M, ell1, cfg.y_cells, rng), a0, S, M,
                               params, cfg);
}

struct PullbackCheck {
    bool ok = false;
    double T_time = 0.0;     ///< modal route, constant taper
    double T1_reduced = 0.0;  ///< BVP route, constant rho = a0^3
    double rel_gap = 0.0;
};

/// T(a) for the cylinder computed by the time-domain route must match
/// T1(a0^3) from the reduced route: the constant rho is the image of the
/// constant taper under the change of variables.
inline PullbackCheck verify_pullback(double a0, double ell, const PhysicalParams& params,
                                     std::size_t n_modes = 64, std::size_t x_cells = 2048,
                                     std::size_t y_cells = 2048, double tol = 1e-4) {
    PullbackCheck chk;
    chk.T_time =
        transfer_time_domain(TaperProfile::constant(a0, ell), params, n_modes, x_cells);
    const double ell1 = ell / (a0 * a0);
    chk.T1_reduced =
        transfer_T1(Coefficient::constant(a0 * a0 * a0, ell1), params, y_cells);
    chk.rel_gap = std::fabs(chk.T_time - chk.T1_reduced) / chk.T1_reduced;
    chk.ok = chk.rel_gap <= tol;
    return chk;
}

}  // namespace dendrite
