#pragma once

// Time-domain potential by modal expansion,
//
//   v(x,t) = (1/2pi C_m) sum_n phi_n(0) phi_n(x) (i0 * exp(-lambda_n t)),
//   lambda_n = (mu_n + 2 R_a G_m) / (2 R_a C_m),
//
// and the transfer criterion T(a) = int v(0,.) / int v(ell,.) evaluated in
// closed form per mode for a Dirac stimulus.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <variant>
#include <vector>

#include "dendrite/eigenproblem.hpp"
#include "dendrite/model.hpp"

namespace dendrite {

/// lambda_n = (mu_n + 2 R_a G_m) / (2 R_a C_m); positive for every mode of an
/// admissible profile since mu_1 > -gamma > -2 R_a G_m.
inline double lambda_of(double mu, const PhysicalParams& params) {
    return (mu + 2.0 * params.R_a * params.G_m) / (2.0 * params.R_a * params.C_m);
}

struct DiracStimulus {};

/// Current samples i0(t_k) on an increasing grid; zero outside the support.
struct SampledStimulus {
    std::vector<double> t;
    std::vector<double> i;
};

using Stimulus = std::variant<DiracStimulus, SampledStimulus>;

class ModalSolution {
  public:
    ModalSolution(std::vector<EigenPair> pairs, const PhysicalParams& params,
                  Stimulus stimulus = DiracStimulus{})
        : pairs_(std::move(pairs)), params_(params), stimulus_(std::move(stimulus)) {
        if (pairs_.empty()) throw std::invalid_argument("ModalSolution: no modes");
        lambdas_.reserve(pairs_.size());
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& p : pairs_) {
            const double lam = lambda_of(p.mu, params);
            if (!(lam > 0.0))
                throw std::invalid_argument("ModalSolution: non-positive decay rate; "
                                            "profile violates the spectral bounds");
            if (lam < prev)
                throw std::invalid_argument("ModalSolution: modes must be sorted");
            lambdas_.push_back(lam);
            prev = lam;
        }
    }

    std::size_t mode_count() const { return pairs_.size(); }
    const std::vector<EigenPair>& modes() const { return pairs_; }
    double lambda(std::size_t n) const { return lambdas_.at(n - 1); }  // 1-based as mu_n

    /// v(x,t); modes are summed in ascending n so results are deterministic.
    double evaluate(double x, double t) const {
        if (!(t > 0.0)) throw std::invalid_argument("evaluate: need t > 0");
        double acc = 0.0;
        for (std::size_t n = 0; n < pairs_.size(); ++n)
            acc += pairs_[n].phi.front() * pairs_[n].phi(x) * convolved(lambdas_[n], t);
        return acc / (2.0 * std::numbers::pi * params_.C_m);
    }

    /// Crude magnitude of the first omitted kind of term, |phi_N(0) phi_N(x)| / lambda_N.
    double tail_estimate(double x) const {
        const auto& last = pairs_.back();
        return std::fabs(last.phi.front() * last.phi(x)) / lambdas_.back();
    }

  private:
    double convolved(double lambda, double t) const {
        if (std::holds_alternative<DiracStimulus>(stimulus_))
            return std::exp(-lambda * t);
        const auto& st = std::get<SampledStimulus>(stimulus_);
        // (i0 * e^{-lambda .})(t) by trapezoid over the sampled support
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < st.t.size(); ++k) {
            if (st.t[k] >= t) break;
            const double s0 = st.t[k];
            const double s1 = std::min(st.t[k + 1], t);
            const double i1 = (s1 == st.t[k + 1])
                                  ? st.i[k + 1]
                                  : st.i[k] + (st.i[k + 1] - st.i[k]) *
                                                  (s1 - s0) / (st.t[k + 1] - s0);
            acc += 0.5 * (st.i[k] * std::exp(-lambda * (t - s0)) +
                          i1 * std::exp(-lambda * (t - s1))) * (s1 - s0);
        }
        return acc;
    }

    std::vector<EigenPair> pairs_;
    PhysicalParams params_;
    Stimulus stimulus_;
    std::vector<double> lambdas_;
};

/// T(a) for a Dirac stimulus: int_0^inf e^{-lambda t} dt = 1/lambda turns the
/// criterion into [sum phi_n(0)^2/lambda_n] / [sum phi_n(0) phi_n(ell)/lambda_n].
/// The ratio exceeds one; a non-positive denominator flags that the mode
/// truncation is too aggressive.
inline double transfer_time_domain(const std::vector<EigenPair>& pairs,
                                   const PhysicalParams& params) {
    if (pairs.empty()) throw std::invalid_argument("transfer_time_domain: no modes");
    double num = 0.0, den = 0.0;
    for (const auto& p : pairs) {
        const double lam = lambda_of(p.mu, params);
        if (!(lam > 0.0))
            throw std::runtime_error("transfer_time_domain: non-positive decay rate");
        num += p.phi.front() * p.phi.front() / lam;
        den += p.phi.front() * p.phi.back() / lam;
    }
    if (!(den > 0.0))
        throw std::runtime_error(
            "transfer_time_domain: non-positive denominator, mode truncation failed");
    return num / den;
}

inline double transfer_time_domain(const TaperProfile& a, const PhysicalParams& params,
                                   std::size_t n_modes, std::size_t n_cells) {
    return transfer_time_domain(solve_spectrum(assemble(a, params, n_cells), n_modes),
                                params);
}

}  // namespace dendrite
