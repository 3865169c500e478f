#pragma once

#include "r2d/loss.hpp"

namespace r2d {

struct ProxConfig {
    // Residual target for the implicit equation; 0 selects 1e-10 * (1 + ||theta_next||).
    double tolerance = 0.0;
    std::size_t max_inner_iterations = 100000;
    // 0 selects eta / (1 + eta L), the inverse of the subproblem smoothness bound.
    double inner_step = 0.0;
};

struct RewindStats {
    std::size_t inner_iterations = 0;
    std::size_t gradient_evals = 0;  // per-sample gradient evaluations
    double final_residual = 0.0;
};

// One backward step: solves theta = theta_next + eta * grad f_D(theta) by
// minimizing the strongly convex subproblem -f_D(x) + ||x - theta_next||^2/(2 eta)
// with gradient descent. Requires eta < 1/L so the subproblem has modulus
// 1/eta - L > 0; the unique minimizer is the exact preimage of theta_next.
ParamVector rewind_step(const LossModel& model, const Dataset& data, const ParamVector& theta_next,
                        double eta, const ProxConfig& cfg, RewindStats* stats = nullptr);

// K composed backward steps from theta_T. Inner solves run tighter than the
// per-step tolerance because backward errors amplify by 1/(1 - eta L) per
// step, which outpaces the (1 + eta L)^K growth the round-trip contract allows.
ParamVector rewind(const LossModel& model, const Dataset& data, const ParamVector& theta_T,
                   double eta, std::size_t K, const ProxConfig& cfg, RewindStats* stats = nullptr);

}  // namespace r2d
