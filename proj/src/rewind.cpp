#include "r2d/rewind.hpp"

#include <cmath>

namespace r2d {

namespace {

double default_tolerance(const ParamVector& theta_next) {
    return 1e-10 * (1.0 + norm(theta_next));
}

}  // namespace

ParamVector rewind_step(const LossModel& model, const Dataset& data, const ParamVector& theta_next,
                        double eta, const ProxConfig& cfg, RewindStats* stats) {
    require_finite(theta_next, "theta_next");
    const double L = model.constants().smoothness;
    if (!(eta > 0.0)) throw ValueError("eta must be positive");
    if (eta * L >= 1.0)
        throw ValueError(strprintf(
            "subproblem not convex: eta=%.17g must be strictly below 1/L=%.17g", eta, 1.0 / L));

    const double tol = cfg.tolerance > 0.0 ? cfg.tolerance : default_tolerance(theta_next);
    const double step = cfg.inner_step > 0.0 ? cfg.inner_step : eta / (1.0 + eta * L);

    // minimize phi(x) = -f_D(x) + ||x - theta_next||^2 / (2 eta);
    // eta * grad phi(x) = x - theta_next - eta grad f_D(x), the implicit-equation
    // residual, so the stop test is taken directly on that residual
    ParamVector x(theta_next);
    ParamVector grad_f, scratch, residual(x.size());
    for (std::size_t it = 0; it < cfg.max_inner_iterations; ++it) {
        empirical_grad(model, data, x, grad_f, scratch);
        if (stats) {
            ++stats->inner_iterations;
            stats->gradient_evals += data.size();
        }
        double rnorm = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            residual[k] = x[k] - theta_next[k] - eta * grad_f[k];
            rnorm += residual[k] * residual[k];
        }
        rnorm = std::sqrt(rnorm);
        if (rnorm <= tol) {
            if (stats) stats->final_residual = rnorm;
            return x;
        }
        // grad phi = residual / eta
        axpy(-step / eta, residual, x);
        if (!all_finite(x)) throw EvalError("prox subproblem diverged");
    }
    throw ConvergenceError(strprintf(
        "prox subproblem did not reach tolerance %.17g within %zu iterations", tol,
        cfg.max_inner_iterations));
}

ParamVector rewind(const LossModel& model, const Dataset& data, const ParamVector& theta_T,
                   double eta, std::size_t K, const ProxConfig& cfg, RewindStats* stats) {
    if (K == 0) return theta_T;
    const double L = model.constants().smoothness;
    if (eta * L >= 1.0)
        throw ValueError(strprintf(
            "subproblem not convex: eta=%.17g must be strictly below 1/L=%.17g", eta, 1.0 / L));

    // Each backward step inherits the previous step's error amplified by
    // 1/(1 - eta L); tightening the per-step residual by
    // eta L (1 - (eta L)^2)^K keeps the composed error within the
    // 10 tau (1 + eta L)^K reconstruction contract.
    const double el = eta * L;
    double shrink = 0.25 * std::min(1.0, el * std::pow(1.0 - el * el, static_cast<double>(K)));
    ProxConfig inner(cfg);
    ParamVector theta(theta_T);
    for (std::size_t k = 0; k < K; ++k) {
        const double tol = cfg.tolerance > 0.0 ? cfg.tolerance : default_tolerance(theta);
        inner.tolerance = std::max(tol * shrink, 5e-15 * (1.0 + norm(theta)));
        theta = rewind_step(model, data, theta, eta, inner, stats);
    }
    return theta;
}

}  // namespace r2d
