#include "r2d/loss.hpp"

namespace r2d {

double empirical_loss(const LossModel& model, const Dataset& data, const ParamVector& theta) {
    require_finite(theta, "theta");
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double li = model.sample_loss(data[i], theta);
        if (!std::isfinite(li))
            throw EvalError(strprintf("non-finite loss at sample %zu", i));
        sum += li;
    }
    return sum / static_cast<double>(data.size());
}

void empirical_grad(const LossModel& model, const Dataset& data, const ParamVector& theta,
                    ParamVector& out, ParamVector& scratch) {
    require_finite(theta, "theta");
    out.assign(theta.size(), 0.0);
    scratch.resize(theta.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        model.sample_grad(data[i], theta, scratch);
        if (!all_finite(scratch))
            throw EvalError(strprintf("non-finite gradient at sample %zu", i));
        axpy(1.0, scratch, out);
    }
    scale(out, 1.0 / static_cast<double>(data.size()));
}

ParamVector empirical_grad(const LossModel& model, const Dataset& data, const ParamVector& theta) {
    ParamVector out;
    ParamVector scratch;
    empirical_grad(model, data, theta, out, scratch);
    return out;
}

}  // namespace r2d
