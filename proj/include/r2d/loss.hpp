#pragma once

#include <atomic>
#include <memory>
#include <optional>

#include "r2d/dataset.hpp"
#include "r2d/vec.hpp"

namespace r2d {

// Declared regularity constants. L and G must survive verify_constants on the
// region training actually visits; mu and f_star exist only for PL problems.
struct LossConstants {
    double smoothness = 0.0;   // L
    double grad_bound = 0.0;   // G
    std::optional<double> pl_mu;
    std::optional<double> f_star;  // min of the retained empirical loss
};

// Per-sample loss/gradient oracle. All gradients are hand-derived; the
// finite-difference oracle in the problems module keeps them honest.
class LossModel {
  public:
    virtual ~LossModel() = default;

    virtual double sample_loss(const Sample& z, const ParamVector& theta) const = 0;
    virtual void sample_grad(const Sample& z, const ParamVector& theta, ParamVector& out) const = 0;

    ParamVector sample_grad(const Sample& z, const ParamVector& theta) const {
        ParamVector g(theta.size());
        sample_grad(z, theta, g);
        return g;
    }

    const LossConstants& constants() const { return constants_; }
    void set_constants(const LossConstants& c) { constants_ = c; }

    // Analytic sup of the per-sample gradient norm over the ball B(center, radius),
    // when the loss family admits one. Grounds tube-certified G values.
    virtual std::optional<double> grad_norm_ball_bound(const Dataset&, const ParamVector&,
                                                       double) const {
        return std::nullopt;
    }

    // Global minimum value of the empirical loss on `data`, when computable.
    virtual std::optional<double> empirical_minimum(const Dataset&) const { return std::nullopt; }

  protected:
    LossConstants constants_;
};

// f_D(theta) = (1/n) sum_i f_{z_i}(theta); summation in index order.
double empirical_loss(const LossModel& model, const Dataset& data, const ParamVector& theta);

// Mean per-sample gradient with the same fixed summation order.
ParamVector empirical_grad(const LossModel& model, const Dataset& data, const ParamVector& theta);
void empirical_grad(const LossModel& model, const Dataset& data, const ParamVector& theta,
                    ParamVector& out, ParamVector& scratch);

// Decorator counting per-sample evaluations; used by the bench command and the
// efficiency tests (unlearning must cost exactly K*(n-m) per-sample gradients).
class CountingLossModel : public LossModel {
  public:
    explicit CountingLossModel(std::shared_ptr<const LossModel> inner)
        : inner_(std::move(inner)) {
        constants_ = inner_->constants();
    }

    double sample_loss(const Sample& z, const ParamVector& theta) const override {
        loss_evals_.fetch_add(1, std::memory_order_relaxed);
        return inner_->sample_loss(z, theta);
    }
    void sample_grad(const Sample& z, const ParamVector& theta, ParamVector& out) const override {
        grad_evals_.fetch_add(1, std::memory_order_relaxed);
        inner_->sample_grad(z, theta, out);
    }
    std::optional<double> grad_norm_ball_bound(const Dataset& d, const ParamVector& c,
                                               double r) const override {
        return inner_->grad_norm_ball_bound(d, c, r);
    }
    std::optional<double> empirical_minimum(const Dataset& d) const override {
        return inner_->empirical_minimum(d);
    }

    std::uint64_t loss_evals() const { return loss_evals_.load(); }
    std::uint64_t grad_evals() const { return grad_evals_.load(); }
    void reset() {
        loss_evals_ = 0;
        grad_evals_ = 0;
    }

  private:
    std::shared_ptr<const LossModel> inner_;
    mutable std::atomic<std::uint64_t> loss_evals_{0};
    mutable std::atomic<std::uint64_t> grad_evals_{0};
};

}  // namespace r2d
