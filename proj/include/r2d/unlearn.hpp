#pragma once

#include <string>
#include <vector>

#include "r2d/train.hpp"

namespace r2d {

struct PrivacyBudget {
    double epsilon = 0.0;
    double delta = 0.0;

    void validate() const {
        if (!(epsilon > 0.0)) throw ValueError("epsilon must be strictly positive");
        if (!(delta > 0.0) || !(delta < 1.0)) throw ValueError("delta must lie in (0, 1)");
    }
};

// What calibration certifies: the analytic coupling bound B = 2mG h(K)/(Ln)
// and the Gaussian noise sigma = B sqrt(2 log(1.25/delta)) / epsilon.
struct Certificate {
    double epsilon = 0.0;
    double delta = 0.0;
    double sigma = 0.0;
    std::size_t rewind_depth = 0;  // K
    std::size_t steps = 0;         // T
    std::size_t forget_count = 0;  // m
    std::size_t data_count = 0;    // n
    double eta = 0.0;
    double grad_bound = 0.0;   // G
    double smoothness = 0.0;   // L
    double h_value = 0.0;      // h(K)
    double distance_bound = 0.0;  // B
    bool vacuous = false;          // h(K) overflowed the 64-bit range
    bool epsilon_warning = false;  // epsilon > 1: classical mechanism constant

    // sigma == B sqrt(2 log(1.25/delta)) / epsilon to relative 1e-12
    bool self_consistent() const;

    std::string to_kv() const;  // field=value lines, 17 significant digits
    static std::string csv_header();
    std::string csv_row() const;
};

// h(K) = ((1 + eta L n/(n-m))^{T-K} - 1)(1 + eta L)^K, evaluated in log space;
// +inf when the exponent passes the 64-bit range (the bound is then vacuous).
double h_of_k(double eta, double smoothness, std::size_t n, std::size_t m, std::size_t steps,
              std::size_t rewind_depth);

Certificate calibrate_sigma(const PrivacyBudget& budget, double grad_bound, double smoothness,
                            std::size_t n, std::size_t m, double eta, std::size_t steps,
                            std::size_t rewind_depth);

// Smallest K in [0, T] with sigma(K) <= sigma_max; sigma(T) = 0 so the search
// always succeeds. Binary search over the monotone decreasing sigma(K).
std::size_t min_rewind_for_noise(double sigma_max, const PrivacyBudget& budget, double grad_bound,
                                 double smoothness, std::size_t n, std::size_t m, double eta,
                                 std::size_t steps);

struct UnlearnResult {
    ParamVector theta_pre_noise;   // theta''_K, needed by verification
    ParamVector theta_perturbed;   // theta''_K + xi
};

// K GD steps on the retained loss from the checkpoint, then Gaussian
// perturbation. eta is read from the checkpoint. Optional taps expose the
// iterates and stepping-gradient norms for the certification harness.
UnlearnResult unlearn(const LossModel& model, const Dataset& retain, const Checkpoint& ckpt,
                      std::size_t rewind_depth, double sigma, GaussianStream& rng,
                      std::vector<ParamVector>* iterates = nullptr,
                      std::vector<double>* step_grad_sq = nullptr);

struct SequentialResult {
    std::vector<Certificate> certificates;
    ParamVector theta_pre_noise;
    ParamVector theta_perturbed;
};

// Sequential requests re-invoke unlearning from the same checkpoint on the
// shrunken retain set, recalibrating sigma with the cumulative forget count.
// Requests carry cumulative (nested) forget sets against the full dataset.
SequentialResult sequential_unlearn(const LossModel& model, const Dataset& data,
                                    const Checkpoint& ckpt,
                                    const std::vector<SplitSpec>& requests,
                                    const PrivacyBudget& budget, std::size_t steps,
                                    GaussianStream& rng);

}  // namespace r2d
