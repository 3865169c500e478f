#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "r2d/loss.hpp"
#include "r2d/rng.hpp"

namespace r2d {

struct TrainConfig {
    double eta = 0.0;
    std::size_t steps = 0;         // T
    std::size_t rewind_depth = 0;  // K, checkpoint lands at T - K
    std::uint64_t seed = 0;
    std::size_t record_stride = 1;
    std::size_t planned_forget = 0;  // m used for the step-size constraint
    bool log_loss = true;            // per-step loss log (costs one pass per step)
};

struct Checkpoint {
    ParamVector theta;
    std::uint64_t step_index = 0;  // T - K for the run that produced it
    double eta = 0.0;
    std::uint64_t dataset_fingerprint = 0;
    std::string problem;
    bool reconstructed = false;
    std::uint16_t version = 1;
};

struct Trajectory {
    std::vector<std::size_t> steps;   // recorded indices; always 0, T-K, T
    std::vector<ParamVector> thetas;  // aligned with steps
    std::vector<double> losses;       // aligned with steps (empty if !log_loss)
    std::vector<double> grad_norms;   // ||grad f_D|| at each recorded iterate

    const ParamVector& at_step(std::size_t step) const;
};

struct TrainResult {
    ParamVector theta_final;
    Checkpoint checkpoint;
    Trajectory trajectory;
};

// T deterministic GD steps on f_D; checkpoint captured at step T - K. The
// returned theta_final is noise-free: perturbation is a separate operation so
// coupling experiments stay noise-free where the analysis is noise-free.
TrainResult train(const LossModel& model, const Dataset& data, const ParamVector& theta0,
                  const TrainConfig& cfg, const std::string& problem_name = "");

// theta + xi with xi ~ N(0, sigma^2 I_d) drawn from the supplied stream.
ParamVector perturb(const ParamVector& theta, double sigma, GaussianStream& rng);

// Binary format: magic "R2D\0", version u16, d u32, step_index u64, eta f64,
// fingerprint u64, d little-endian f64 values, then a metadata tail
// (reconstructed u8, problem-name u16 + bytes). Round-trips bit-exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// "checkpoint/dataset mismatch" unless the fingerprints agree.
void ensure_fingerprint(const Checkpoint& ckpt, const Dataset& data);

// CSV columns: step,loss,grad_norm[,theta_0..theta_{d-1}]
void write_trajectory_csv(const Trajectory& traj, const std::string& path, bool include_theta);

}  // namespace r2d
