#pragma once

#include <optional>

#include "r2d/problems.hpp"
#include "r2d/unlearn.hpp"

namespace r2d {

// ---------------------------------------------------------------------------
// analytic bounds (the proof steps, as closed forms)
// ---------------------------------------------------------------------------

// ||theta_t - theta'_t|| <= 2Gm/(Ln) [(1 + eta L n/(n-m))^t - 1]
double bound_learning_divergence(std::size_t t, double eta, double smoothness, double grad_bound,
                                 std::size_t n, std::size_t m);

// Delta'_0 (1 + eta L)^K
double bound_unlearn_coupling(double delta_at_checkpoint, double eta, double smoothness,
                              std::size_t rewind_depth);

// Gaussian mechanism: sigma = Delta sqrt(2 log(1.25/delta)) / epsilon
double gaussian_sigma(double sensitivity, double epsilon, double delta);

// The mechanism inverted: the epsilon certified for a measured distance at a
// deployed sigma. sigma = 0 with a positive distance yields +inf.
double achieved_epsilon(double measured_distance, double sigma, double delta);

// ---------------------------------------------------------------------------
// coupled trajectories
// ---------------------------------------------------------------------------

struct CouplingConfig {
    double eta = 0.0;
    std::size_t steps = 0;         // T
    std::size_t rewind_depth = 0;  // K
};

// The three trajectories of the coupling argument, run noise-free: train on D,
// retrain on D' from the same theta0, unlearn from the checkpoint.
struct CouplingRun {
    std::size_t n = 0;
    std::size_t m = 0;
    CouplingConfig config;
    ParamVector theta0;
    std::vector<ParamVector> train_iterates;    // theta_t,  t = 0..T
    std::vector<ParamVector> retrain_iterates;  // theta'_t, t = 0..T
    std::vector<ParamVector> unlearn_iterates;  // theta''_t, t = 0..K
    std::vector<double> delta_learning;  // ||theta_t - theta'_t||, t = 0..T
    std::vector<double> delta_unlearn;   // ||theta'_{T-K+t} - theta''_t||, t = 0..K
    double final_distance = 0.0;         // ||theta'_T - theta''_K||
    Checkpoint checkpoint;
    std::vector<double> unlearn_step_grad_sq;  // ||grad f_D'(theta''_t)||^2, t = 0..K-1
    double retain_loss_theta0 = 0.0;           // f_D'(theta0)
    double retain_loss_final = 0.0;            // f_D'(theta''_K)
};

CouplingRun run_coupling(const LossModel& model, const Dataset& data, const SplitSpec& spec,
                         const ParamVector& theta0, const CouplingConfig& cfg);

struct StepCheck {
    std::size_t t = 0;
    double measured = 0.0;
    double bound = 0.0;
    bool ok() const { return measured <= bound; }
};

struct CouplingCheck {
    std::vector<StepCheck> learning;
    std::vector<StepCheck> unlearning;
    StepCheck final_check;
    std::size_t violations = 0;
    double min_margin = 0.0;  // min over steps of bound/measured
    bool pass = false;
};

// Asserts the divergence lemmas literally, step by step, with the supplied
// constants (understate G and real runs must fail: that is the fault-injection
// contract).
CouplingCheck check_coupling_bounds(const CouplingRun& run, double grad_bound, double smoothness);

// ---------------------------------------------------------------------------
// utility reports
// ---------------------------------------------------------------------------

struct GradNormReport {
    double lhs = 0.0;
    double rhs = 0.0;          // printed form with the step count clamped at zero
    double rhs_printed = 0.0;  // literal (T-K-1) factor, negative at K = T
    double sum_train_grad_sq = 0.0;        // sum_{t=0}^{T-K-1} ||grad f_D'(theta_t)||^2
    double sum_unlearn_grad_sq = 0.0;      // sum_{t=0}^{K-1}, as printed in the theorem
    double sum_unlearn_grad_sq_kp1 = 0.0;  // sum_{t=0}^{K}, the appendix tally
    double mc_mean = 0.0;
    double mc_std_error = 0.0;
    double sigma = 0.0;
    std::size_t draws = 0;
    bool pass = false;
};

GradNormReport gradnorm_report(const LossModel& model, const Dataset& retain,
                               const CouplingRun& run, double grad_bound, double smoothness,
                               double sigma, std::size_t draws, GaussianStream& rng);

struct PlUtilityReport {
    double bound = 0.0;
    double measured = 0.0;  // MC estimate of E[f_D'(perturbed)] - f*
    double mc_std_error = 0.0;
    double noise_free_lhs = 0.0;    // f_D'(theta''_K) - f*
    double noise_free_bound = 0.0;  // the sigma = 0 bound
    double sigma = 0.0;
    std::size_t draws = 0;
    bool pass = false;
    bool noise_free_pass = false;
    bool noise_term_flagged = false;  // bound exceeded only through the noise term
};

PlUtilityReport pl_utility_report(const LossModel& model, const Dataset& retain,
                                  const CouplingRun& run, double grad_bound, double smoothness,
                                  std::optional<double> mu, std::optional<double> f_star,
                                  double sigma, std::size_t draws, GaussianStream& rng);

struct GeneralizationConfig {
    std::string problem = "scalar_quadratic";
    std::size_t n = 50;
    std::size_t m = 5;
    std::size_t steps = 50;
    std::size_t rewind_depth = 25;
    std::size_t dataset_redraws = 20;
    std::size_t noise_draws = 200;
    std::size_t fresh_samples = 2000;
    PrivacyBudget budget{1.0, 1e-5};
    double sigma_cap = -1.0;  // < 0: uncapped
    std::uint64_t seed = 1;
};

struct GeneralizationReport {
    double bound_avg = 0.0;
    double measured = 0.0;        // E over redraws and noise of F(perturbed) - F*
    double redraw_std_error = 0.0;
    double population_f_star = 0.0;
    std::size_t redraws = 0;
    bool pass = false;
};

// Excess population risk against the generalization bound; the expectation is
// over dataset redraws, fresh samples, and noise.
GeneralizationReport generalization_report(const GeneralizationConfig& cfg);

// ---------------------------------------------------------------------------
// verification driver (the verify command and the acceptance suite)
// ---------------------------------------------------------------------------

struct VerifyConfig {
    std::vector<std::string> problems;  // empty: all built-ins
    std::size_t seeds = 3;
    std::vector<std::size_t> data_sizes{50};
    std::vector<std::size_t> forget_sizes{1};
    std::vector<std::size_t> step_counts{50};
    std::vector<double> rewind_fractions{0.0, 0.5, 1.0};
    PrivacyBudget budget{1.0, 1e-5};
    std::size_t noise_draws = 1000;
    double fault_grad_scale = 1.0;  // < 1 understates G for the bound checks
    bool check_utility = true;
    bool keep_steps = false;  // retain per-step checks (memory heavy on sweeps)
    unsigned threads = 2;
    std::uint64_t base_seed = 1;
};

struct RunKey {
    std::string problem;
    std::uint64_t seed = 0;
    std::size_t n = 0, m = 0, steps = 0, rewind_depth = 0;
};

struct RunOutcome {
    RunKey key;
    Certificate certificate;
    std::size_t coupling_violations = 0;
    double min_margin = 0.0;
    double final_distance = 0.0;
    double final_bound = 0.0;
    double achieved_eps = 0.0;
    bool privacy_ok = false;
    bool tube_ok = false;
    GradNormReport gradnorm;
    bool has_pl = false;
    PlUtilityReport pl;
    std::vector<StepCheck> steps_learning;  // populated when keep_steps
    bool pass = false;
};

struct VerificationReport {
    std::vector<RunOutcome> runs;
    std::size_t coupling_violations = 0;
    std::size_t privacy_violations = 0;
    std::size_t utility_failures = 0;
    std::size_t pl_failures = 0;
    std::size_t tube_exits = 0;
    double wall_seconds = 0.0;
    bool pass = false;
};

VerificationReport run_verification(const VerifyConfig& cfg);

// Budget floor: calibrate at the requested epsilon, then raise epsilon (never
// below the request) until sigma fits under sigma_cap, so noise draws stay in
// the region where the constants are certified. No-op for sigma_cap < 0.
Certificate calibrate_with_sigma_cap(const PrivacyBudget& budget, double sigma_cap,
                                     double grad_bound, double smoothness, std::size_t n,
                                     std::size_t m, double eta, std::size_t steps,
                                     std::size_t rewind_depth);

}  // namespace r2d
