#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "r2d/loss.hpp"
#include "r2d/rng.hpp"

namespace r2d {

// Central-difference gradient oracle; exact for quadratics up to roundoff.
ParamVector finite_diff_grad(const LossModel& model, const Dataset& data, const ParamVector& theta,
                             double h);

// Region where constants are certified: the "training tube", a ball of twice
// the largest observed excursion around theta0.
struct Ball {
    ParamVector center;
    double radius = 0.0;
    bool contains(const ParamVector& theta) const { return distance(theta, center) <= radius; }
};

using RegionSampler = std::function<ParamVector(GaussianStream&)>;

// Uniform-ish sampler over the ball (gaussian direction, uniform radius).
RegionSampler ball_sampler(Ball region);

struct ConstantsReport {
    double max_grad_norm = 0.0;
    double max_smoothness_ratio = 0.0;
    double declared_grad_bound = 0.0;
    double declared_smoothness = 0.0;
    std::size_t trials = 0;
    bool grad_bound_ok = false;
    bool smoothness_ok = false;
    bool pass = false;
};

// Samples theta pairs from the region and checks the declared (G, L) against
// observed per-sample gradient norms and difference quotients (1% slack).
ConstantsReport verify_constants(const LossModel& model, const Dataset& data,
                                 const RegionSampler& sampler, std::size_t trials,
                                 GaussianStream& rng);

struct PlReport {
    double min_slack = 0.0;  // min over points of 0.5*||grad||^2 - mu*(f - f*)
    double min_ratio = 0.0;  // min over points of 0.5*||grad||^2 / (f - f*)
    std::size_t points_checked = 0;
    bool pass = false;
};

// Checks 0.5*||grad f_D(x)||^2 >= mu * (f_D(x) - f_star) at each point.
PlReport pl_check(const LossModel& model, const Dataset& data, double mu, double f_star,
                  const std::vector<ParamVector>& points);

// min{1/L, n / (2 (n - m) L)}: the step-size cap under which every analytic
// guarantee in this codebase is stated.
double step_size_cap(double smoothness, std::size_t n, std::size_t m);

// What the learner needs beyond data: a loss oracle with certified constants,
// a canonical initial point, and the region the certificates refer to.
struct PopulationModel {
    double f_star = 0.0;                                 // min of the population risk
    std::function<double(const ParamVector&)> risk;      // analytic F(theta)
    std::function<Sample(GaussianStream&)> draw;         // fresh z from the sample space
};

struct Problem {
    std::string name;
    std::size_t dim = 0;
    Dataset data;
    std::shared_ptr<const LossModel> model;
    ParamVector theta0;
    double recommended_eta = 0.0;  // respects step_size_cap(L, n, 0)
    Ball tube;
    bool constants_global = false;  // true when G holds for all theta (logistic)
    std::optional<PopulationModel> population;
};

std::vector<std::string> problem_names();

// Instantiate a built-in problem: generate data, derive theta0, certify
// constants over the training tube. Deterministic in (name, seed, n, dim).
// dim == 0 selects the problem default.
Problem make_problem(const std::string& name, std::uint64_t seed, std::size_t n,
                     std::size_t dim = 0);

// Same, over an existing dataset (CLI --data path).
Problem make_problem_for_data(const std::string& name, Dataset data, std::uint64_t seed);

}  // namespace r2d
