#pragma once

#include <optional>
#include <string>
#include <vector>

#include "r2d/certify.hpp"

namespace r2d::cli {

// Exit codes: 0 success, 1 runtime/verification failure, 2 usage error.
constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

struct TrainArgs {
    std::string problem;
    std::size_t n = 50;
    std::size_t dim = 0;
    std::uint64_t seed = 1;
    double eta = 0.0;
    std::size_t steps = 0;
    std::size_t rewind_depth = 0;
    std::size_t planned_forget = 0;
    std::size_t record_stride = 1;
    std::string data_path;  // empty: synthesize from the problem generator
    std::string out_dir = "r2d_out";
    bool theta_columns = true;
};
int cmd_train(const TrainArgs& args);

struct RewindArgs {
    std::string problem;
    std::string data_path;
    std::string weights_path;  // final-weights checkpoint (step_index = T)
    std::size_t rewind_depth = 0;
    double tolerance = 0.0;  // 0: default scale
    std::uint64_t seed = 1;
    std::string checkpoint_out;
};
int cmd_rewind(const RewindArgs& args);

struct UnlearnArgs {
    std::string problem;
    std::string data_path;
    std::string checkpoint_path;
    std::size_t rewind_depth = 0;
    std::size_t forget_count = 0;               // seeded choice of m indices
    std::vector<std::size_t> forget_indices;    // explicit Z (overrides m)
    std::optional<double> epsilon;
    std::optional<double> delta;
    std::optional<double> sigma;
    std::uint64_t seed = 1;
    std::string out_dir = "r2d_out";
};
int cmd_unlearn(const UnlearnArgs& args);

struct CalibrateArgs {
    std::string problem;
    std::size_t n = 50;
    std::size_t dim = 0;
    std::uint64_t seed = 1;
    std::optional<double> grad_bound;  // bypass the problem registry
    std::optional<double> smoothness;
    std::size_t forget_count = 1;
    double eta = 0.0;
    std::size_t steps = 0;
    double epsilon = 1.0;
    double delta = 1e-5;
    std::string out_path;  // empty: stdout
};
int cmd_calibrate(const CalibrateArgs& args);

struct VerifyArgs {
    std::vector<std::string> problems;
    std::size_t seeds = 3;
    std::vector<std::size_t> data_sizes{50};
    std::vector<std::size_t> forget_sizes{1};
    std::vector<std::size_t> step_counts{50};
    std::vector<double> rewind_fractions{0.0, 0.5, 1.0};
    double epsilon = 1.0;
    double delta = 1e-5;
    std::size_t noise_draws = 200;
    double fault_grad_scale = 1.0;
    unsigned threads = 2;
    std::uint64_t seed = 1;
    std::string out_dir = "r2d_out";
};
int cmd_verify(const VerifyArgs& args);

struct BenchArgs {
    std::string problem;
    std::size_t n = 50;
    std::uint64_t seed = 1;
    std::size_t forget_count = 1;
    std::size_t steps = 50;
    std::size_t rewind_depth = 25;
    double eta = 0.0;  // 0: 0.95 * cap
    std::string out_dir = "r2d_out";
};
int cmd_bench(const BenchArgs& args);

int run_main(int argc, char** argv);

}  // namespace r2d::cli
