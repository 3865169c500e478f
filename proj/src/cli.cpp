#include "r2d/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "r2d/rewind.hpp"

namespace fs = std::filesystem;

namespace r2d::cli {

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory: " + dir);
}

Problem load_or_make(const std::string& name, const std::string& data_path, std::uint64_t seed,
                     std::size_t n, std::size_t dim) {
    if (!data_path.empty()) return make_problem_for_data(name, load_dataset_csv(data_path), seed);
    return make_problem(name, seed, n, dim);
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << body;
    if (!out) throw IoError("write failed: " + path);
}

std::string describe_constants(const Problem& prob) {
    const auto& c = prob.model->constants();
    std::string s;
    s += "problem=" + prob.name + "\n";
    s += "dim=" + std::to_string(prob.dim) + "\n";
    s += "n=" + std::to_string(prob.data.size()) + "\n";
    s += "fingerprint=" + strprintf("%016llx", static_cast<unsigned long long>(
                                                   prob.data.fingerprint())) + "\n";
    s += "G=" + fmt_g17(c.grad_bound) + "\n";
    s += "L=" + fmt_g17(c.smoothness) + "\n";
    if (c.pl_mu) s += "mu=" + fmt_g17(*c.pl_mu) + "\n";
    if (c.f_star) s += "f_star=" + fmt_g17(*c.f_star) + "\n";
    s += "tube_radius=" + fmt_g17(prob.tube.radius) + "\n";
    s += "recommended_eta=" + fmt_g17(prob.recommended_eta) + "\n";
    return s;
}

}  // namespace

int cmd_train(const TrainArgs& args) {
    Problem prob = load_or_make(args.problem, args.data_path, args.seed, args.n, args.dim);
    ensure_dir(args.out_dir);

    TrainConfig cfg;
    cfg.eta = args.eta;
    cfg.steps = args.steps;
    cfg.rewind_depth = args.rewind_depth;
    cfg.seed = args.seed;
    cfg.record_stride = args.record_stride;
    cfg.planned_forget = args.planned_forget;

    TrainResult res = train(*prob.model, prob.data, prob.theta0, cfg, prob.name);

    const std::string data_csv = args.out_dir + "/dataset.csv";
    const std::string ckpt_path = args.out_dir + "/checkpoint.bin";
    const std::string weights_path = args.out_dir + "/theta_final.bin";
    const std::string traj_path = args.out_dir + "/trajectory.csv";

    save_dataset_csv(prob.data, data_csv);
    save_checkpoint(res.checkpoint, ckpt_path);
    Checkpoint final_state = res.checkpoint;
    final_state.theta = res.theta_final;
    final_state.step_index = cfg.steps;
    save_checkpoint(final_state, weights_path);
    write_trajectory_csv(res.trajectory, traj_path, args.theta_columns);

    const double final_loss = empirical_loss(*prob.model, prob.data, res.theta_final);
    std::string summary = describe_constants(prob);
    summary += "eta=" + fmt_g17(cfg.eta) + "\n";
    summary += "T=" + std::to_string(cfg.steps) + "\n";
    summary += "K=" + std::to_string(cfg.rewind_depth) + "\n";
    summary += "seed=" + std::to_string(args.seed) + "\n";
    summary += "record_stride=" + std::to_string(cfg.record_stride) + "\n";
    summary += "final_loss=" + fmt_g17(final_loss) + "\n";
    summary += "checkpoint_step=" + std::to_string(res.checkpoint.step_index) + "\n";
    summary += "checkpoint=" + ckpt_path + "\n";
    summary += "weights=" + weights_path + "\n";
    summary += "trajectory=" + traj_path + "\n";
    summary += "dataset=" + data_csv + "\n";
    write_text(args.out_dir + "/summary.txt", summary);

    std::cout << "final_loss=" << fmt_g17(final_loss) << "\n";
    std::cout << "checkpoint=" << ckpt_path << " (step " << res.checkpoint.step_index << ")\n";
    return kOk;
}

int cmd_rewind(const RewindArgs& args) {
    if (args.data_path.empty()) throw IoError("rewind requires --data (the full dataset)");
    Dataset data = load_dataset_csv(args.data_path);
    Problem prob = make_problem_for_data(args.problem, std::move(data), args.seed);

    Checkpoint weights = load_checkpoint(args.weights_path);
    ensure_fingerprint(weights, prob.data);
    if (args.rewind_depth > weights.step_index)
        throw ValueError(strprintf("cannot rewind %zu steps from step %llu", args.rewind_depth,
                                   static_cast<unsigned long long>(weights.step_index)));

    ProxConfig prox;
    prox.tolerance = args.tolerance;
    RewindStats stats;
    ParamVector theta = rewind(*prob.model, prob.data, weights.theta, weights.eta,
                               args.rewind_depth, prox, &stats);

    // residual of the forward replay of the last backward step
    ParamVector forward = add_scaled(theta, -weights.eta,
                                     empirical_grad(*prob.model, prob.data, theta));
    double residual = 0.0;
    if (args.rewind_depth > 0) {
        ParamVector target = args.rewind_depth == 1
                                 ? weights.theta
                                 : rewind(*prob.model, prob.data, weights.theta, weights.eta,
                                          args.rewind_depth - 1, prox);
        residual = distance(forward, target);
    }

    Checkpoint out = weights;
    out.theta = std::move(theta);
    out.step_index = weights.step_index - args.rewind_depth;
    out.reconstructed = true;
    save_checkpoint(out, args.checkpoint_out);

    std::cout << "reconstructed=" << args.checkpoint_out << " (step " << out.step_index << ")\n";
    std::cout << "inner_iterations=" << stats.inner_iterations << "\n";
    std::cout << "last_step_residual=" << fmt_g17(residual) << "\n";
    return kOk;
}

int cmd_unlearn(const UnlearnArgs& args) {
    if (args.sigma && args.epsilon)
        throw ValueError("give either --sigma or --epsilon/--delta, not both");
    Problem prob = load_or_make(args.problem, args.data_path, args.seed, 0, 0);
    ensure_dir(args.out_dir);

    Checkpoint ckpt = load_checkpoint(args.checkpoint_path);
    ensure_fingerprint(ckpt, prob.data);

    SplitSpec spec = args.forget_indices.empty()
                         ? random_split(prob.data.size(), args.forget_count,
                                        mix64(args.seed, fnv1a64("forget")))
                         : SplitSpec(args.forget_indices);
    spec.validate(prob.data);
    Dataset retain = split(prob.data, spec).retain;

    const std::size_t total_steps = ckpt.step_index + args.rewind_depth;
    const auto& c = prob.model->constants();
    Certificate cert;
    if (args.sigma) {
        if (*args.sigma < 0.0) throw ValueError("sigma must be nonnegative");
        cert = calibrate_sigma(PrivacyBudget{1.0, 1e-5}, c.grad_bound, c.smoothness,
                               prob.data.size(), spec.forget_count(), ckpt.eta, total_steps,
                               args.rewind_depth);
        cert.sigma = *args.sigma;  // explicit override; epsilon fields stay advisory
        cert.epsilon = achieved_epsilon(cert.distance_bound, *args.sigma, cert.delta);
    } else {
        const PrivacyBudget budget{args.epsilon.value_or(1.0), args.delta.value_or(1e-5)};
        cert = calibrate_sigma(budget, c.grad_bound, c.smoothness, prob.data.size(),
                               spec.forget_count(), ckpt.eta, total_steps, args.rewind_depth);
    }
    if (cert.epsilon_warning)
        std::cerr << "warning: epsilon > 1; the classical Gaussian-mechanism constant is "
                     "calibrated for epsilon <= 1\n";

    GaussianStream rng(args.seed, "unlearn-noise");
    UnlearnResult res = unlearn(*prob.model, retain, ckpt, args.rewind_depth, cert.sigma, rng);

    Checkpoint out = ckpt;
    out.step_index = total_steps;
    out.theta = res.theta_perturbed;
    save_checkpoint(out, args.out_dir + "/theta_unlearned.bin");
    out.theta = res.theta_pre_noise;
    save_checkpoint(out, args.out_dir + "/theta_unlearned_prenoise.bin");
    write_text(args.out_dir + "/certificate.txt", cert.to_kv());
    write_text(args.out_dir + "/certificate.csv",
               Certificate::csv_header() + "\n" + cert.csv_row() + "\n");

    std::cout << "sigma=" << fmt_g17(cert.sigma) << "\n";
    std::cout << "certificate=" << args.out_dir << "/certificate.txt\n";
    std::cout << "weights=" << args.out_dir << "/theta_unlearned.bin\n";
    return kOk;
}

int cmd_calibrate(const CalibrateArgs& args) {
    double G, L;
    if (args.grad_bound && args.smoothness) {
        G = *args.grad_bound;
        L = *args.smoothness;
    } else if (!args.problem.empty()) {
        Problem prob = make_problem(args.problem, args.seed, args.n, args.dim);
        G = prob.model->constants().grad_bound;
        L = prob.model->constants().smoothness;
    } else {
        throw ValueError("calibrate needs --problem or explicit --G and --L");
    }
    const PrivacyBudget budget{args.epsilon, args.delta};
    std::string csv = "K,h,sigma,distance_bound\n";
    for (std::size_t k = 0; k <= args.steps; ++k) {
        Certificate cert = calibrate_sigma(budget, G, L, args.n, args.forget_count, args.eta,
                                           args.steps, k);
        csv += std::to_string(k) + "," + fmt_g17(cert.h_value) + "," + fmt_g17(cert.sigma) +
               "," + fmt_g17(cert.distance_bound) + "\n";
    }
    if (args.out_path.empty())
        std::cout << csv;
    else
        write_text(args.out_path, csv);
    return kOk;
}

int cmd_verify(const VerifyArgs& args) {
    VerifyConfig cfg;
    cfg.problems = args.problems;
    cfg.seeds = args.seeds;
    cfg.data_sizes = args.data_sizes;
    cfg.forget_sizes = args.forget_sizes;
    cfg.step_counts = args.step_counts;
    cfg.rewind_fractions = args.rewind_fractions;
    cfg.budget = PrivacyBudget{args.epsilon, args.delta};
    cfg.noise_draws = args.noise_draws;
    cfg.fault_grad_scale = args.fault_grad_scale;
    cfg.threads = args.threads;
    cfg.base_seed = args.seed;
    cfg.keep_steps = true;

    VerificationReport report = run_verification(cfg);
    ensure_dir(args.out_dir);

    std::string steps_csv = "problem,seed,n,m,T,K,t,delta_measured,delta_bound,margin\n";
    std::string runs_csv =
        "problem,seed,n,m,T,K,violations,final_distance,final_bound,achieved_eps,target_eps,"
        "sigma,gradnorm_lhs,gradnorm_rhs,pl_measured,pl_bound,pass\n";
    for (const RunOutcome& r : report.runs) {
        const std::string key = r.key.problem + "," + std::to_string(r.key.seed) + "," +
                                std::to_string(r.key.n) + "," + std::to_string(r.key.m) + "," +
                                std::to_string(r.key.steps) + "," +
                                std::to_string(r.key.rewind_depth);
        for (const StepCheck& s : r.steps_learning)
            steps_csv += key + "," + std::to_string(s.t) + "," + fmt_g17(s.measured) + "," +
                         fmt_g17(s.bound) + "," + fmt_g17(s.bound - s.measured) + "\n";
        runs_csv += key + "," + std::to_string(r.coupling_violations) + "," +
                    fmt_g17(r.final_distance) + "," + fmt_g17(r.final_bound) + "," +
                    fmt_g17(r.achieved_eps) + "," + fmt_g17(r.certificate.epsilon) + "," +
                    fmt_g17(r.certificate.sigma) + "," + fmt_g17(r.gradnorm.lhs) + "," +
                    fmt_g17(r.gradnorm.rhs) + "," +
                    (r.has_pl ? fmt_g17(r.pl.measured) : "n/a") + "," +
                    (r.has_pl ? fmt_g17(r.pl.bound) : "n/a") + "," + (r.pass ? "1" : "0") + "\n";
    }
    write_text(args.out_dir + "/verify_steps.csv", steps_csv);
    write_text(args.out_dir + "/verify_runs.csv", runs_csv);

    std::string summary;
    summary += strprintf("runs=%zu\n", report.runs.size());
    summary += strprintf("coupling_violations=%zu\n", report.coupling_violations);
    summary += strprintf("privacy_violations=%zu\n", report.privacy_violations);
    summary += strprintf("utility_failures=%zu\n", report.utility_failures);
    summary += strprintf("pl_failures=%zu\n", report.pl_failures);
    summary += strprintf("tube_exits=%zu\n", report.tube_exits);
    summary += strprintf("pass=%d\n", report.pass ? 1 : 0);
    write_text(args.out_dir + "/verify_summary.txt", summary);
    std::cout << summary;
    std::cout << "wall_seconds=" << fmt_g17(report.wall_seconds) << "\n";
    return report.pass ? kOk : kFailure;
}

int cmd_bench(const BenchArgs& args) {
    Problem prob = make_problem(args.problem, args.seed, args.n);
    ensure_dir(args.out_dir);
    const auto& c = prob.model->constants();
    const double eta =
        args.eta > 0.0 ? args.eta
                       : 0.95 * step_size_cap(c.smoothness, args.n, args.forget_count);

    SplitSpec spec = random_split(args.n, args.forget_count, mix64(args.seed, fnv1a64("forget")));
    Dataset retain = split(prob.data, spec).retain;

    auto counting = std::make_shared<CountingLossModel>(prob.model);
    using clock = std::chrono::steady_clock;

    TrainConfig cfg{eta, args.steps, args.rewind_depth, args.seed, args.steps, args.forget_count,
                    false};
    const auto t0 = clock::now();
    TrainResult tr = train(*counting, prob.data, prob.theta0, cfg, prob.name);
    const double train_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    const std::uint64_t train_grads = counting->grad_evals();

    counting->reset();
    GaussianStream rng(args.seed, "bench-noise");
    const auto t1 = clock::now();
    UnlearnResult ul = unlearn(*counting, retain, tr.checkpoint, args.rewind_depth, 0.0, rng);
    const double unlearn_seconds = std::chrono::duration<double>(clock::now() - t1).count();
    const std::uint64_t unlearn_grads = counting->grad_evals();
    (void)ul;

    // checkpoint reconstruction cost, timed from the final weights
    counting->reset();
    RewindStats stats;
    const auto t2 = clock::now();
    double rewind_seconds = 0.0;
    std::string rewind_note = "n/a";
    if (eta * c.smoothness < 1.0) {
        rewind(*counting, prob.data, tr.theta_final, eta, args.rewind_depth, ProxConfig{},
               &stats);
        rewind_seconds = std::chrono::duration<double>(clock::now() - t2).count();
        rewind_note = std::to_string(stats.inner_iterations);
    }

    std::string counts;
    counts += "train_grad_evals=" + std::to_string(train_grads) + "\n";
    counts += strprintf("train_grad_evals_expected=%zu\n", args.steps * args.n);
    counts += "unlearn_grad_evals=" + std::to_string(unlearn_grads) + "\n";
    counts += strprintf("unlearn_grad_evals_expected=%zu\n",
                        args.rewind_depth * (args.n - args.forget_count));
    counts += "rewind_inner_iterations=" + rewind_note + "\n";
    counts += "rewind_grad_evals=" + std::to_string(stats.gradient_evals) + "\n";
    counts += strprintf("compute_ratio_K_over_T=%.17g\n",
                        static_cast<double>(args.rewind_depth) / static_cast<double>(args.steps));
    write_text(args.out_dir + "/bench_counts.txt", counts);

    // wall clock is inherently nondeterministic; it lives in a sidecar
    std::string timing;
    timing += "train_seconds=" + fmt_g17(train_seconds) + "\n";
    timing += "unlearn_seconds=" + fmt_g17(unlearn_seconds) + "\n";
    timing += "rewind_seconds=" + fmt_g17(rewind_seconds) + "\n";
    write_text(args.out_dir + "/bench_timing.txt", timing);

    std::cout << counts;
    return kOk;
}

// ---------------------------------------------------------------------------
// argument parsing
// ---------------------------------------------------------------------------

int run_main(int argc, char** argv) {
    CLI::App app{"rewind-to-delete: gradient-descent learning, rewind unlearning, and "
                 "certification harness"};
    app.require_subcommand(1);
    const auto with_config = [](CLI::App* cmd) {
        cmd->set_config("--config", "", "flat key=value configuration file");
        cmd->allow_config_extras(CLI::config_extras_mode::error);
    };

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "gradient descent with checkpoint capture");
    train_cmd->add_option("--problem", train_args.problem, "built-in problem name")->required();
    train_cmd->add_option("--n", train_args.n, "training set size");
    train_cmd->add_option("--d", train_args.dim, "feature dimension (0: problem default)");
    train_cmd->add_option("--seed", train_args.seed, "master seed");
    train_cmd->add_option("--eta", train_args.eta, "step size")->required();
    train_cmd->add_option("--T", train_args.steps, "iterations")->required();
    train_cmd->add_option("--K", train_args.rewind_depth, "rewind depth (checkpoint at T-K)");
    train_cmd->add_option("--m", train_args.planned_forget,
                          "planned forget count for the step-size constraint");
    train_cmd->add_option("--record-stride", train_args.record_stride, "trajectory stride");
    train_cmd->add_option("--data", train_args.data_path, "dataset CSV (else synthesized)");
    train_cmd->add_option("--out-dir", train_args.out_dir, "artifact directory");
    train_cmd->add_flag("!--no-theta-cols", train_args.theta_columns,
                        "omit theta columns from the trajectory CSV");

    RewindArgs rewind_args;
    auto* rewind_cmd =
        app.add_subcommand("rewind", "reconstruct a checkpoint via the proximal point method");
    rewind_cmd->add_option("--problem", rewind_args.problem)->required();
    rewind_cmd->add_option("--data", rewind_args.data_path, "full dataset CSV")->required();
    rewind_cmd->add_option("--weights", rewind_args.weights_path, "final-weights file")
        ->required();
    rewind_cmd->add_option("--K", rewind_args.rewind_depth, "steps to rewind")->required();
    rewind_cmd->add_option("--tau", rewind_args.tolerance, "inner residual tolerance");
    rewind_cmd->add_option("--seed", rewind_args.seed);
    rewind_cmd->add_option("--checkpoint-out", rewind_args.checkpoint_out)->required();

    UnlearnArgs unlearn_args;
    double u_eps = 0.0, u_delta = 0.0, u_sigma = 0.0;
    auto* unlearn_cmd = app.add_subcommand("unlearn", "rewind-to-descent unlearning");
    unlearn_cmd->add_option("--problem", unlearn_args.problem)->required();
    unlearn_cmd->add_option("--data", unlearn_args.data_path, "full dataset CSV")->required();
    unlearn_cmd->add_option("--checkpoint", unlearn_args.checkpoint_path)->required();
    unlearn_cmd->add_option("--K", unlearn_args.rewind_depth, "descent steps on the retain set")
        ->required();
    unlearn_cmd->add_option("--m", unlearn_args.forget_count, "forget count (seeded choice)");
    unlearn_cmd->add_option("--forget", unlearn_args.forget_indices,
                            "explicit forget indices (overrides --m)");
    auto* eps_opt = unlearn_cmd->add_option("--epsilon", u_eps, "privacy budget epsilon");
    unlearn_cmd->add_option("--delta", u_delta, "privacy budget delta")->needs(eps_opt);
    auto* sigma_opt = unlearn_cmd->add_option("--sigma", u_sigma, "explicit noise level");
    sigma_opt->excludes(eps_opt);
    eps_opt->excludes(sigma_opt);
    unlearn_cmd->add_option("--seed", unlearn_args.seed);
    unlearn_cmd->add_option("--out-dir", unlearn_args.out_dir);

    CalibrateArgs cal_args;
    double c_G = 0.0, c_L = 0.0;
    auto* cal_cmd = app.add_subcommand("calibrate", "noise table over K = 0..T");
    cal_cmd->add_option("--problem", cal_args.problem);
    cal_cmd->add_option("--n", cal_args.n)->required();
    cal_cmd->add_option("--d", cal_args.dim);
    cal_cmd->add_option("--seed", cal_args.seed);
    auto* g_opt = cal_cmd->add_option("--G", c_G, "explicit gradient bound");
    auto* l_opt = cal_cmd->add_option("--L", c_L, "explicit smoothness");
    cal_cmd->add_option("--m", cal_args.forget_count)->required();
    cal_cmd->add_option("--eta", cal_args.eta)->required();
    cal_cmd->add_option("--T", cal_args.steps)->required();
    cal_cmd->add_option("--epsilon", cal_args.epsilon);
    cal_cmd->add_option("--delta", cal_args.delta);
    cal_cmd->add_option("--out", cal_args.out_path, "CSV path (default stdout)");

    VerifyArgs verify_args;
    auto* verify_cmd = app.add_subcommand("verify", "coupling, privacy, and utility checks");
    verify_cmd->add_option("--problem", verify_args.problems, "problems (default: all)");
    verify_cmd->add_option("--seeds", verify_args.seeds, "seed count");
    verify_cmd->add_option("--n", verify_args.data_sizes, "dataset sizes");
    verify_cmd->add_option("--m", verify_args.forget_sizes, "forget sizes");
    verify_cmd->add_option("--T", verify_args.step_counts, "iteration counts");
    verify_cmd->add_option("--k-frac", verify_args.rewind_fractions, "rewind fractions of T");
    verify_cmd->add_option("--epsilon", verify_args.epsilon);
    verify_cmd->add_option("--delta", verify_args.delta);
    verify_cmd->add_option("--draws", verify_args.noise_draws, "Monte-Carlo noise draws");
    verify_cmd->add_option("--fault-g-scale", verify_args.fault_grad_scale,
                           "scale G for the bound checks (fault injection)");
    verify_cmd->add_option("--threads", verify_args.threads);
    verify_cmd->add_option("--seed", verify_args.seed);
    verify_cmd->add_option("--out-dir", verify_args.out_dir);

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "compute cost of unlearn vs retrain");
    bench_cmd->add_option("--problem", bench_args.problem)->required();
    bench_cmd->add_option("--n", bench_args.n);
    bench_cmd->add_option("--seed", bench_args.seed);
    bench_cmd->add_option("--m", bench_args.forget_count);
    bench_cmd->add_option("--T", bench_args.steps)->required();
    bench_cmd->add_option("--K", bench_args.rewind_depth)->required();
    bench_cmd->add_option("--eta", bench_args.eta, "step size (default 0.95 * cap)");
    bench_cmd->add_option("--out-dir", bench_args.out_dir);

    with_config(train_cmd);
    with_config(rewind_cmd);
    with_config(unlearn_cmd);
    with_config(cal_cmd);
    with_config(verify_cmd);
    with_config(bench_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*train_cmd) return cmd_train(train_args);
        if (*rewind_cmd) return cmd_rewind(rewind_args);
        if (*unlearn_cmd) {
            if (eps_opt->count() > 0) unlearn_args.epsilon = u_eps;
            if (unlearn_cmd->count("--delta") > 0) unlearn_args.delta = u_delta;
            if (sigma_opt->count() > 0) unlearn_args.sigma = u_sigma;
            return cmd_unlearn(unlearn_args);
        }
        if (*cal_cmd) {
            if (g_opt->count() > 0) cal_args.grad_bound = c_G;
            if (l_opt->count() > 0) cal_args.smoothness = c_L;
            return cmd_calibrate(cal_args);
        }
        if (*verify_cmd) return cmd_verify(verify_args);
        if (*bench_cmd) return cmd_bench(bench_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

}  // namespace r2d::cli
