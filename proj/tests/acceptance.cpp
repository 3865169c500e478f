// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
// The heavy sweep (criteria 1, 4, 5, 6) shares a single verification pass:
// every built-in problem, 20 seeds, n in {50, 200}, m in {1, 5}, T in
// {50, 200}, K in {0, T/4, T/2, T}.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "mpfr_oracle.hpp"
#include "r2d/certify.hpp"
#include "r2d/rewind.hpp"
#include "test_support.hpp"

using namespace r2d;
using namespace r2d::testing;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    std::printf("%-4s %s (%s)\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    if (!pass) ++failures;
}

double wall_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

VerificationReport full_sweep() {
    VerifyConfig cfg;
    cfg.problems = problem_names();
    cfg.seeds = 20;
    cfg.data_sizes = {50, 200};
    cfg.forget_sizes = {1, 5};
    cfg.step_counts = {50, 200};
    cfg.rewind_fractions = {0.0, 0.25, 0.5, 1.0};
    cfg.budget = PrivacyBudget{1.0, 1e-5};
    cfg.noise_draws = 1000;
    cfg.threads = 2;
    cfg.base_seed = 1;
    return run_verification(cfg);
}

void criterion_1_coupling(const VerificationReport& sweep) {
    std::size_t step_checks = 0;
    for (const auto& r : sweep.runs)
        step_checks += r.key.steps + r.key.rewind_depth + 2;
    const bool pass = sweep.coupling_violations == 0 && sweep.tube_exits == 0 &&
                      sweep.wall_seconds <= 300.0 && !sweep.runs.empty();
    report("C1 coupling-bound suite", pass,
           strprintf("%zu runs, %zu step checks, %zu violations, %zu tube exits, %.1fs",
                     sweep.runs.size(), step_checks, sweep.coupling_violations,
                     sweep.tube_exits, sweep.wall_seconds));
}

void criterion_2_rewind() {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t checks = 0, bad = 0;
    double worst_ratio = 0.0;
    for (const auto& name : problem_names()) {
        Problem p = make_problem(name, 207, 40);
        const double L = p.model->constants().smoothness;
        const double eta = std::min(0.25 / L, 0.95 * step_size_cap(L, 40, 0));
        const std::size_t T = 24;
        for (std::size_t K : {1ul, 5ul, 10ul, 20ul}) {
            TrainConfig cfg{eta, T, K, 0};
            TrainResult res = train(*p.model, p.data, p.theta0, cfg, name);
            ParamVector back = rewind(*p.model, p.data, res.theta_final, eta, K, ProxConfig{});
            const double tau = 1e-10 * (1.0 + norm(res.theta_final));
            const double tol = 10.0 * tau * std::pow(1.0 + eta * L, static_cast<double>(K));

            const double ckpt_err = distance(back, res.checkpoint.theta);
            ParamVector replay = back;
            for (std::size_t t = 0; t < K; ++t)
                replay = add_scaled(replay, -eta, empirical_grad(*p.model, p.data, replay));
            const double replay_err = distance(replay, res.theta_final);

            checks += 2;
            if (ckpt_err > tol) ++bad;
            if (replay_err > tol) ++bad;
            worst_ratio = std::max({worst_ratio, ckpt_err / tol, replay_err / tol});
        }
    }
    report("C2 rewind round-trip", bad == 0,
           strprintf("%zu checks, %zu over tolerance, worst err/tol %.3g, %.1fs", checks, bad,
                     worst_ratio, wall_since(t0)));
}

void criterion_3_calibration() {
    bool zeros_ok = true;
    // exact zeros at K = T and m = 0, across a spread of tuples
    GaussianStream g(303, "c3-tuples");
    std::size_t mono_bad = 0, mpfr_bad = 0, tuples = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double L = 0.5 + 5.0 * g.uniform();
        const std::size_t n = 4 + static_cast<std::size_t>(g.uniform() * 400);
        const std::size_t m = 1 + static_cast<std::size_t>(g.uniform() * (n / 4.0));
        const std::size_t T = 2 + static_cast<std::size_t>(g.uniform() * 120);
        const double eta = (0.05 + 0.9 * g.uniform()) * step_size_cap(L, n, m);
        const double G = 0.2 + 6.0 * g.uniform();
        const double eps = 0.2 + 2.0 * g.uniform();
        const double delta = std::pow(10.0, -1.0 - 5.0 * g.uniform());
        const PrivacyBudget budget{eps, delta};
        ++tuples;

        if (calibrate_sigma(budget, G, L, n, m, eta, T, T).sigma != 0.0) zeros_ok = false;
        if (calibrate_sigma(budget, G, L, n, 0, eta, T, T / 2).sigma != 0.0) zeros_ok = false;

        double prev = h_of_k(eta, L, n, m, T, 0);
        for (std::size_t K = 1; K <= T; ++K) {
            const double cur = h_of_k(eta, L, n, m, T, K);
            if (!(cur < prev)) ++mono_bad;
            prev = cur;
        }
        for (std::size_t K : {0ul, T / 4, T / 2, (3 * T) / 4, T}) {
            const double mine = calibrate_sigma(budget, G, L, n, m, eta, T, K).sigma;
            const double oracle = mpfr_sigma(eps, delta, G, L, n, m, eta, T, K);
            if (std::isinf(mine) != std::isinf(oracle)) {
                ++mpfr_bad;
            } else if (!std::isinf(mine) && !approx_rel(mine, oracle, 1e-12)) {
                ++mpfr_bad;
            }
        }
    }
    report("C3 calibration identities", zeros_ok && mono_bad == 0 && mpfr_bad == 0,
           strprintf("%zu tuples, zeros %s, %zu monotonicity breaks, %zu high-precision "
                     "mismatches",
                     tuples, zeros_ok ? "exact" : "BROKEN", mono_bad, mpfr_bad));
}

void criterion_4_privacy(const VerificationReport& sweep) {
    report("C4 privacy accounting", sweep.privacy_violations == 0,
           strprintf("achieved epsilon <= target on %zu/%zu runs",
                     sweep.runs.size() - sweep.privacy_violations, sweep.runs.size()));
}

void criterion_5_gradnorm(const VerificationReport& sweep) {
    report("C5 utility Eq.(3) gradient-norm", sweep.utility_failures == 0,
           strprintf("%zu/%zu reports pass at 1000 draws",
                     sweep.runs.size() - sweep.utility_failures, sweep.runs.size()));
}

void criterion_6_pl(const VerificationReport& sweep) {
    std::size_t pl_runs = 0, pl_bad = 0, noise_free_bad = 0;
    for (const auto& r : sweep.runs) {
        if (!r.has_pl) continue;
        ++pl_runs;
        if (!r.pl.pass) ++pl_bad;
        if (!r.pl.noise_free_pass) ++noise_free_bad;
    }
    report("C6 utility Corollary 1 (PL)", pl_runs > 0 && pl_bad == 0 && noise_free_bad == 0,
           strprintf("%zu PL runs, %zu MC failures, %zu noise-free failures", pl_runs, pl_bad,
                     noise_free_bad));
}

void criterion_7_generalization() {
    const auto t0 = std::chrono::steady_clock::now();
    GeneralizationConfig cfg;
    cfg.problem = "scalar_quadratic";
    cfg.n = 50;
    cfg.m = 5;
    cfg.steps = 50;
    cfg.rewind_depth = 25;
    cfg.dataset_redraws = 20;
    cfg.noise_draws = 200;
    cfg.fresh_samples = 2000;
    cfg.sigma_cap = 0.25;
    cfg.seed = 77;
    GeneralizationReport rep = generalization_report(cfg);
    report("C7 generalization Corollary 2", rep.pass,
           strprintf("gap %.6g <= bound %.6g over %zu redraws, %.1fs", rep.measured,
                     rep.bound_avg, rep.redraws, wall_since(t0)));
}

void criterion_8_gradients() {
    std::size_t points = 0, bad = 0;
    for (const auto& name : problem_names()) {
        Problem p = make_problem(name, 808, 40);
        GaussianStream g(808, "c8");
        RegionSampler sampler = ball_sampler(p.tube);
        for (int i = 0; i < 100; ++i) {
            ParamVector theta = sampler(g);
            ParamVector an = empirical_grad(*p.model, p.data, theta);
            ParamVector fd = finite_diff_grad(*p.model, p.data, theta, 1e-5);
            ++points;
            if (distance(an, fd) > 1e-5 * std::max(1.0, norm(an))) ++bad;
        }
    }
    report("C8 gradient correctness", bad == 0,
           strprintf("%zu finite-difference points, %zu beyond rel 1e-5", points, bad));
}

void criterion_9_fault_injection() {
    const auto t0 = std::chrono::steady_clock::now();
    VerifyConfig cfg;
    cfg.problems = {"logistic"};
    cfg.seeds = 20;
    cfg.data_sizes = {50, 200};
    cfg.forget_sizes = {1, 5};
    cfg.step_counts = {50, 200};
    cfg.rewind_fractions = {0.0, 0.25, 0.5, 1.0};
    cfg.noise_draws = 10;
    cfg.check_utility = false;
    cfg.fault_grad_scale = 0.1;
    cfg.threads = 2;
    cfg.base_seed = 1;
    VerificationReport rep = run_verification(cfg);
    report("C9 fault sensitivity (G / 10)", rep.coupling_violations > 0,
           strprintf("%zu violations across %zu logistic runs, %.1fs",
                     rep.coupling_violations, rep.runs.size(), wall_since(t0)));
}

void criterion_10_efficiency() {
    Problem p = make_problem("logistic", 10, 50);
    const std::size_t m = 5, T = 40, K = 10;
    const double eta = 0.95 * step_size_cap(p.model->constants().smoothness, 50, m);
    SplitSpec spec = random_split(50, m, 17);
    Dataset retain = split(p.data, spec).retain;
    auto counting = std::make_shared<CountingLossModel>(p.model);

    TrainConfig cfg{eta, T, K, 0, T, m, false};
    TrainResult res = train(*counting, p.data, p.theta0, cfg);
    const std::uint64_t train_evals = counting->grad_evals();
    counting->reset();
    GaussianStream rng(0, "bench");
    unlearn(*counting, retain, res.checkpoint, K, 0.0, rng);
    const std::uint64_t unlearn_evals = counting->grad_evals();

    const bool pass = train_evals == T * 50 && unlearn_evals == K * (50 - m);
    report("C10 efficiency counters", pass,
           strprintf("retrain %llu (want %zu), unlearn %llu (want %zu)",
                     static_cast<unsigned long long>(train_evals), T * 50,
                     static_cast<unsigned long long>(unlearn_evals), K * (50 - m)));
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    const auto t0 = std::chrono::steady_clock::now();

    VerificationReport sweep = full_sweep();
    criterion_1_coupling(sweep);
    criterion_2_rewind();
    criterion_3_calibration();
    criterion_4_privacy(sweep);
    criterion_5_gradnorm(sweep);
    criterion_6_pl(sweep);
    criterion_7_generalization();
    criterion_8_gradients();
    criterion_9_fault_injection();
    criterion_10_efficiency();

    std::printf("%s total=%.1fs\n", failures == 0 ? "ALL PASS" : "FAILURES", wall_since(t0));
    return failures == 0 ? 0 : 1;
}
