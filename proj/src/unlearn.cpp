#include "r2d/unlearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace r2d {

double h_of_k(double eta, double smoothness, std::size_t n, std::size_t m, std::size_t steps,
              std::size_t rewind_depth) {
    if (!(eta > 0.0) || !(smoothness > 0.0)) throw ValueError("eta and L must be positive");
    if (m >= n) throw ValueError("h_of_k requires m < n");
    if (rewind_depth > steps) throw ValueError("h_of_k requires K <= T");
    const double a = eta * smoothness * static_cast<double>(n) / static_cast<double>(n - m);
    const double b = eta * smoothness;
    const double la = static_cast<double>(steps - rewind_depth) * std::log1p(a);
    const double lb = static_cast<double>(rewind_depth) * std::log1p(b);
    if (la + lb > 709.0) return std::numeric_limits<double>::infinity();
    // expm1 keeps (1+a)^{T-K} - 1 exact at K = T and accurate when the first
    // factor is close to zero
    return std::expm1(la) * std::exp(lb);
}

Certificate calibrate_sigma(const PrivacyBudget& budget, double grad_bound, double smoothness,
                            std::size_t n, std::size_t m, double eta, std::size_t steps,
                            std::size_t rewind_depth) {
    budget.validate();
    const double h = h_of_k(eta, smoothness, n, m, steps, rewind_depth);

    Certificate cert;
    cert.epsilon = budget.epsilon;
    cert.delta = budget.delta;
    cert.rewind_depth = rewind_depth;
    cert.steps = steps;
    cert.forget_count = m;
    cert.data_count = n;
    cert.eta = eta;
    cert.grad_bound = grad_bound;
    cert.smoothness = smoothness;
    cert.h_value = h;
    cert.epsilon_warning = budget.epsilon > 1.0;
    if (m == 0) {
        // zero forget set: nothing to mask, regardless of h
        cert.h_value = h;
        cert.distance_bound = 0.0;
        cert.sigma = 0.0;
        return cert;
    }
    cert.distance_bound = 2.0 * static_cast<double>(m) * grad_bound * h /
                          (smoothness * static_cast<double>(n));
    cert.sigma = cert.distance_bound * std::sqrt(2.0 * std::log(1.25 / budget.delta)) /
                 budget.epsilon;
    cert.vacuous = !std::isfinite(cert.sigma);
    return cert;
}

bool Certificate::self_consistent() const {
    if (forget_count == 0 || rewind_depth == steps) return sigma == 0.0;
    if (vacuous) return std::isinf(sigma);
    const double expect = distance_bound * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
    return std::abs(sigma - expect) <= 1e-12 * std::max(std::abs(expect), 1e-300);
}

std::size_t min_rewind_for_noise(double sigma_max, const PrivacyBudget& budget, double grad_bound,
                                 double smoothness, std::size_t n, std::size_t m, double eta,
                                 std::size_t steps) {
    if (sigma_max < 0.0) throw ValueError("sigma_max must be nonnegative");
    auto sigma_at = [&](std::size_t k) {
        return calibrate_sigma(budget, grad_bound, smoothness, n, m, eta, steps, k).sigma;
    };
    if (sigma_at(0) <= sigma_max) return 0;
    std::size_t lo = 0;       // sigma(lo) > sigma_max
    std::size_t hi = steps;   // sigma(T) = 0 <= sigma_max
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (sigma_at(mid) <= sigma_max)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

UnlearnResult unlearn(const LossModel& model, const Dataset& retain, const Checkpoint& ckpt,
                      std::size_t rewind_depth, double sigma, GaussianStream& rng,
                      std::vector<ParamVector>* iterates, std::vector<double>* step_grad_sq) {
    if (sigma < 0.0) throw ValueError("sigma must be nonnegative");
    require_finite(ckpt.theta, "checkpoint theta");
    const double eta = ckpt.eta;
    if (!(eta > 0.0)) throw ValueError("checkpoint carries a non-positive step size");

    ParamVector theta(ckpt.theta);
    ParamVector grad, scratch;
    if (iterates) {
        iterates->clear();
        iterates->push_back(theta);
    }
    if (step_grad_sq) step_grad_sq->clear();
    for (std::size_t t = 0; t < rewind_depth; ++t) {
        empirical_grad(model, retain, theta, grad, scratch);
        if (step_grad_sq) step_grad_sq->push_back(squared_norm(grad));
        axpy(-eta, grad, theta);
        if (!all_finite(theta))
            throw EvalError(strprintf("unlearning diverged at step %zu", t + 1));
        if (iterates) iterates->push_back(theta);
    }
    UnlearnResult res;
    res.theta_perturbed = perturb(theta, sigma, rng);
    res.theta_pre_noise = std::move(theta);
    return res;
}

SequentialResult sequential_unlearn(const LossModel& model, const Dataset& data,
                                    const Checkpoint& ckpt,
                                    const std::vector<SplitSpec>& requests,
                                    const PrivacyBudget& budget, std::size_t steps,
                                    GaussianStream& rng) {
    budget.validate();
    ensure_fingerprint(ckpt, data);
    if (steps < ckpt.step_index)
        throw ValueError("advertised T is smaller than the checkpoint step index");
    const std::size_t K = steps - ckpt.step_index;

    SequentialResult out{{}, ckpt.theta, ckpt.theta};
    const auto& c = model.constants();
    const std::size_t n = data.size();
    std::size_t prev_m = 0;
    std::vector<std::size_t> prev_idx;
    for (std::size_t r = 0; r < requests.size(); ++r) {
        requests[r].validate(data);
        const auto& idx = requests[r].forget_indices();
        if (idx.size() < prev_m ||
            !std::includes(idx.begin(), idx.end(), prev_idx.begin(), prev_idx.end()))
            throw ValueError(strprintf("request %zu does not contain the cumulative forget set",
                                       r));
        if (idx.size() >= n) throw ValueError("cumulative forget set would empty the dataset");
        prev_idx = idx;
        prev_m = idx.size();

        Dataset retain = split(data, requests[r]).retain;
        Certificate cert = calibrate_sigma(budget, c.grad_bound, c.smoothness, n, idx.size(),
                                           ckpt.eta, steps, K);
        UnlearnResult res = unlearn(model, retain, ckpt, K, cert.sigma, rng);
        out.theta_pre_noise = std::move(res.theta_pre_noise);
        out.theta_perturbed = std::move(res.theta_perturbed);
        out.certificates.push_back(cert);
    }
    return out;
}

// ---------------------------------------------------------------------------
// certificate serialization
// ---------------------------------------------------------------------------

std::string Certificate::to_kv() const {
    std::ostringstream out;
    out << "epsilon=" << fmt_g17(epsilon) << "\n";
    out << "delta=" << fmt_g17(delta) << "\n";
    out << "sigma=" << fmt_g17(sigma) << "\n";
    out << "K=" << rewind_depth << "\n";
    out << "T=" << steps << "\n";
    out << "m=" << forget_count << "\n";
    out << "n=" << data_count << "\n";
    out << "eta=" << fmt_g17(eta) << "\n";
    out << "G=" << fmt_g17(grad_bound) << "\n";
    out << "L=" << fmt_g17(smoothness) << "\n";
    out << "h=" << fmt_g17(h_value) << "\n";
    out << "distance_bound=" << fmt_g17(distance_bound) << "\n";
    out << "vacuous=" << (vacuous ? 1 : 0) << "\n";
    out << "epsilon_warning=" << (epsilon_warning ? 1 : 0) << "\n";
    return out.str();
}

std::string Certificate::csv_header() {
    return "epsilon,delta,sigma,K,T,m,n,eta,G,L,h,distance_bound,vacuous,epsilon_warning";
}

std::string Certificate::csv_row() const {
    std::ostringstream out;
    out << fmt_g17(epsilon) << "," << fmt_g17(delta) << "," << fmt_g17(sigma) << ","
        << rewind_depth << "," << steps << "," << forget_count << "," << data_count << ","
        << fmt_g17(eta) << "," << fmt_g17(grad_bound) << "," << fmt_g17(smoothness) << ","
        << fmt_g17(h_value) << "," << fmt_g17(distance_bound) << "," << (vacuous ? 1 : 0) << ","
        << (epsilon_warning ? 1 : 0);
    return out.str();
}

}  // namespace r2d
