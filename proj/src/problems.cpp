#include "r2d/problems.hpp"

#include <algorithm>
#include <cmath>

namespace r2d {

ParamVector finite_diff_grad(const LossModel& model, const Dataset& data, const ParamVector& theta,
                             double h) {
    if (!(h > 0.0)) throw ValueError("finite difference step h must be positive");
    require_finite(theta, "theta");
    ParamVector g(theta.size());
    ParamVector probe(theta);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + h;
        const double fp = empirical_loss(model, data, probe);
        probe[i] = theta[i] - h;
        const double fm = empirical_loss(model, data, probe);
        probe[i] = theta[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

RegionSampler ball_sampler(Ball region) {
    return [region = std::move(region)](GaussianStream& rng) {
        const std::size_t d = region.center.size();
        ParamVector dir = rng.normal_vector(d);
        const double len = norm(dir);
        const double u = rng.uniform();
        const double r = region.radius * std::pow(u, 1.0 / static_cast<double>(d));
        ParamVector theta(region.center);
        if (len > 0.0) axpy(r / len, dir, theta);
        return theta;
    };
}

ConstantsReport verify_constants(const LossModel& model, const Dataset& data,
                                 const RegionSampler& sampler, std::size_t trials,
                                 GaussianStream& rng) {
    if (trials < 1) throw ValueError("verify_constants requires trials >= 1");
    ConstantsReport rep;
    rep.trials = trials;
    rep.declared_grad_bound = model.constants().grad_bound;
    rep.declared_smoothness = model.constants().smoothness;
    ParamVector g1, g2;
    for (std::size_t t = 0; t < trials; ++t) {
        const ParamVector a = sampler(rng);
        const ParamVector b = sampler(rng);
        const double sep = distance(a, b);
        for (std::size_t i = 0; i < data.size(); ++i) {
            model.sample_grad(data[i], a, g1);
            model.sample_grad(data[i], b, g2);
            rep.max_grad_norm = std::max(rep.max_grad_norm, std::max(norm(g1), norm(g2)));
            if (sep > 1e-12) {
                double diff = 0.0;
                for (std::size_t k = 0; k < g1.size(); ++k) {
                    const double e = g1[k] - g2[k];
                    diff += e * e;
                }
                rep.max_smoothness_ratio =
                    std::max(rep.max_smoothness_ratio, std::sqrt(diff) / sep);
            }
        }
    }
    rep.grad_bound_ok = rep.max_grad_norm <= rep.declared_grad_bound * 1.01;
    rep.smoothness_ok = rep.max_smoothness_ratio <= rep.declared_smoothness * 1.01;
    rep.pass = rep.grad_bound_ok && rep.smoothness_ok;
    return rep;
}

PlReport pl_check(const LossModel& model, const Dataset& data, double mu, double f_star,
                  const std::vector<ParamVector>& points) {
    if (!(mu > 0.0)) throw ValueError("pl_check requires mu > 0");
    PlReport rep;
    rep.min_slack = std::numeric_limits<double>::infinity();
    rep.min_ratio = std::numeric_limits<double>::infinity();
    ParamVector g, scratch;
    for (const ParamVector& x : points) {
        empirical_grad(model, data, x, g, scratch);
        const double half_gsq = 0.5 * squared_norm(g);
        const double gap = empirical_loss(model, data, x) - f_star;
        rep.min_slack = std::min(rep.min_slack, half_gsq - mu * gap);
        if (gap > 1e-9 * (1.0 + std::abs(f_star)))
            rep.min_ratio = std::min(rep.min_ratio, half_gsq / gap);
        ++rep.points_checked;
    }
    rep.pass = rep.min_slack >= -1e-9 * (1.0 + std::abs(f_star));
    return rep;
}

double step_size_cap(double smoothness, std::size_t n, std::size_t m) {
    if (!(smoothness > 0.0)) throw ValueError("smoothness constant must be positive");
    if (m >= n) throw ValueError("step_size_cap requires m < n");
    const double nn = static_cast<double>(n);
    const double nm = static_cast<double>(n - m);
    return std::min(1.0 / smoothness, nn / (2.0 * nm * smoothness));
}

// ---------------------------------------------------------------------------
// built-in losses
// ---------------------------------------------------------------------------

namespace {

double stable_sigmoid(double t) {
    // 1 / (1 + exp(-t)) without overflow
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double stable_log1pexp(double t) {
    // log(1 + exp(t))
    if (t > 0.0) return t + std::log1p(std::exp(-t));
    return std::log1p(std::exp(t));
}

// f_z(theta) = 0.5 (theta - z)^2, z = features[0], dim 1
class ScalarQuadraticLoss final : public LossModel {
  public:
    ScalarQuadraticLoss() {
        constants_.smoothness = 1.0;
        constants_.pl_mu = 1.0;
    }
    double sample_loss(const Sample& z, const ParamVector& theta) const override {
        const double d = theta[0] - z.features[0];
        return 0.5 * d * d;
    }
    void sample_grad(const Sample& z, const ParamVector& theta, ParamVector& out) const override {
        out.assign(1, theta[0] - z.features[0]);
    }
    std::optional<double> grad_norm_ball_bound(const Dataset& data, const ParamVector& c,
                                               double r) const override {
        double b = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i)
            b = std::max(b, std::abs(c[0] - data[i].features[0]) + r);
        return b;
    }
    std::optional<double> empirical_minimum(const Dataset& data) const override {
        double mean = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) mean += data[i].features[0];
        mean /= static_cast<double>(data.size());
        double v = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double d = mean - data[i].features[0];
            v += 0.5 * d * d;
        }
        return v / static_cast<double>(data.size());
    }
};

// f_z(theta) = 0.5 (<x, theta> - y)^2
class LeastSquaresLoss final : public LossModel {
  public:
    double sample_loss(const Sample& z, const ParamVector& theta) const override {
        const double r = dot(z.features, theta) - z.label;
        return 0.5 * r * r;
    }
    void sample_grad(const Sample& z, const ParamVector& theta, ParamVector& out) const override {
        const double r = dot(z.features, theta) - z.label;
        out.resize(theta.size());
        for (std::size_t k = 0; k < theta.size(); ++k) out[k] = r * z.features[k];
    }
    std::optional<double> grad_norm_ball_bound(const Dataset& data, const ParamVector& c,
                                               double r) const override {
        double b = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double xn = norm(data[i].features);
            const double res = std::abs(dot(data[i].features, c) - data[i].label) + xn * r;
            b = std::max(b, xn * res);
        }
        return b;
    }
};

// f_z(theta) = log(1 + exp(-y <x, theta>)), y in {-1, +1}
class LogisticLoss final : public LossModel {
  public:
    double sample_loss(const Sample& z, const ParamVector& theta) const override {
        return stable_log1pexp(-z.label * dot(z.features, theta));
    }
    void sample_grad(const Sample& z, const ParamVector& theta, ParamVector& out) const override {
        const double s = stable_sigmoid(-z.label * dot(z.features, theta));
        out.resize(theta.size());
        const double c = -z.label * s;
        for (std::size_t k = 0; k < theta.size(); ++k) out[k] = c * z.features[k];
    }
    std::optional<double> grad_norm_ball_bound(const Dataset& data, const ParamVector&,
                                               double) const override {
        // ||grad|| < ||x|| everywhere, independent of the ball
        double b = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) b = std::max(b, norm(data[i].features));
        return b;
    }
};

// f_z(x) = (x - z)^2 + 3 sin^2(x): nonconvex, PL. The sine term carries no
// per-sample shift so the empirical loss keeps a single basin for every draw
// of the data; each per-sample loss still has regions with f'' < 0.
class SinePlLoss final : public LossModel {
  public:
    SinePlLoss() {
        constants_.smoothness = 8.0;  // f'' = 2 + 6 cos(2x) in [-4, 8]
    }
    double sample_loss(const Sample& z, const ParamVector& theta) const override {
        const double u = theta[0] - z.features[0];
        const double s = std::sin(theta[0]);
        return u * u + 3.0 * s * s;
    }
    void sample_grad(const Sample& z, const ParamVector& theta, ParamVector& out) const override {
        out.assign(1, 2.0 * (theta[0] - z.features[0]) + 3.0 * std::sin(2.0 * theta[0]));
    }
    std::optional<double> grad_norm_ball_bound(const Dataset& data, const ParamVector& c,
                                               double r) const override {
        double b = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i)
            b = std::max(b, 2.0 * (std::abs(c[0] - data[i].features[0]) + r) + 3.0);
        return b;
    }
    std::optional<double> empirical_minimum(const Dataset& data) const override {
        double mean = 0.0;
        double sq = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            mean += data[i].features[0];
            sq += data[i].features[0] * data[i].features[0];
        }
        const double n = static_cast<double>(data.size());
        mean /= n;
        const double offset = sq / n - mean * mean;  // mean (x-z)^2 = (x-zbar)^2 + var
        // single-variable objective g(x) = (x - zbar)^2 + var + 3 sin^2 x;
        // stationary points satisfy |x - zbar| <= 1.5, so a bracket of +-4 is safe
        auto g = [&](double x) {
            const double u = x - mean;
            const double s = std::sin(x);
            return u * u + offset + 3.0 * s * s;
        };
        double best_x = mean;
        double best = g(mean);
        const int grid = 8001;
        for (int i = 0; i < grid; ++i) {
            const double x = mean - 4.0 + 8.0 * static_cast<double>(i) / (grid - 1);
            const double v = g(x);
            if (v < best) {
                best = v;
                best_x = x;
            }
        }
        // golden-section refinement around the grid winner
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double lo = best_x - 0.002, hi = best_x + 0.002;
        double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
        double f1 = g(x1), f2 = g(x2);
        for (int it = 0; it < 120 && hi - lo > 1e-14; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - gr * (hi - lo);
                f1 = g(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + gr * (hi - lo);
                f2 = g(x2);
            }
        }
        return std::min(best, std::min(f1, f2));
    }
};

// One tanh hidden layer, squared loss. theta = [W1 (H x p), b1, w2, b2].
class TinyMlpLoss final : public LossModel {
  public:
    TinyMlpLoss(std::size_t inputs, std::size_t hidden) : p_(inputs), h_(hidden) {}

    std::size_t dim() const { return p_ * h_ + 2 * h_ + 1; }

    double sample_loss(const Sample& z, const ParamVector& theta) const override {
        const double e = predict(z, theta) - z.label;
        return 0.5 * e * e;
    }

    void sample_grad(const Sample& z, const ParamVector& theta, ParamVector& out) const override {
        out.assign(theta.size(), 0.0);
        thread_local ParamVector hidden;
        hidden.resize(h_);
        const double* w1 = theta.data();
        const double* b1 = theta.data() + p_ * h_;
        const double* w2 = theta.data() + p_ * h_ + h_;
        const double b2 = theta[p_ * h_ + 2 * h_];
        double yhat = b2;
        for (std::size_t j = 0; j < h_; ++j) {
            double a = b1[j];
            for (std::size_t k = 0; k < p_; ++k) a += w1[j * p_ + k] * z.features[k];
            hidden[j] = std::tanh(a);
            yhat += w2[j] * hidden[j];
        }
        const double e = yhat - z.label;
        double* gw1 = out.data();
        double* gb1 = out.data() + p_ * h_;
        double* gw2 = out.data() + p_ * h_ + h_;
        for (std::size_t j = 0; j < h_; ++j) {
            const double back = e * w2[j] * (1.0 - hidden[j] * hidden[j]);
            for (std::size_t k = 0; k < p_; ++k) gw1[j * p_ + k] = back * z.features[k];
            gb1[j] = back;
            gw2[j] = e * hidden[j];
        }
        out[p_ * h_ + 2 * h_] = e;
    }

  private:
    double predict(const Sample& z, const ParamVector& theta) const {
        const double* w1 = theta.data();
        const double* b1 = theta.data() + p_ * h_;
        const double* w2 = theta.data() + p_ * h_ + h_;
        double yhat = theta[p_ * h_ + 2 * h_];
        for (std::size_t j = 0; j < h_; ++j) {
            double a = b1[j];
            for (std::size_t k = 0; k < p_; ++k) a += w1[j * p_ + k] * z.features[k];
            yhat += w2[j] * std::tanh(a);
        }
        return yhat;
    }

    std::size_t p_;
    std::size_t h_;
};

// ---------------------------------------------------------------------------
// data generators
// ---------------------------------------------------------------------------

Dataset gen_scalar_data(GaussianStream& g, std::size_t n) {
    std::vector<Sample> s(n);
    for (auto& z : s) z.features = {g.normal()};
    return Dataset(std::move(s));
}

Dataset gen_least_squares_data(GaussianStream& g, std::size_t n, std::size_t d) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    ParamVector w = g.normal_vector(d);
    std::vector<Sample> s(n);
    for (auto& z : s) {
        z.features = g.normal_vector(d, scale);
        z.label = dot(z.features, w) + 0.1 * g.normal();
    }
    return Dataset(std::move(s));
}

Dataset gen_logistic_data(GaussianStream& g, std::size_t n, std::size_t d) {
    ParamVector w = g.normal_vector(d, 1.0 / std::sqrt(static_cast<double>(d)));
    std::vector<Sample> s(n);
    for (auto& z : s) {
        z.features = g.normal_vector(d);
        z.label = (dot(z.features, w) + 0.3 * g.normal()) > 0.0 ? 1.0 : -1.0;
    }
    return Dataset(std::move(s));
}

Dataset gen_mlp_data(GaussianStream& g, std::size_t n, std::size_t p) {
    std::vector<Sample> s(n);
    for (auto& z : s) {
        z.features = g.normal_vector(p);
        z.label = std::sin(z.features[0]) + 0.5 * std::cos(1.3 * z.features[p > 1 ? 1 : 0]);
    }
    return Dataset(std::move(s));
}

// ---------------------------------------------------------------------------
// instantiation: pilot runs, training tube, certified constants
// ---------------------------------------------------------------------------

// Plain GD loop used only to discover the region training visits.
struct PilotResult {
    double max_excursion = 0.0;
    double max_sample_grad = 0.0;
};

PilotResult pilot_run(const LossModel& model, const Dataset& data, const ParamVector& theta0,
                      double eta, std::size_t steps) {
    PilotResult r;
    ParamVector theta(theta0);
    ParamVector grad, scratch;
    for (std::size_t t = 0; t < steps; ++t) {
        grad.assign(theta.size(), 0.0);
        scratch.resize(theta.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            model.sample_grad(data[i], theta, scratch);
            r.max_sample_grad = std::max(r.max_sample_grad, norm(scratch));
            axpy(1.0, scratch, grad);
        }
        scale(grad, 1.0 / static_cast<double>(data.size()));
        axpy(-eta, grad, theta);
        if (!all_finite(theta)) throw EvalError("pilot run diverged");
        r.max_excursion = std::max(r.max_excursion, distance(theta, theta0));
    }
    return r;
}

double sampled_smoothness(const LossModel& model, const Dataset& data, const Ball& region,
                          std::size_t pairs, GaussianStream& rng) {
    const RegionSampler sampler = ball_sampler(region);
    double worst = 0.0;
    ParamVector g1, g2;
    for (std::size_t t = 0; t < pairs; ++t) {
        const ParamVector a = sampler(rng);
        const ParamVector b = sampler(rng);
        const double sep = distance(a, b);
        if (sep <= 1e-12) continue;
        for (std::size_t i = 0; i < data.size(); ++i) {
            model.sample_grad(data[i], a, g1);
            model.sample_grad(data[i], b, g2);
            double diff = 0.0;
            for (std::size_t k = 0; k < g1.size(); ++k) {
                const double e = g1[k] - g2[k];
                diff += e * e;
            }
            worst = std::max(worst, std::sqrt(diff) / sep);
        }
    }
    return worst;
}

double sampled_grad_bound(const LossModel& model, const Dataset& data, const Ball& region,
                          std::size_t points, GaussianStream& rng) {
    const RegionSampler sampler = ball_sampler(region);
    double worst = 0.0;
    ParamVector g;
    for (std::size_t t = 0; t < points; ++t) {
        const ParamVector a = sampler(rng);
        for (std::size_t i = 0; i < data.size(); ++i) {
            model.sample_grad(data[i], a, g);
            worst = std::max(worst, norm(g));
        }
    }
    return worst;
}

// Certify a PL constant for the retained empirical loss on a 1-d grid spanning
// the tube; the declared value keeps 10% headroom below the observed minimum
// ratio.
std::optional<double> certify_pl_mu_1d(const LossModel& model, const Dataset& data,
                                       const Ball& tube) {
    const auto f_star = model.empirical_minimum(data);
    if (!f_star) return std::nullopt;
    const double c = tube.center[0];
    const double r = std::max(tube.radius + 2.0, 12.0);
    const int grid = 20001;
    std::vector<ParamVector> pts;
    pts.reserve(grid);
    for (int i = 0; i < grid; ++i)
        pts.push_back({c - r + 2.0 * r * static_cast<double>(i) / (grid - 1)});
    PlReport rep = pl_check(model, data, 1e-12, *f_star, pts);
    if (!std::isfinite(rep.min_ratio) || rep.min_ratio <= 0.0) return std::nullopt;
    return 0.9 * rep.min_ratio;
}

struct Recipe {
    std::size_t default_dim;
    bool global_constants;
    std::shared_ptr<LossModel> (*make_model)(std::size_t dim);
    Dataset (*make_data)(GaussianStream&, std::size_t n, std::size_t dim);
};

std::shared_ptr<LossModel> make_scalar_model(std::size_t) {
    return std::make_shared<ScalarQuadraticLoss>();
}
std::shared_ptr<LossModel> make_ls_model(std::size_t) { return std::make_shared<LeastSquaresLoss>(); }
std::shared_ptr<LossModel> make_logistic_model(std::size_t) {
    return std::make_shared<LogisticLoss>();
}
std::shared_ptr<LossModel> make_sine_model(std::size_t) { return std::make_shared<SinePlLoss>(); }
std::shared_ptr<LossModel> make_mlp_model(std::size_t dim) {
    (void)dim;
    return std::make_shared<TinyMlpLoss>(2, 8);
}

Dataset data_scalar(GaussianStream& g, std::size_t n, std::size_t) { return gen_scalar_data(g, n); }
Dataset data_ls(GaussianStream& g, std::size_t n, std::size_t d) {
    return gen_least_squares_data(g, n, d);
}
Dataset data_logistic(GaussianStream& g, std::size_t n, std::size_t d) {
    return gen_logistic_data(g, n, d);
}
Dataset data_sine(GaussianStream& g, std::size_t n, std::size_t) { return gen_scalar_data(g, n); }
Dataset data_mlp(GaussianStream& g, std::size_t n, std::size_t) { return gen_mlp_data(g, n, 2); }

const Recipe* find_recipe(const std::string& name) {
    static const std::pair<const char*, Recipe> table[] = {
        {"scalar_quadratic", {1, false, &make_scalar_model, &data_scalar}},
        {"least_squares", {5, false, &make_ls_model, &data_ls}},
        {"logistic", {5, true, &make_logistic_model, &data_logistic}},
        {"sine_pl", {1, false, &make_sine_model, &data_sine}},
        {"tiny_mlp", {33, false, &make_mlp_model, &data_mlp}},
    };
    for (const auto& [key, recipe] : table) {
        if (name == key) return &recipe;
    }
    return nullptr;
}

}  // namespace

std::vector<std::string> problem_names() {
    return {"scalar_quadratic", "least_squares", "logistic", "sine_pl", "tiny_mlp"};
}

Problem make_problem_for_data(const std::string& name, Dataset data, std::uint64_t seed) {
    const Recipe* recipe = find_recipe(name);
    if (!recipe) throw ValueError("unknown problem: " + name);

    std::shared_ptr<LossModel> model = recipe->make_model(recipe->default_dim);
    std::size_t dim = recipe->default_dim;
    if (name == "least_squares" || name == "logistic") dim = data.feature_dim();
    if (auto* mlp = dynamic_cast<TinyMlpLoss*>(model.get())) dim = mlp->dim();

    ParamVector theta0 = initial_point(dim, mix64(seed, fnv1a64("init")));

    LossConstants c = model->constants();
    GaussianStream cert_rng(mix64(seed, fnv1a64("certify")), "constants");

    // provisional smoothness where no analytic constant exists
    if (!(c.smoothness > 0.0)) {
        if (name == "least_squares" || name == "logistic") {
            double worst = 0.0;
            for (std::size_t i = 0; i < data.size(); ++i)
                worst = std::max(worst, squared_norm(data[i].features));
            c.smoothness = (name == "logistic") ? worst / 4.0 : worst;
        } else {
            Ball seed_ball{theta0, 2.0};
            c.smoothness = 1.5 * sampled_smoothness(*model, data, seed_ball, 200, cert_rng);
        }
        model->set_constants(c);
    }

    // pilot runs discover the region real configurations will visit; the cap
    // is taken at the largest forget size the desk sweeps use
    const std::size_t n = data.size();
    const std::size_t m_ref = std::min<std::size_t>(n - 1, std::max<std::size_t>(5, n / 10));
    const std::size_t pilot_steps = 256;
    const double eta_hi = 0.95 * step_size_cap(c.smoothness, n, m_ref);
    PilotResult p1 = pilot_run(*model, data, theta0, eta_hi, pilot_steps);
    // the retrain leg on a thinned dataset strays slightly differently
    std::vector<Sample> thin(data.samples().begin() + static_cast<std::ptrdiff_t>(m_ref),
                             data.samples().end());
    PilotResult p2 = pilot_run(*model, Dataset(std::move(thin)), theta0, eta_hi, pilot_steps);

    const double excursion = std::max(p1.max_excursion, p2.max_excursion);
    Ball tube{theta0, std::max(2.0 * excursion, 1e-3)};

    // tube-certified constants
    if (name == "tiny_mlp") {
        const double l_tube = sampled_smoothness(*model, data, tube, 400, cert_rng);
        c.smoothness = std::max(c.smoothness, 1.5 * l_tube);
        const double g_tube = sampled_grad_bound(*model, data, tube, 800, cert_rng);
        c.grad_bound = 2.0 * std::max({g_tube, p1.max_sample_grad, p2.max_sample_grad});
    } else {
        const auto bound = model->grad_norm_ball_bound(data, tube.center, tube.radius);
        c.grad_bound = *bound;
    }

    if (name == "scalar_quadratic" || name == "sine_pl") {
        c.f_star = model->empirical_minimum(data);
        if (name == "sine_pl") {
            c.pl_mu = certify_pl_mu_1d(*model, data, tube);
            if (!c.pl_mu) throw EvalError("sine_pl: PL certification failed for this dataset");
        }
    }
    model->set_constants(c);

    std::optional<PopulationModel> population;
    if (name == "scalar_quadratic") {
        PopulationModel pop;
        pop.f_star = 0.5;  // E_z 0.5 (theta - z)^2 = 0.5 theta^2 + 0.5 for z ~ N(0,1)
        pop.risk = [](const ParamVector& th) { return 0.5 * th[0] * th[0] + 0.5; };
        pop.draw = [](GaussianStream& g) { return Sample{{g.normal()}, 0.0}; };
        population = std::move(pop);
    }

    return Problem{name,
                   dim,
                   std::move(data),
                   std::move(model),
                   std::move(theta0),
                   0.45 / c.smoothness,
                   std::move(tube),
                   recipe->global_constants,
                   std::move(population)};
}

Problem make_problem(const std::string& name, std::uint64_t seed, std::size_t n,
                     std::size_t dim) {
    const Recipe* recipe = find_recipe(name);
    if (!recipe) throw ValueError("unknown problem: " + name);
    if (n < 1) throw ValueError("n must be >= 1");
    std::size_t feature_dim = dim;
    if (feature_dim == 0)
        feature_dim = (name == "least_squares" || name == "logistic") ? 5 : recipe->default_dim;
    GaussianStream g(mix64(seed, fnv1a64(name)), "data");
    Dataset data = recipe->make_data(g, n, feature_dim);
    return make_problem_for_data(name, std::move(data), seed);
}

}  // namespace r2d
