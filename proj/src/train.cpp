#include "r2d/train.hpp"

#include <cstring>
#include <fstream>
#include <limits>

#include "r2d/problems.hpp"

namespace r2d {

const ParamVector& Trajectory::at_step(std::size_t step) const {
    for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i] == step) return thetas[i];
    }
    throw ValueError(strprintf("step %zu was not recorded in the trajectory", step));
}

TrainResult train(const LossModel& model, const Dataset& data, const ParamVector& theta0,
                  const TrainConfig& cfg, const std::string& problem_name) {
    require_finite(theta0, "theta0");
    if (cfg.rewind_depth > cfg.steps)
        throw ValueError(strprintf("rewind depth K=%zu exceeds T=%zu", cfg.rewind_depth,
                                   cfg.steps));
    if (cfg.record_stride == 0) throw ValueError("record_stride must be positive");
    const double cap = step_size_cap(model.constants().smoothness, data.size(),
                                     cfg.planned_forget);
    if (!(cfg.eta > 0.0) || cfg.eta > cap * (1.0 + 1e-12))
        throw ValueError(strprintf(
            "step-size constraint violated: eta=%.17g exceeds min{1/L, n/(2(n-m)L)}=%.17g",
            cfg.eta, cap));

    const std::size_t ckpt_step = cfg.steps - cfg.rewind_depth;
    ParamVector theta(theta0);
    ParamVector grad, scratch;
    Trajectory traj;

    auto record = [&](std::size_t step, double grad_norm) {
        traj.steps.push_back(step);
        traj.thetas.push_back(theta);
        traj.grad_norms.push_back(grad_norm);
        if (cfg.log_loss) traj.losses.push_back(empirical_loss(model, data, theta));
    };
    auto should_record = [&](std::size_t step) {
        return step % cfg.record_stride == 0 || step == ckpt_step || step == cfg.steps;
    };

    Checkpoint ckpt;
    ckpt.eta = cfg.eta;
    ckpt.dataset_fingerprint = data.fingerprint();
    ckpt.problem = problem_name;
    ckpt.step_index = ckpt_step;
    if (ckpt_step == 0) ckpt.theta = theta;

    // exactly one gradient evaluation per step: the descent pass touches each
    // sample T * n times and the bench counters rely on that
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        empirical_grad(model, data, theta, grad, scratch);
        if (should_record(t)) record(t, norm(grad));
        axpy(-cfg.eta, grad, theta);
        if (!all_finite(theta))
            throw EvalError(strprintf("training diverged: non-finite iterate at step %zu", t + 1));
        if (t + 1 == ckpt_step) ckpt.theta = theta;
    }
    const double final_grad_norm =
        cfg.log_loss ? norm(empirical_grad(model, data, theta))
                     : std::numeric_limits<double>::quiet_NaN();
    record(cfg.steps, final_grad_norm);

    return TrainResult{std::move(theta), std::move(ckpt), std::move(traj)};
}

ParamVector perturb(const ParamVector& theta, double sigma, GaussianStream& rng) {
    if (sigma < 0.0) throw ValueError("sigma must be nonnegative");
    require_finite(theta, "theta");
    if (sigma == 0.0) return theta;
    ParamVector out(theta);
    for (double& x : out) x += sigma * rng.normal();
    return out;
}

// ---------------------------------------------------------------------------
// checkpoint file io
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'R', '2', 'D', '\0'};

template <typename T>
void put(std::ofstream& out, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw IoError("truncated checkpoint file: " + path);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint file: " + path);
    out.write(kMagic, 4);
    put<std::uint16_t>(out, ckpt.version);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.theta.size()));
    put<std::uint64_t>(out, ckpt.step_index);
    put<double>(out, ckpt.eta);
    put<std::uint64_t>(out, ckpt.dataset_fingerprint);
    for (double v : ckpt.theta) put<double>(out, v);
    put<std::uint8_t>(out, ckpt.reconstructed ? 1 : 0);
    put<std::uint16_t>(out, static_cast<std::uint16_t>(ckpt.problem.size()));
    out.write(ckpt.problem.data(), static_cast<std::streamsize>(ckpt.problem.size()));
    if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw IoError("not a checkpoint file (bad magic): " + path);
    Checkpoint ckpt;
    ckpt.version = get<std::uint16_t>(in, path);
    if (ckpt.version != 1)
        throw IoError(strprintf("unsupported checkpoint version %u in %s", ckpt.version,
                                path.c_str()));
    const auto d = get<std::uint32_t>(in, path);
    ckpt.step_index = get<std::uint64_t>(in, path);
    ckpt.eta = get<double>(in, path);
    ckpt.dataset_fingerprint = get<std::uint64_t>(in, path);
    ckpt.theta.resize(d);
    for (std::uint32_t i = 0; i < d; ++i) ckpt.theta[i] = get<double>(in, path);
    ckpt.reconstructed = get<std::uint8_t>(in, path) != 0;
    const auto len = get<std::uint16_t>(in, path);
    ckpt.problem.resize(len);
    in.read(ckpt.problem.data(), len);
    if (!in) throw IoError("truncated checkpoint file: " + path);
    return ckpt;
}

void ensure_fingerprint(const Checkpoint& ckpt, const Dataset& data) {
    if (ckpt.dataset_fingerprint != data.fingerprint())
        throw IoError(strprintf(
            "checkpoint/dataset mismatch: checkpoint was produced for fingerprint %016llx, "
            "dataset has %016llx",
            static_cast<unsigned long long>(ckpt.dataset_fingerprint),
            static_cast<unsigned long long>(data.fingerprint())));
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path, bool include_theta) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write trajectory file: " + path);
    out << "step,loss,grad_norm";
    if (include_theta && !traj.thetas.empty()) {
        for (std::size_t j = 0; j < traj.thetas[0].size(); ++j) out << ",theta_" << j;
    }
    out << "\n";
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        out << traj.steps[i] << ",";
        out << (i < traj.losses.size() ? fmt_g17(traj.losses[i]) : "") << ",";
        out << fmt_g17(traj.grad_norms[i]);
        if (include_theta) {
            for (double v : traj.thetas[i]) out << "," << fmt_g17(v);
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace r2d
