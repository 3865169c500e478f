#include "r2d/dataset.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <sstream>

#include "r2d/rng.hpp"

namespace r2d {

namespace {

void append_le_double(std::vector<unsigned char>& buf, double x) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(x));
    std::memcpy(&bits, &x, sizeof(bits));
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>((bits >> (8 * i)) & 0xff));
}

std::uint64_t hash_samples(const std::vector<Sample>& samples) {
    std::vector<unsigned char> buf;
    for (const Sample& s : samples) {
        const auto nf = static_cast<std::uint32_t>(s.features.size());
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((nf >> (8 * i)) & 0xff));
        for (double f : s.features) append_le_double(buf, f);
        append_le_double(buf, s.label);
    }
    return fnv1a64(buf.data(), buf.size());
}

}  // namespace

Dataset::Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw ValueError("dataset must contain at least one sample");
    const std::size_t d = samples_[0].features.size();
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        if (samples_[i].features.size() != d)
            throw ValueError(strprintf("sample %zu has %zu features, expected %zu", i,
                                       samples_[i].features.size(), d));
        if (!all_finite(samples_[i].features) || !std::isfinite(samples_[i].label))
            throw ValueError(strprintf("sample %zu contains a non-finite value", i));
    }
    fingerprint_ = hash_samples(samples_);
}

SplitSpec::SplitSpec(std::vector<std::size_t> forget_indices) : forget_(std::move(forget_indices)) {
    for (std::size_t i = 1; i < forget_.size(); ++i) {
        if (forget_[i] <= forget_[i - 1])
            throw ValueError("forget indices must be strictly increasing");
    }
}

void SplitSpec::validate(const Dataset& data) const {
    const std::size_t n = data.size();
    if (forget_.size() >= n)
        throw ValueError(strprintf("empty retain set: cannot forget %zu of %zu samples",
                                   forget_.size(), n));
    if (!forget_.empty() && forget_.back() >= n)
        throw ValueError(strprintf("forget index %zu out of range for n=%zu", forget_.back(), n));
}

SplitResult split(const Dataset& data, const SplitSpec& spec) {
    spec.validate(data);
    std::vector<Sample> retain;
    std::vector<Sample> forget;
    retain.reserve(data.size() - spec.forget_count());
    forget.reserve(spec.forget_count());
    std::size_t next = 0;
    const auto& idx = spec.forget_indices();
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (next < idx.size() && idx[next] == i) {
            forget.push_back(data[i]);
            ++next;
        } else {
            retain.push_back(data[i]);
        }
    }
    return {Dataset(std::move(retain)), std::move(forget)};
}

SplitSpec random_split(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m >= n) throw ValueError("random_split requires m < n");
    GaussianStream g(seed, "split");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    // partial Fisher-Yates over the first m slots
    for (std::size_t i = 0; i < m; ++i) {
        auto off = static_cast<std::size_t>(g.uniform() * static_cast<double>(n - i));
        if (off >= n - i) off = n - i - 1;
        std::swap(pool[i], pool[i + off]);
    }
    std::vector<std::size_t> idx(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(idx.begin(), idx.end());
    return SplitSpec(std::move(idx));
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("dataset file is empty: " + path);
    std::vector<Sample> samples;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str())
                throw IoError(strprintf("%s:%zu: cannot parse '%s' as a real", path.c_str(),
                                        lineno, cell.c_str()));
            vals.push_back(v);
        }
        if (vals.size() < 2)
            throw IoError(strprintf("%s:%zu: expected at least one feature and a label",
                                    path.c_str(), lineno));
        Sample s;
        s.label = vals.back();
        vals.pop_back();
        s.features = std::move(vals);
        samples.push_back(std::move(s));
    }
    return Dataset(std::move(samples));
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset file: " + path);
    const std::size_t d = data.feature_dim();
    for (std::size_t j = 0; j < d; ++j) out << "f" << j << ",";
    out << "label\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double f : data[i].features) out << fmt_g17(f) << ",";
        out << fmt_g17(data[i].label) << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace r2d
