#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "r2d/common.hpp"
#include "r2d/vec.hpp"

namespace r2d {

struct Sample {
    std::vector<double> features;
    double label = 0.0;
};

// Ordered, immutable sample container. Order matters: gradient averaging is
// performed in index order so trajectories are bit-reproducible.
class Dataset {
  public:
    explicit Dataset(std::vector<Sample> samples);

    std::size_t size() const { return samples_.size(); }
    std::size_t feature_dim() const { return samples_.empty() ? 0 : samples_[0].features.size(); }
    const Sample& operator[](std::size_t i) const { return samples_[i]; }
    const std::vector<Sample>& samples() const { return samples_; }

    // Order-sensitive content hash over the canonical little-endian byte
    // encoding of every sample; identical content -> identical value across
    // processes and machines.
    std::uint64_t fingerprint() const { return fingerprint_; }

  private:
    std::vector<Sample> samples_;
    std::uint64_t fingerprint_;
};

// The forget request Z: strictly increasing indices into the dataset.
class SplitSpec {
  public:
    SplitSpec() = default;
    explicit SplitSpec(std::vector<std::size_t> forget_indices);

    const std::vector<std::size_t>& forget_indices() const { return forget_; }
    std::size_t forget_count() const { return forget_.size(); }

    // m < n and every index in range; m == n leaves the retained loss undefined.
    void validate(const Dataset& data) const;

  private:
    std::vector<std::size_t> forget_;
};

// D -> (D' = D \ Z, Z), both in original relative order. The forget side is a
// raw sample list because Z may be empty while Dataset requires n >= 1.
struct SplitResult {
    Dataset retain;
    std::vector<Sample> forget;
};
SplitResult split(const Dataset& data, const SplitSpec& spec);

// m distinct indices drawn without replacement, sorted; deterministic in seed.
SplitSpec random_split(std::size_t n, std::size_t m, std::uint64_t seed);

// CSV with header, one sample per row, features then label.
Dataset load_dataset_csv(const std::string& path);
void save_dataset_csv(const Dataset& data, const std::string& path);

}  // namespace r2d
