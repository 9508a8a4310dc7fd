#pragma once

#include "sscl/dataio/schema.hpp"
#include "sscl/random.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace sscl::augment {

struct MaskingConfig {
  double ratio = 0.3;
  std::uint64_t seed = 0;
  // When non-empty, whole feature slots are masked instead of single
  // dimensions; k then counts slots.
  std::vector<dataio::FeatureSlot> groups;
};

struct ViewPair {
  Eigen::VectorXd x_i;
  Eigen::VectorXd x_j;
};

// k = round(ratio * units), units being dimensions or groups.
std::size_t masked_count(double ratio, std::size_t units);

// Zeroes k positions (or groups) drawn uniformly without replacement.
// Throws Error{InvalidShape} for an empty input or groups that do not tile x,
// Error{Config} for a ratio outside [0, 1].
Eigen::VectorXd mask_view(const Eigen::VectorXd& x, const MaskingConfig& config, Rng& rng);

// Two independent mask_view draws from the same stream.
ViewPair augment_pair(const Eigen::VectorXd& x, const MaskingConfig& config, Rng& rng);

// Stream owned by one (epoch, sample) so augmentation can run in any order.
Rng sample_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t sample_index);

}  // namespace sscl::augment
