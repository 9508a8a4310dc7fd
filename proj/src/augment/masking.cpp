#include "sscl/augment/masking.hpp"

#include "sscl/error.hpp"

#include <cmath>
#include <string>

namespace sscl::augment {

std::size_t masked_count(double ratio, std::size_t units) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw Error(ErrorCode::Config, "masking ratio must be in [0, 1], got " + std::to_string(ratio));
  }
  const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(units)));
  return std::min(k, units);
}

Eigen::VectorXd mask_view(const Eigen::VectorXd& x, const MaskingConfig& config, Rng& rng) {
  if (x.size() == 0) throw Error(ErrorCode::InvalidShape, "cannot mask an empty vector");
  Eigen::VectorXd out = x;
  if (config.groups.empty()) {
    const auto n = static_cast<std::size_t>(x.size());
    for (const auto p : sample_without_replacement(rng, n, masked_count(config.ratio, n))) {
      out[static_cast<Eigen::Index>(p)] = 0.0;
    }
    return out;
  }
  std::size_t covered = 0;
  for (const auto& g : config.groups) {
    if (g.offset != covered) throw Error(ErrorCode::InvalidShape, "mask groups must tile the input in order");
    covered += g.width;
  }
  if (covered != static_cast<std::size_t>(x.size())) {
    throw Error(ErrorCode::InvalidShape, "mask groups cover " + std::to_string(covered) + " of " +
                                             std::to_string(x.size()) + " positions");
  }
  const std::size_t n = config.groups.size();
  for (const auto g : sample_without_replacement(rng, n, masked_count(config.ratio, n))) {
    const auto& slot = config.groups[g];
    out.segment(static_cast<Eigen::Index>(slot.offset), static_cast<Eigen::Index>(slot.width)).setZero();
  }
  return out;
}

ViewPair augment_pair(const Eigen::VectorXd& x, const MaskingConfig& config, Rng& rng) {
  ViewPair pair;
  pair.x_i = mask_view(x, config, rng);
  pair.x_j = mask_view(x, config, rng);
  return pair;
}

Rng sample_stream(std::uint64_t seed, std::uint64_t epoch, std::uint64_t sample_index) {
  return Rng(derive_seed(derive_seed(seed, "augment", epoch), "sample", sample_index));
}

}  // namespace sscl::augment
