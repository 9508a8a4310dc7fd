#pragma once

#include "sscl/numgrad/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sscl::numgrad {

// Binary container of named tensors plus a free-form metadata string (the
// model layer stores its JSON config there). Layout, all integers
// little-endian:
//
//   "SSCLCKPT"  u32 version
//   u64 metadata_len, metadata bytes
//   u64 tensor_count, then per tensor:
//     u32 name_len, name bytes, u32 rank, u64 dims[rank], f64 data[prod(dims)]
//
// Doubles are stored as their IEEE-754 bit patterns, so a round trip is exact.
struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::string metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;

  void add(std::string name, Tensor value) { tensors.emplace_back(std::move(name), std::move(value)); }
  const Tensor& at(const std::string& name) const;  // throws Error{Checkpoint}
  bool contains(const std::string& name) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes);

// Written to a temporary sibling and renamed into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace sscl::numgrad
