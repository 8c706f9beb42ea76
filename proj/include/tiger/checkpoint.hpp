#pragma once

#include "tiger/numerics/matrix.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tiger {

struct NamedTensor {
  std::string name;
  MatrixF value;
};

/// On-disk layout:
///
///   TIGER-CHECKPOINT v1
///   meta <count>          then <count> lines "key=value"
///   vocab <count>         then <count> token lines
///   tensors <count>       then <count> lines "name rows cols"
///   data
///   <little-endian float32 payload, tensors in manifest order, row-major>
///
/// Text fields use the corpus backslash escapes.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::string> vocabulary;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const;
  const std::string& get(const std::string& key) const;

  std::string serialize() const;
  static Checkpoint parse(const std::string& bytes);
  void save(const std::filesystem::path& path) const;  // atomic
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace tiger
