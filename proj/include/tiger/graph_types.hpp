#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tiger {

using Coord = std::pair<std::int64_t, std::int64_t>;

/// Binary n x m matrix as a sorted, duplicate-free coordinate list.
struct CooMatrix {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<Coord> ones;

  friend bool operator==(const CooMatrix&, const CooMatrix&) = default;
};

/// Undirected simple graph on n nodes. Each edge is stored once with i < j;
/// self-loops are never stored (normalization adds them).
struct AdjacencyMatrix {
  std::int64_t n = 0;
  std::vector<Coord> edges;

  static AdjacencyMatrix from_pairs(std::int64_t n, std::vector<Coord> pairs);

  std::vector<std::int64_t> degrees() const;
  bool has_edge(std::int64_t i, std::int64_t j) const;
  CooMatrix as_coo() const { return {n, n, edges}; }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;
};

/// Binary entity-by-token matrix X. column_tokens[j] is the token id of column j.
struct FeatureMatrix {
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::vector<Coord> ones;
  std::vector<std::int32_t> column_tokens;

  CooMatrix as_coo() const { return {n, m, ones}; }

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sparse file: header "SPARSE v1\tn\tm\tnnz\tchecksum", then "i\tj" lines in
// lexicographic order. checksum is FNV-1a 64 (16 hex digits) over the body.
void save_matrix(const CooMatrix& matrix, const std::filesystem::path& path);
CooMatrix load_matrix(const std::filesystem::path& path);

void save_adjacency(const AdjacencyMatrix& adj, const std::filesystem::path& path);
AdjacencyMatrix load_adjacency(const std::filesystem::path& path);

std::string serialize_matrix(const CooMatrix& matrix);
CooMatrix parse_matrix(const std::string& text);

}  // namespace tiger
