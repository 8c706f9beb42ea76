#include "tiger/graph_types.hpp"

#include "tiger/util.hpp"

#include <algorithm>
#include <charconv>

namespace tiger {

AdjacencyMatrix AdjacencyMatrix::from_pairs(std::int64_t n, std::vector<Coord> pairs) {
  AdjacencyMatrix adj;
  adj.n = n;
  adj.edges.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    if (i == j) continue;
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw std::out_of_range("edge (" + std::to_string(i) + "," + std::to_string(j) +
                              ") outside n=" + std::to_string(n));
    }
    adj.edges.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(adj.edges.begin(), adj.edges.end());
  adj.edges.erase(std::unique(adj.edges.begin(), adj.edges.end()), adj.edges.end());
  return adj;
}

std::vector<std::int64_t> AdjacencyMatrix::degrees() const {
  std::vector<std::int64_t> deg(static_cast<std::size_t>(n), 0);
  for (auto [i, j] : edges) {
    ++deg[static_cast<std::size_t>(i)];
    ++deg[static_cast<std::size_t>(j)];
  }
  return deg;
}

bool AdjacencyMatrix::has_edge(std::int64_t i, std::int64_t j) const {
  Coord key{std::min(i, j), std::max(i, j)};
  return std::binary_search(edges.begin(), edges.end(), key);
}

std::string serialize_matrix(const CooMatrix& matrix) {
  std::string body;
  body.reserve(matrix.ones.size() * 12);
  for (auto [i, j] : matrix.ones) {
    body += std::to_string(i);
    body += '\t';
    body += std::to_string(j);
    body += '\n';
  }
  std::string out = "SPARSE v1\t" + std::to_string(matrix.rows) + "\t" + std::to_string(matrix.cols) +
                    "\t" + std::to_string(matrix.ones.size()) + "\t" + hex64(fnv1a64(body)) + "\n";
  out += body;
  return out;
}

namespace {

std::int64_t parse_int(const std::string& s, const char* what) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError(std::string("sparse matrix: bad ") + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

CooMatrix parse_matrix(const std::string& text) {
  auto nl = text.find('\n');
  if (nl == std::string::npos) throw FormatError("sparse matrix: missing header");
  auto header = split(std::string_view(text).substr(0, nl), '\t');
  if (header.size() != 5 || header[0] != "SPARSE v1") {
    throw FormatError("sparse matrix: header mismatch");
  }
  CooMatrix m;
  m.rows = parse_int(header[1], "row count");
  m.cols = parse_int(header[2], "column count");
  const auto nnz = parse_int(header[3], "nnz");
  const std::string body = text.substr(nl + 1);
  if (hex64(fnv1a64(body)) != header[4]) {
    throw FormatError("sparse matrix: checksum mismatch (file truncated or modified)");
  }
  m.ones.reserve(static_cast<std::size_t>(nnz));
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto end = body.find('\n', pos);
    if (end == std::string::npos) throw FormatError("sparse matrix: unterminated line");
    auto fields = split(std::string_view(body).substr(pos, end - pos), '\t');
    if (fields.size() != 2) throw FormatError("sparse matrix: malformed entry line");
    Coord c{parse_int(fields[0], "row index"), parse_int(fields[1], "column index")};
    if (c.first < 0 || c.first >= m.rows || c.second < 0 || c.second >= m.cols) {
      throw FormatError("sparse matrix: index out of range");
    }
    if (!m.ones.empty() && !(m.ones.back() < c)) {
      throw FormatError("sparse matrix: entries not in strict lexicographic order");
    }
    m.ones.push_back(c);
    pos = end + 1;
  }
  if (static_cast<std::int64_t>(m.ones.size()) != nnz) {
    throw FormatError("sparse matrix: nnz mismatch");
  }
  return m;
}

void save_matrix(const CooMatrix& matrix, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_matrix(matrix));
}

CooMatrix load_matrix(const std::filesystem::path& path) { return parse_matrix(read_file(path)); }

void save_adjacency(const AdjacencyMatrix& adj, const std::filesystem::path& path) {
  save_matrix(adj.as_coo(), path);
}

AdjacencyMatrix load_adjacency(const std::filesystem::path& path) {
  auto coo = load_matrix(path);
  if (coo.rows != coo.cols) throw FormatError("adjacency file is not square: " + path.string());
  for (auto [i, j] : coo.ones) {
    if (i >= j) throw FormatError("adjacency file must store edges once with i < j");
  }
  return AdjacencyMatrix{coo.rows, std::move(coo.ones)};
}

}  // namespace tiger
