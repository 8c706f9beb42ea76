#include "tiger/checkpoint.hpp"

#include "tiger/corpus.hpp"
#include "tiger/graph_types.hpp"
#include "tiger/util.hpp"

#include <bit>
#include <cstring>
#include <sstream>
#include <tuple>

namespace tiger {

namespace {

constexpr const char* kMagic = "TIGER-CHECKPOINT v1";

void put_f32_le(std::string& out, float v) {
  static_assert(sizeof(float) == 4);
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

float get_f32_le(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<float>(bits);
}

class LineReader {
 public:
  explicit LineReader(const std::string& s) : s_(s) {}
  std::string next() {
    auto end = s_.find('\n', pos_);
    if (end == std::string::npos) throw FormatError("checkpoint: unexpected end of header");
    std::string line = s_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return line;
  }
  std::size_t count(const std::string& keyword) {
    auto line = next();
    std::istringstream ss(line);
    std::string kw;
    long long n = -1;
    ss >> kw >> n;
    if (kw != keyword || n < 0) throw FormatError("checkpoint: expected '" + keyword + " <count>', got '" + line + "'");
    return static_cast<std::size_t>(n);
  }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

const NamedTensor* Checkpoint::find(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const std::string& Checkpoint::get(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint: missing meta key '" + key + "'");
  return it->second;
}

std::string Checkpoint::serialize() const {
  std::string out = std::string(kMagic) + "\n";
  out += "meta " + std::to_string(meta.size()) + "\n";
  for (const auto& [k, v] : meta) out += escape_field(k) + "=" + escape_field(v) + "\n";
  out += "vocab " + std::to_string(vocabulary.size()) + "\n";
  for (const auto& t : vocabulary) out += escape_field(t) + "\n";
  out += "tensors " + std::to_string(tensors.size()) + "\n";
  for (const auto& t : tensors) {
    out += t.name + " " + std::to_string(t.value.rows()) + " " + std::to_string(t.value.cols()) + "\n";
  }
  out += "data\n";
  for (const auto& t : tensors) {
    for (Eigen::Index i = 0; i < t.value.size(); ++i) put_f32_le(out, t.value.data()[i]);
  }
  return out;
}

Checkpoint Checkpoint::parse(const std::string& bytes) {
  LineReader r(bytes);
  if (r.next() != kMagic) throw FormatError("checkpoint: bad magic");
  Checkpoint c;
  const auto nmeta = r.count("meta");
  for (std::size_t i = 0; i < nmeta; ++i) {
    auto line = r.next();
    auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("checkpoint: bad meta line '" + line + "'");
    c.meta[unescape_field(line.substr(0, eq))] = unescape_field(line.substr(eq + 1));
  }
  const auto nvocab = r.count("vocab");
  c.vocabulary.reserve(nvocab);
  for (std::size_t i = 0; i < nvocab; ++i) c.vocabulary.push_back(unescape_field(r.next()));
  const auto ntensors = r.count("tensors");
  std::vector<std::tuple<std::string, long long, long long>> manifest;
  for (std::size_t i = 0; i < ntensors; ++i) {
    std::istringstream ss(r.next());
    std::string name;
    long long rows = -1, cols = -1;
    ss >> name >> rows >> cols;
    if (name.empty() || rows < 0 || cols < 0) throw FormatError("checkpoint: bad tensor manifest line");
    manifest.emplace_back(name, rows, cols);
  }
  if (r.next() != "data") throw FormatError("checkpoint: missing data marker");
  std::size_t pos = r.pos();
  for (auto& [name, rows, cols] : manifest) {
    const std::size_t count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (pos + 4 * count > bytes.size()) throw FormatError("checkpoint: payload truncated at tensor " + name);
    MatrixF m(rows, cols);
    for (std::size_t i = 0; i < count; ++i) m.data()[i] = get_f32_le(bytes.data() + pos + 4 * i);
    pos += 4 * count;
    c.tensors.push_back({name, std::move(m)});
  }
  if (pos != bytes.size()) throw FormatError("checkpoint: trailing bytes after payload");
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const { write_file_atomic(path, serialize()); }

Checkpoint Checkpoint::load(const std::filesystem::path& path) { return parse(read_file(path)); }

}  // namespace tiger
