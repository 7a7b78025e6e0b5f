#include "otgk/gram_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otgk/error.hpp"

namespace otgk {
namespace {

namespace fs = std::filesystem;

constexpr char kMagic[8] = {'O', 'T', 'G', 'K', 'G', 'R', 'A', 'M'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "binary Gram cache assumes a little-endian host");

std::string format_value(double x) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, x,
                                 std::chars_format::general, 17);
  return std::string(buffer, ptr);
}

double parse_value(const std::string& token, const fs::path& path, long line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(path.string(), line, "bad number '" + token + "'");
  }
  return value;
}

class Writer {
 public:
  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const char*>(data);
    buffer_.insert(buffer_.end(), p, p + size);
  }
  template <typename T>
  void value(T x) {
    bytes(&x, sizeof x);
  }
  void string(const std::string& s) {
    value(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  const std::vector<char>& buffer() const { return buffer_; }

 private:
  std::vector<char> buffer_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> data) : data_(std::move(data)) {}

  bool bytes(void* out, std::size_t size) {
    if (size > data_.size() - pos_) return false;
    std::memcpy(out, data_.data() + pos_, size);
    pos_ += size;
    return true;
  }
  template <typename T>
  bool value(T* x) {
    return bytes(x, sizeof *x);
  }
  bool string(std::string* s) {
    std::uint32_t len = 0;
    if (!value(&len) || len > data_.size() - pos_) return false;
    s->assign(data_.data() + pos_, len);
    pos_ += len;
    return true;
  }
  std::size_t position() const { return pos_; }
  std::size_t size() const { return data_.size(); }
  const char* data() const { return data_.data(); }

 private:
  std::vector<char> data_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a(const char* data, std::size_t size) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

void write_gram_csv(const GramMatrix& gram, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "# ";
  bool first = true;
  bool has_method = false;
  for (const auto& [key, value] : gram.parameters) {
    if (key == "method") has_method = true;
  }
  if (!has_method) {
    out << "method=" << to_string(gram.method);
    first = false;
  }
  for (const auto& [key, value] : gram.parameters) {
    out << (first ? "" : ";") << key << '=' << value;
    first = false;
  }
  out << ";repaired=" << to_string(gram.repaired);
  if (gram.min_eigenvalue) {
    out << ";min_eigenvalue=" << format_value(*gram.min_eigenvalue);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < gram.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.entries.cols(); ++j) {
      if (j) out << ',';
      out << format_value(gram.entries(i, j));
    }
    out << '\n';
  }
}

GramMatrix read_gram_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  GramMatrix gram;
  std::string line;
  long number = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream fields(line.substr(1));
      std::string field;
      while (std::getline(fields, field, ';')) {
        while (!field.empty() && field.front() == ' ') field.erase(0, 1);
        const auto eq = field.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = field.substr(0, eq);
        const std::string value = field.substr(eq + 1);
        if (key == "repaired") {
          gram.repaired = parse_repair_method(value);
        } else if (key == "min_eigenvalue") {
          gram.min_eigenvalue = parse_value(value, path, number);
        } else {
          if (key == "method") gram.method = parse_kernel_method(value);
          gram.parameters.emplace_back(key, value);
        }
      }
      continue;
    }
    std::vector<double> row;
    std::istringstream tokens(line);
    std::string token;
    while (std::getline(tokens, token, ',')) {
      row.push_back(parse_value(token, path, number));
    }
    rows.push_back(std::move(row));
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  gram.entries.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != n) {
      throw ParseError(path.string(), 0,
                       "row " + std::to_string(i + 1) + " has " +
                           std::to_string(rows[i].size()) + " values, expected " +
                           std::to_string(n));
    }
    for (Eigen::Index j = 0; j < n; ++j) gram.entries(i, j) = rows[i][j];
  }
  return gram;
}

void write_gram_binary(const GramMatrix& gram, std::uint64_t key,
                       const fs::path& path) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.value(kVersion);
  w.value(key);
  w.value(static_cast<std::uint32_t>(gram.method));
  w.value(static_cast<std::uint32_t>(gram.repaired));
  w.value(static_cast<std::uint32_t>(gram.parameters.size()));
  for (const auto& [k, v] : gram.parameters) {
    w.string(k);
    w.string(v);
  }
  const auto n = static_cast<std::uint64_t>(gram.entries.rows());
  w.value(n);
  // Row-major on disk.
  for (Eigen::Index i = 0; i < gram.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.entries.cols(); ++j) {
      w.value(gram.entries(i, j));
    }
  }
  const std::uint64_t checksum = fnv1a(w.buffer().data(), w.buffer().size());
  w.value(checksum);

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::optional<GramMatrix> read_gram_binary(const fs::path& path,
                                           std::uint64_t expected_key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<char> data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  if (data.size() < sizeof kMagic + sizeof(std::uint64_t)) return std::nullopt;
  std::uint64_t stored = 0;
  std::memcpy(&stored, data.data() + data.size() - sizeof stored, sizeof stored);
  if (fnv1a(data.data(), data.size() - sizeof stored) != stored) {
    return std::nullopt;
  }
  data.resize(data.size() - sizeof stored);
  Reader r(std::move(data));

  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t key = 0;
  std::uint32_t method = 0;
  std::uint32_t repaired = 0;
  std::uint32_t count = 0;
  if (!r.bytes(magic, sizeof magic) ||
      std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    return std::nullopt;
  }
  if (!r.value(&version) || version != kVersion) return std::nullopt;
  if (!r.value(&key) || key != expected_key) return std::nullopt;
  if (!r.value(&method) || method > 3) return std::nullopt;
  if (!r.value(&repaired) || repaired > 3) return std::nullopt;
  if (!r.value(&count)) return std::nullopt;

  GramMatrix gram;
  gram.method = static_cast<KernelMethod>(method);
  gram.repaired = static_cast<RepairMethod>(repaired);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string k;
    std::string v;
    if (!r.string(&k) || !r.string(&v)) return std::nullopt;
    gram.parameters.emplace_back(std::move(k), std::move(v));
  }
  std::uint64_t n = 0;
  if (!r.value(&n)) return std::nullopt;
  if (n * n * sizeof(double) != r.size() - r.position()) return std::nullopt;
  gram.entries.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < gram.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < gram.entries.cols(); ++j) {
      double x = 0.0;
      r.value(&x);
      gram.entries(i, j) = x;
    }
  }
  return gram;
}

}  // namespace otgk
