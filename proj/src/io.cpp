#include "stadloc/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "stadloc/error.hpp"

namespace stadloc {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

class Writer {
 public:
  explicit Writer(const fs::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  }
  template <class T>
  void put(const T& v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void put_array(const std::vector<double>& v) {
    out_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  void magic(const char* m) { out_.write(m, 4); }
  void close() {
    out_.close();
    if (!out_) throw Error(ErrorCode::IoError, "write failed for " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const fs::path& path) : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  template <class T>
  T get() {
    T v{};
    in_.read(reinterpret_cast<char*>(&v), sizeof(T));
    check();
    return v;
  }
  std::vector<double> get_array(std::size_t n) {
    std::vector<double> v(n);
    in_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    check();
    return v;
  }
  void expect_magic(const char* m) {
    char buf[4];
    in_.read(buf, 4);
    check();
    if (std::memcmp(buf, m, 4) != 0) throw Error(ErrorCode::IoError, path_.string() + " is not a " + m + " file");
  }

 private:
  void check() {
    if (!in_) throw Error(ErrorCode::IoError, "truncated file " + path_.string());
  }
  fs::path path_;
  std::ifstream in_;
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::IoError, "bad number '" + s + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void write_bndf(const fs::path& path, const std::vector<BoundaryFunction>& states) {
  Writer w(path);
  w.magic("BNDF");
  w.put(kBndfVersion);
  w.put(static_cast<std::uint32_t>(states.size()));
  for (const auto& bf : states) {
    if (bf.s.size() != bf.u.size()) throw Error(ErrorCode::InvalidArgument, "s and u lengths differ");
    w.put(bf.k);
    w.put(static_cast<std::uint32_t>(bf.s.size()));
    w.put_array(bf.s);
    w.put_array(bf.u);
  }
  w.close();
}

std::vector<BoundaryFunction> read_bndf(const fs::path& path) {
  Reader r(path);
  r.expect_magic("BNDF");
  if (r.get<std::uint32_t>() != kBndfVersion) throw Error(ErrorCode::IoError, "unsupported BNDF version");
  const auto count = r.get<std::uint32_t>();
  std::vector<BoundaryFunction> out(count);
  for (auto& bf : out) {
    bf.k = r.get<double>();
    const auto n = r.get<std::uint32_t>();
    bf.s = r.get_array(n);
    bf.u = r.get_array(n);
  }
  return out;
}

void write_husg(const fs::path& path, const HusimiGrid& grid) {
  if (grid.values.size() != grid.nq * grid.np) throw Error(ErrorCode::InvalidArgument, "grid size mismatch");
  Writer w(path);
  w.magic("HUSG");
  w.put(kHusgVersion);
  w.put(static_cast<std::uint32_t>(grid.nq));
  w.put(static_cast<std::uint32_t>(grid.np));
  w.put(grid.epsilon);
  w.put(grid.k);
  w.put_array(grid.values);
  w.close();
}

HusimiGrid read_husg(const fs::path& path) {
  Reader r(path);
  r.expect_magic("HUSG");
  if (r.get<std::uint32_t>() != kHusgVersion) throw Error(ErrorCode::IoError, "unsupported HUSG version");
  HusimiGrid g;
  g.nq = r.get<std::uint32_t>();
  g.np = r.get<std::uint32_t>();
  g.epsilon = r.get<double>();
  g.k = r.get<double>();
  g.values = r.get_array(g.nq * g.np);
  return g;
}

void write_levels_csv(const fs::path& path, const SpectrumWindow& window) {
  std::string out = "index,k,method,window_id\n";
  for (std::size_t i = 0; i < window.levels.size(); ++i) {
    const int id = i < window.window_id.size() ? window.window_id[i] : -1;
    out += std::to_string(i) + "," + format_double(window.levels[i]) + "," + std::string(to_string(window.method)) +
           "," + std::to_string(id) + "\n";
  }
  write_text_atomic(path, out);
}

SpectrumWindow read_levels_csv(const fs::path& path, double epsilon) {
  std::stringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  SpectrumWindow w;
  w.epsilon = epsilon;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw Error(ErrorCode::IoError, "bad level row in " + path.string());
    w.levels.push_back(parse_double(cells[1]));
    if (first) w.method = solver_method_from_string(cells[2]);
    first = false;
    w.window_id.push_back(static_cast<int>(parse_double(cells[3])));
  }
  if (!w.levels.empty()) {
    w.k_lo = w.levels.front();
    w.k_hi = w.levels.back();
  }
  return w;
}

void write_diffusion_csv(const fs::path& path, const DiffusionCurve& curve) {
  std::string out = "n,var_p\n";
  for (std::size_t i = 0; i < curve.n.size(); ++i) {
    out += std::to_string(curve.n[i]) + "," + format_double(curve.var_p[i]) + "\n";
  }
  write_text_atomic(path, out);
}

void write_localization_csv(const fs::path& path, const std::vector<LocalizationRecord>& records) {
  std::string out = "k,A,nIPR,I\n";
  for (const auto& r : records) {
    out += format_double(r.k) + "," + format_double(r.A) + "," + format_double(r.nIPR) + "," + format_double(r.I) +
           "\n";
  }
  write_text_atomic(path, out);
}

std::vector<LocalizationRecord> read_localization_csv(const fs::path& path) {
  std::stringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  std::vector<LocalizationRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 4) throw Error(ErrorCode::IoError, "bad localization row in " + path.string());
    LocalizationRecord r;
    r.k = parse_double(cells[0]);
    r.A = parse_double(cells[1]);
    r.nIPR = parse_double(cells[2]);
    r.I = parse_double(cells[3]);
    out.push_back(r);
  }
  return out;
}

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorCode::IoError, "SHA-256 init failed");
    }
  }
  void update(const char* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), digest, &len);
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[digest[i] >> 4];
      out += digits[digest[i] & 15];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string());
    out << content;
    out.close();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stadloc
