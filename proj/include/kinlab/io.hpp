#pragma once

/// @file io.hpp
/// @brief Persistence layer: a versioned binary container for named real and
///        complex matrices (operator caches, tensor fields, spectral
///        snapshots), a content-hash key for cache lookups, and the CSV /
///        JSON report emitters used by the experiment driver.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kinlab/burnett.hpp"
#include "kinlab/linearized.hpp"
#include "kinlab/spectral.hpp"

namespace kinlab {

// ---------------------------------------------------------------------------
// Content hashing for cache keys
// ---------------------------------------------------------------------------

/// FNV-1a 64-bit over a byte stream; used to key cache files by the exact
/// numeric content of the descriptors that determine an artifact.
class ContentHash {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 1099511628211ull;
    }
  }
  void mix(double x) { bytes(&x, sizeof(x)); }
  void mix(std::int64_t x) { bytes(&x, sizeof(x)); }
  void mix(const std::string& s) { bytes(s.data(), s.size()); }
  void mix(const Vec3& v) {
    mix(v[0]);
    mix(v[1]);
    mix(v[2]);
  }
  std::uint64_t value() const { return h_; }
  std::string hex() const {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h_));
    return buf;
  }

 private:
  std::uint64_t h_ = 1469598103934665603ull;
};

/// Cache key of a linearized-operator build: grid geometry, bulk shift, and
/// kernel constants fully determine the assembled matrix.
inline std::string operator_cache_key(const LinearizedConfig& cfg) {
  ContentHash h;
  h.mix(std::string("linearized-v1"));
  h.mix(static_cast<std::int64_t>(cfg.grid->resolution));
  h.mix(cfg.grid->cutoff);
  h.mix(cfg.bulk);
  h.mix(cfg.kernel.c1);
  h.mix(cfg.kernel.c2);
  h.mix(cfg.eps_reg);
  return h.hex();
}

// ---------------------------------------------------------------------------
// Versioned binary container
// ---------------------------------------------------------------------------

/// Named matrices, real or complex, in one flat file.  Format:
///   magic "KLAB" | u32 format version | u32 payload kind hash | u32 count
///   per entry: u32 name length | name | u8 complex flag | u64 rows |
///              u64 cols | row-major doubles (pairs for complex)
/// Loads fail soft (nullopt) on a version or kind mismatch so callers can
/// rebuild and overwrite.
class BinaryContainer {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  explicit BinaryContainer(std::string kind) : kind_(std::move(kind)) {}

  void put(const std::string& name, const MatX& m) { real_[name] = m; }
  void put(const std::string& name, const MatXc& m) { cplx_[name] = m; }
  void put_scalar(const std::string& name, double x) {
    real_[name] = MatX::Constant(1, 1, x);
  }
  void put_vector(const std::string& name, const VecX& v) {
    real_[name] = v;
  }

  bool has(const std::string& name) const {
    return real_.count(name) > 0 || cplx_.count(name) > 0;
  }
  const MatX& real(const std::string& name) const {
    auto it = real_.find(name);
    KINLAB_REQUIRE(it != real_.end(), "BinaryContainer: missing entry " + name);
    return it->second;
  }
  const MatXc& complex(const std::string& name) const {
    auto it = cplx_.find(name);
    KINLAB_REQUIRE(it != cplx_.end(), "BinaryContainer: missing entry " + name);
    return it->second;
  }
  double scalar(const std::string& name) const { return real(name)(0, 0); }

  void save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    KINLAB_REQUIRE(os.good(), "BinaryContainer: cannot open " + path.string());
    os.write("KLAB", 4);
    write_u32(os, kFormatVersion);
    write_u32(os, kind_hash());
    write_u32(os, static_cast<std::uint32_t>(real_.size() + cplx_.size()));
    for (const auto& [name, m] : real_) write_entry(os, name, false, m);
    for (const auto& [name, m] : cplx_) {
      MatX packed(m.rows(), 2 * m.cols());
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          packed(i, 2 * j) = m(i, j).real();
          packed(i, 2 * j + 1) = m(i, j).imag();
        }
      write_entry(os, name, true, packed);
    }
    KINLAB_REQUIRE(os.good(), "BinaryContainer: write failed " + path.string());
  }

  /// Returns nullopt if the file is absent, truncated, or carries a
  /// different format version or payload kind.
  static std::optional<BinaryContainer> load(const std::filesystem::path& path,
                                             const std::string& kind) {
    std::ifstream is(path, std::ios::binary);
    if (!is.good()) return std::nullopt;
    char magic[4];
    is.read(magic, 4);
    if (!is.good() || std::string(magic, 4) != "KLAB") return std::nullopt;
    BinaryContainer out(kind);
    std::uint32_t version = read_u32(is), kind_h = read_u32(is),
                  count = read_u32(is);
    if (!is.good() || version != kFormatVersion || kind_h != out.kind_hash())
      return std::nullopt;
    for (std::uint32_t e = 0; e < count; ++e) {
      std::uint32_t nlen = read_u32(is);
      if (!is.good() || nlen > 4096) return std::nullopt;
      std::string name(nlen, '\0');
      is.read(name.data(), nlen);
      std::uint8_t cflag = 0;
      is.read(reinterpret_cast<char*>(&cflag), 1);
      std::uint64_t rows = read_u64(is), cols = read_u64(is);
      if (!is.good() || rows * cols > (1ull << 32)) return std::nullopt;
      MatX m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      is.read(reinterpret_cast<char*>(m.data()),
              static_cast<std::streamsize>(rows * cols * sizeof(double)));
      if (!is.good()) return std::nullopt;
      if (cflag) {
        MatXc c(m.rows(), m.cols() / 2);
        for (Eigen::Index i = 0; i < c.rows(); ++i)
          for (Eigen::Index j = 0; j < c.cols(); ++j)
            c(i, j) = Cplx(m(i, 2 * j), m(i, 2 * j + 1));
        out.cplx_[name] = std::move(c);
      } else {
        out.real_[name] = std::move(m);
      }
    }
    return out;
  }

 private:
  std::uint32_t kind_hash() const {
    ContentHash h;
    h.mix(kind_);
    return static_cast<std::uint32_t>(h.value() & 0xffffffffu);
  }
  static void write_u32(std::ostream& os, std::uint32_t x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof(x));
  }
  static void write_u64(std::ostream& os, std::uint64_t x) {
    os.write(reinterpret_cast<const char*>(&x), sizeof(x));
  }
  static std::uint32_t read_u32(std::istream& is) {
    std::uint32_t x = 0;
    is.read(reinterpret_cast<char*>(&x), sizeof(x));
    return x;
  }
  static std::uint64_t read_u64(std::istream& is) {
    std::uint64_t x = 0;
    is.read(reinterpret_cast<char*>(&x), sizeof(x));
    return x;
  }
  static void write_entry(std::ostream& os, const std::string& name,
                          bool complex_flag, const MatX& m) {
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    std::uint8_t cflag = complex_flag ? 1 : 0;
    os.write(reinterpret_cast<const char*>(&cflag), 1);
    write_u64(os, static_cast<std::uint64_t>(m.rows()));
    write_u64(os, static_cast<std::uint64_t>(m.cols()));
    // Stored row by row so the on-disk layout is independent of Eigen's
    // default column-major storage.
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      VecX row = m.row(i);
      os.write(reinterpret_cast<const char*>(row.data()),
               static_cast<std::streamsize>(row.size() * sizeof(double)));
    }
  }

  std::string kind_;
  std::map<std::string, MatX> real_;
  std::map<std::string, MatXc> cplx_;
};

// ---------------------------------------------------------------------------
// Cached artifacts
// ---------------------------------------------------------------------------

/// Save / load the assembled operator matrix together with the contracted
/// tensor derived from it, keyed by the operator content hash.
inline void save_operator_cache(const std::filesystem::path& path,
                                const LinearizedOperator& op,
                                const BurnettTensor& bt) {
  BinaryContainer c("operator-cache");
  c.put("matrix", op.matrix());
  c.put_scalar("eta0", bt.eta0);
  c.put_scalar("off_structure", bt.off_structure);
  c.put_scalar("decay_constant", bt.decay_constant);
  c.put("bulk", bt.bulk);
  c.put("gram", bt.gram);
  for (int t = 0; t < 6; ++t)
    c.put_vector("field" + std::to_string(t), bt.fields[t]);
  c.save(path);
}

struct OperatorCache {
  MatX matrix;
  BurnettTensor tensor;
};

inline std::optional<OperatorCache> load_operator_cache(
    const std::filesystem::path& path, const VelocityGrid& grid) {
  auto c = BinaryContainer::load(path, "operator-cache");
  if (!c) return std::nullopt;
  OperatorCache out;
  out.matrix = c->real("matrix");
  if (out.matrix.rows() != static_cast<Eigen::Index>(grid.size()))
    return std::nullopt;
  out.tensor.eta0 = c->scalar("eta0");
  out.tensor.off_structure = c->scalar("off_structure");
  out.tensor.decay_constant = c->scalar("decay_constant");
  out.tensor.bulk = c->real("bulk");
  out.tensor.gram = c->real("gram");
  for (int t = 0; t < 6; ++t)
    out.tensor.fields[t] = c->real("field" + std::to_string(t));
  return out;
}

/// Spectral flow snapshot: grid descriptor plus the three complex mode
/// matrices of a field (vorticity or velocity) at one time slice.
inline void save_snapshot(const std::filesystem::path& path,
                          const SpectralField3& f, double time) {
  const SpatialGrid& g = *f.grid;
  BinaryContainer c("flow-snapshot");
  c.put_scalar("modes", static_cast<double>(g.M));
  c.put_scalar("time", time);
  VecX z(g.vert.size()), w(g.vert.size());
  for (int i = 0; i < g.vert.size(); ++i) {
    z[i] = g.vert.z[i];
    w[i] = g.vert.w[i];
  }
  c.put_vector("vertical_nodes", z);
  c.put_vector("vertical_weights", w);
  for (int k = 0; k < 3; ++k)
    c.put("component" + std::to_string(k), f.c[k]);
  c.save(path);
}

/// Loads a snapshot onto an existing grid; the grid must match the stored
/// descriptor exactly.
inline std::optional<SpectralField3> load_snapshot(
    const std::filesystem::path& path, const SpatialGrid& g,
    double* time = nullptr) {
  auto c = BinaryContainer::load(path, "flow-snapshot");
  if (!c) return std::nullopt;
  if (static_cast<int>(c->scalar("modes")) != g.M) return std::nullopt;
  const MatX& z = c->real("vertical_nodes");
  if (z.rows() != static_cast<Eigen::Index>(g.vert.size())) return std::nullopt;
  for (int i = 0; i < g.vert.size(); ++i)
    if (z(i, 0) != g.vert.z[i]) return std::nullopt;
  SpectralField3 f;
  f.grid = &g;
  for (int k = 0; k < 3; ++k) f.c[k] = c->complex("component" + std::to_string(k));
  if (time) *time = c->scalar("time");
  return f;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One measured quantity with its tolerance verdict.  `reference` is the
/// value the measurement is compared against (0 for pure residuals);
/// `fitted` carries a fitted constant when the row is a scale-bound check.
struct ReportRow {
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double fitted = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct Report {
  std::string experiment;
  std::vector<ReportRow> rows;

  ReportRow& add(const std::string& name, double value, double tolerance,
                 bool pass) {
    rows.push_back({name, value, 0.0, 0.0, tolerance, pass});
    return rows.back();
  }
  /// Residual-style row: passes iff |value - reference| <= tolerance.
  ReportRow& check(const std::string& name, double value, double reference,
                   double tolerance) {
    bool ok = std::abs(value - reference) <= tolerance;
    rows.push_back({name, value, reference, 0.0, tolerance, ok});
    return rows.back();
  }
  /// Fitted-constant row: passes iff the fit is finite and below the cap.
  ReportRow& fit(const std::string& name, double fitted, double cap) {
    bool ok = std::isfinite(fitted) && fitted >= 0.0 && fitted <= cap;
    rows.push_back({name, fitted, 0.0, fitted, cap, ok});
    return rows.back();
  }

  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }

  /// Deterministic CSV: fixed column order and %.12g formatting, so the
  /// same configuration and seed reproduce the file byte for byte.
  void write_csv(const std::filesystem::path& path) const {
    std::ofstream os(path);
    KINLAB_REQUIRE(os.good(), "Report: cannot open " + path.string());
    os << "check,value,reference,fitted_constant,tolerance,pass\n";
    char buf[512];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g,%.12g,%d\n",
                    r.name.c_str(), r.value, r.reference, r.fitted,
                    r.tolerance, r.pass ? 1 : 0);
      os << buf;
    }
  }

  nlohmann::ordered_json summary() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["checks"] = rows.size();
    std::size_t failed = 0;
    for (const auto& r : rows)
      if (!r.pass) ++failed;
    j["failed"] = failed;
    j["pass"] = failed == 0;
    return j;
  }
};

/// One JSON summary for a batch of experiment reports.
inline void write_summary(const std::filesystem::path& path,
                          const std::vector<Report>& reports) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  bool all = true;
  j["experiments"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    j["experiments"].push_back(r.summary());
    all = all && r.all_pass();
  }
  j["pass"] = all;
  std::ofstream os(path);
  KINLAB_REQUIRE(os.good(), "write_summary: cannot open " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace kinlab
