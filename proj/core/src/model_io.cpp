#include "isden/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>

#include "isden/crc64.hpp"
#include "isden/errors.hpp"

namespace isden {

namespace {

constexpr std::array<std::uint8_t, 8> kMagic = {'I', 'S', 'D', 'N', 'M', 'O', 'D', 'L'};
constexpr std::size_t kHeaderSize = 16;

class Writer {
 public:
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
  void raw(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

  template <typename Derived>
  void doubles(const Eigen::DenseBase<Derived>& m) {
    // Row-major element order regardless of storage order.
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }
  std::span<const std::uint8_t> bytes() const { return out_; }

 private:
  void put(std::uint64_t v, int width) {
    for (int b = 0; b < width; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
  double f64() { return std::bit_cast<double>(get(8)); }

  // Guards a count of fixed-size items before anything is allocated for it.
  void require(std::uint64_t count, std::uint64_t item_size) {
    if (item_size != 0 && count > remaining() / item_size) {
      throw ModelTruncatedError("model file is truncated");
    }
  }

  Vector vector(Index n) {
    require(static_cast<std::uint64_t>(n), 8);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = f64();
    return v;
  }

  Matrix square(Index n) {
    require(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n), 8);
    Matrix m(n, n);
    for (Index r = 0; r < n; ++r) {
      for (Index c = 0; c < n; ++c) m(r, c) = f64();
    }
    return m;
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::uint64_t get(int width) {
    if (remaining() < static_cast<std::size_t>(width)) {
      throw ModelTruncatedError("model file is truncated");
    }
    std::uint64_t v = 0;
    for (int b = 0; b < width; ++b) v |= static_cast<std::uint64_t>(bytes_[pos_ + b]) << (8 * b);
    pos_ += static_cast<std::size_t>(width);
    return v;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct RawCluster {
  double beta;
  Vector gg_mu;
  Matrix gg_sigma;
  Vector mean;
  Matrix cov;
  std::vector<Index> members;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const ClusterModel& model) {
  const Index p = model.dim();
  Writer w;
  w.raw(kMagic);
  w.u32(kModelFormatVersion);
  w.u32(0);

  w.u64(static_cast<std::uint64_t>(model.clusters.size()));
  w.u64(static_cast<std::uint64_t>(p));
  w.u64(static_cast<std::uint64_t>(model.patch_side));
  w.f64(model.beta);
  w.u64(static_cast<std::uint64_t>(model.patch_store.rows()));
  w.u64(model.meta.dataset_hash);
  w.u32(model.meta.outer_iterations);
  w.u32(0);
  w.i64(model.meta.started_unix);
  w.i64(model.meta.finished_unix);
  w.u64(model.meta.log_likelihood.size());
  for (double v : model.meta.log_likelihood) w.f64(v);

  for (const auto& c : model.clusters) {
    if (c.gg.dim() != p || c.gauss.dim() != p) {
      throw DimensionError("serialize_model: cluster dimension differs from patch store");
    }
    w.f64(c.gg.beta());
    w.doubles(c.gg.mu().transpose());
    w.doubles(c.gg.sigma());
    w.doubles(c.gauss.mean().transpose());
    w.doubles(c.gauss.cov());
    w.u64(c.members.size());
    for (Index idx : c.members) w.u64(static_cast<std::uint64_t>(idx));
  }
  w.doubles(model.patch_store);
  w.u64(crc64(w.bytes()));
  return w.take();
}

ClusterModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size()) throw ModelTruncatedError("model file is truncated");
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw ModelMagicError("not a model file (bad magic)");
  }
  Reader r(bytes);
  r.u64();  // magic, checked above
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw ModelVersionError("unsupported model format version " + std::to_string(version) +
                            " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  r.u32();

  const std::uint64_t m = r.u64();
  const std::uint64_t p64 = r.u64();
  const std::uint64_t side = r.u64();
  const double beta = r.f64();
  const std::uint64_t n = r.u64();
  TrainingMeta meta;
  meta.dataset_hash = r.u64();
  meta.outer_iterations = r.u32();
  r.u32();
  meta.started_unix = r.i64();
  meta.finished_unix = r.i64();
  const std::uint64_t trace_len = r.u64();
  r.require(trace_len, 8);
  meta.log_likelihood.reserve(trace_len);
  for (std::uint64_t i = 0; i < trace_len; ++i) meta.log_likelihood.push_back(r.f64());

  if (p64 == 0 || p64 > (1u << 16)) throw ModelLoadError("model file: implausible patch dimension");
  const Index p = static_cast<Index>(p64);
  // Each cluster block needs at least its fixed-size part.
  r.require(m, 8 * (2 + 2 * p64 + 2 * p64 * p64));
  std::vector<RawCluster> raw;
  raw.reserve(m);
  for (std::uint64_t c = 0; c < m; ++c) {
    RawCluster rc;
    rc.beta = r.f64();
    rc.gg_mu = r.vector(p);
    rc.gg_sigma = r.square(p);
    rc.mean = r.vector(p);
    rc.cov = r.square(p);
    const std::uint64_t count = r.u64();
    r.require(count, 8);
    rc.members.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) rc.members.push_back(static_cast<Index>(r.u64()));
    raw.push_back(std::move(rc));
  }
  r.require(n, 8 * p64);
  PatchMatrix store(static_cast<Index>(n), p);
  for (Index i = 0; i < store.rows(); ++i) {
    for (Index k = 0; k < p; ++k) store(i, k) = r.f64();
  }

  const std::size_t payload_end = r.position();
  const std::uint64_t stored_crc = r.u64();
  if (r.remaining() != 0) throw ModelLoadError("model file has trailing bytes");
  if (crc64(bytes.first(payload_end)) != stored_crc) {
    throw ModelChecksumError("model file checksum mismatch");
  }

  ClusterModel model;
  model.patch_side = static_cast<int>(side);
  model.beta = beta;
  model.meta = std::move(meta);
  model.patch_store = std::move(store);
  try {
    for (auto& rc : raw) {
      model.clusters.push_back(Cluster{GGParams(std::move(rc.gg_mu), std::move(rc.gg_sigma), rc.beta),
                                       GaussianParams(std::move(rc.mean), std::move(rc.cov)),
                                       std::move(rc.members)});
    }
    model.validate();
  } catch (const ModelLoadError&) {
    throw;
  } catch (const Error& e) {
    throw ModelLoadError(std::string("model file is inconsistent: ") + e.what());
  }
  return model;
}

void save_model(const ClusterModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ClusterModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelLoadError("cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace isden
