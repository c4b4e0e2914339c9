#include <doctest.h>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string_view>

#include "isden/crc64.hpp"
#include "isden/errors.hpp"
#include "isden/model_io.hpp"
#include "support/oracles.hpp"

using namespace isden;
namespace fs = std::filesystem;

namespace {

ClusterModel trained_model() {
  std::mt19937_64 rng(3);
  PatchMatrix xs(240, 4);
  for (Index i = 0; i < xs.rows(); ++i) {
    xs.row(i) = (oracle::random_vector(4, rng) + Vector::Constant(4, i % 2 ? 6.0 : -6.0)).transpose();
  }
  LearnOptions opts;
  opts.num_clusters = 3;
  opts.record_timestamps = true;
  return learn_prior(xs, 2, opts);
}

// M clusters of dimension p over N random patches, round-robin membership.
ClusterModel synthetic_model(Index m, Index p, Index n, int side) {
  std::mt19937_64 rng(9);
  ClusterModel model;
  model.patch_side = side;
  model.beta = 0.9;
  model.patch_store = PatchMatrix::Random(n, p) * 128.0;
  std::vector<std::vector<Index>> members(static_cast<std::size_t>(m));
  for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(i % m)].push_back(i);
  for (Index c = 0; c < m; ++c) {
    const Vector mu = oracle::random_vector(p, rng);
    const Matrix s = Matrix::Identity(p, p) * (1.0 + static_cast<double>(c));
    model.clusters.push_back(Cluster{GGParams(mu, s, 0.9), GaussianParams(mu, s), members[static_cast<std::size_t>(c)]});
  }
  model.meta.log_likelihood = {-3.0, -2.0};
  model.meta.outer_iterations = 2;
  return model;
}

void check_same(const ClusterModel& a, const ClusterModel& b) {
  CHECK(a.patch_side == b.patch_side);
  CHECK(a.beta == b.beta);
  CHECK(a.patch_store == b.patch_store);
  CHECK(a.meta.dataset_hash == b.meta.dataset_hash);
  CHECK(a.meta.outer_iterations == b.meta.outer_iterations);
  CHECK(a.meta.started_unix == b.meta.started_unix);
  CHECK(a.meta.finished_unix == b.meta.finished_unix);
  CHECK(a.meta.log_likelihood == b.meta.log_likelihood);
  REQUIRE(a.clusters.size() == b.clusters.size());
  for (std::size_t k = 0; k < a.clusters.size(); ++k) {
    const Cluster& x = a.clusters[k];
    const Cluster& y = b.clusters[k];
    CHECK(x.gg.beta() == y.gg.beta());
    CHECK(x.gg.mu() == y.gg.mu());
    CHECK(x.gg.sigma() == y.gg.sigma());
    CHECK(x.gauss.mean() == y.gauss.mean());
    CHECK(x.gauss.cov() == y.gauss.cov());
    CHECK(x.members == y.members);
  }
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "isden_test_model_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("crc64 check value") {
  constexpr std::string_view check = "123456789";
  const auto* b = reinterpret_cast<const std::uint8_t*>(check.data());
  CHECK(crc64({b, check.size()}) == 0x995DC9BBDF1939FAULL);
  CHECK(crc64({b + 4, 5}, crc64({b, 4})) == 0x995DC9BBDF1939FAULL);
  CHECK(crc64({}) == 0);
}

TEST_CASE("model round trip is exact") {
  const ClusterModel model = trained_model();
  REQUIRE(model.meta.started_unix > 0);
  const auto bytes = serialize_model(model);
  check_same(model, deserialize_model(bytes));
  CHECK(serialize_model(deserialize_model(bytes)) == bytes);

  const fs::path path = scratch("roundtrip.isdm");
  save_model(model, path);
  check_same(model, load_model(path));
  CHECK(!fs::exists(path.string() + ".tmp"));
  fs::remove(path);
}

TEST_CASE("header layout") {
  const auto bytes = serialize_model(trained_model());
  CHECK(std::memcmp(bytes.data(), "ISDNMODL", 8) == 0);
  CHECK(bytes[8] == kModelFormatVersion);
  CHECK(bytes[9] == 0);
  CHECK(bytes[16] == 3);  // M, little-endian
  CHECK(bytes[24] == 4);  // p
}

TEST_CASE("corrupt model files are rejected") {
  const auto bytes = serialize_model(trained_model());
  auto load = [](std::vector<std::uint8_t> b) { return deserialize_model(b); };

  SUBCASE("every truncation") {
    for (std::size_t len = 0; len < bytes.size(); len += 97) {
      CHECK_THROWS_AS(load({bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(len)}), ModelLoadError);
    }
    CHECK_THROWS_AS(load({bytes.begin(), bytes.end() - 1}), ModelTruncatedError);
    CHECK_THROWS_AS(load({bytes.begin(), bytes.begin() + 40}), ModelTruncatedError);
  }
  SUBCASE("flipped payload byte") {
    auto b = bytes;
    b[b.size() - 20] ^= 0x40;  // inside the patch store
    CHECK_THROWS_AS(load(b), ModelChecksumError);
    b = bytes;
    b[b.size() - 3] ^= 0x01;  // inside the trailer
    CHECK_THROWS_AS(load(b), ModelChecksumError);
  }
  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] = 'X';
    CHECK_THROWS_AS(load(b), ModelMagicError);
  }
  SUBCASE("future version") {
    auto b = bytes;
    b[8] = 2;
    CHECK_THROWS_AS(load(b), ModelVersionError);
  }
  SUBCASE("trailing bytes") {
    auto b = bytes;
    b.push_back(0);
    CHECK_THROWS_AS(load(b), ModelLoadError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_model(scratch("does-not-exist.isdm")), ModelLoadError);
  }
}

TEST_CASE("a full-size model saves and loads quickly") {
  const ClusterModel model = synthetic_model(20, 64, 100000, 8);
  const fs::path path = scratch("large.isdm");
  const auto t0 = std::chrono::steady_clock::now();
  save_model(model, path);
  const ClusterModel back = load_model(path);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 5.0);
  check_same(model, back);
  fs::remove(path);
}
