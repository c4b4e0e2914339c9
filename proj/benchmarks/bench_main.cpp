#include <benchmark/benchmark.h>

#include <random>

#include "isden/density.hpp"
#include "isden/pipeline.hpp"
#include "isden/dataset.hpp"
#include "isden/snis.hpp"
#include "isden/synthetic.hpp"

using namespace isden;

namespace {

Matrix spd(Index p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix a(p, p);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
  Matrix s = a * a.transpose() / static_cast<double>(p);
  s.diagonal().array() += 0.5;
  return s;
}

const ClusterModel& page_model() {
  static const ClusterModel model = [] {
    TextImageOptions o;
    o.width = o.height = 96;
    std::vector<ImageBuffer> pages;
    for (int k = 0; k < 4; ++k) pages.push_back(render_text_image(o, 100 + k));
    LearnOptions opts;
    opts.num_clusters = 8;
    return learn_prior(collect_patches(pages, 5, 2), 5, opts);
  }();
  return model;
}

}  // namespace

static void BM_GGLogDensityRows(benchmark::State& state) {
  const Index p = state.range(0);
  const GGParams gg(Vector::Zero(p), spd(p, 1), 0.9);
  const PatchMatrix xs = gg_sample(gg, 1000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gg_log_density_rows(xs, gg));
  state.SetItemsProcessed(state.iterations() * xs.rows());
}
BENCHMARK(BM_GGLogDensityRows)->Arg(25)->Arg(64);

static void BM_SnisEstimate(benchmark::State& state) {
  const Index p = 25;
  const PatchMatrix samples = gg_sample(GGParams(Vector::Zero(p), spd(p, 3), 0.9), state.range(0), 4);
  const Vector y = samples.row(0).transpose() + Vector::Constant(p, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(snis_estimate(y, samples, 1.0));
  state.SetItemsProcessed(state.iterations() * samples.rows());
}
BENCHMARK(BM_SnisEstimate)->Arg(100)->Arg(500)->Arg(5000);

static void BM_AssignPatch(benchmark::State& state) {
  const ClusterModel& model = page_model();
  const ClusterAssigner assign(model, 30.0);
  const Vector y = model.patch_store.row(17).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(assign(y));
}
BENCHMARK(BM_AssignPatch);

static void BM_DenoisePass(benchmark::State& state) {
  const ClusterModel& model = page_model();
  TextImageOptions o;
  o.width = o.height = 64;
  const ImageBuffer noisy = add_noise(render_text_image(o, 7), 30.0, 1);
  DenoiseConfig c;
  c.n_samples = static_cast<int>(state.range(0));
  c.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(denoise_pass(noisy, model, 30.0, c));
}
BENCHMARK(BM_DenoisePass)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
