#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "cli/config_file.hpp"
#include "cli/report.hpp"
#include "isden/dataset.hpp"
#include "isden/errors.hpp"
#include "isden/image_io.hpp"
#include "isden/model_io.hpp"
#include "isden/pipeline.hpp"
#include "isden/prior.hpp"
#include "isden/synthetic.hpp"

namespace isden::cli {

namespace fs = std::filesystem;

namespace {

// A path that does not exist or cannot be written.
class PathError : public Error {
 public:
  using Error::Error;
};

struct CommonArgs {
  DenoiseConfig config;
  std::string mode = "full";
  double tau = kDefaultTau;
  std::uint64_t seed = 0;
  bool timing = false;
};

void add_estimation_options(CLI::App* app, CommonArgs& a) {
  app->add_option("--seed", a.seed, "Base random seed");
  app->add_option("--patch-side", a.config.patch_side, "Patch side length in pixels")
      ->check(CLI::PositiveNumber);
  app->add_option("--stride", a.config.stride, "Patch grid stride in pixels")->check(CLI::PositiveNumber);
  app->add_option("--samples", a.config.n_samples, "Clean patches drawn per noisy patch (n)")
      ->check(CLI::PositiveNumber);
  app->add_option("--tau", a.tau, "Hard threshold on raw importance weights");
  app->add_option("--r", a.config.r, "Boosting constant, 0 <= r < 1");
  app->add_option("--passes", a.config.passes, "Denoising passes (1 or 2)")->check(CLI::IsMember({1, 2}));
  app->add_option("--mode", a.mode, "Estimator: full (patch) or central (pixel)")
      ->check(CLI::IsMember({"full", "central"}));
  app->add_option("--workers", a.config.workers, "Worker threads (0 = all cores)");
  app->add_option("--sigma2-floor", a.config.sigma2_floor, "Lower bound on sigma2 as a fraction of sigma");
  app->add_flag("--timing", a.timing, "Record wall-clock times in reports (makes them non-reproducible)");
}

void finalize(CommonArgs& a) {
  a.config.base_seed = a.seed;
  a.config.mode = a.mode == "central" ? EstimateMode::CentralPixel : EstimateMode::FullPatch;
  if (!(a.tau > 0.0)) throw ParameterError("--tau must be positive");
  a.config.log_tau = std::log(a.tau);
  a.config.validate();
}

ImageBuffer load_existing_image(const fs::path& path) {
  if (!fs::exists(path)) throw PathError("no such file: " + path.string());
  return load_image(path);
}

ClusterModel load_existing_model(const fs::path& path) {
  if (!fs::exists(path)) throw PathError("no such model file: " + path.string());
  return load_model(path);
}

void ensure_parent(const fs::path& file) {
  const fs::path parent = file.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

ReportRow make_row(const std::string& image, double sigma, std::uint64_t seed,
                   const DenoiseReport& report, bool timing) {
  ReportRow row;
  row.image = image;
  row.sigma = sigma;
  row.seed = seed;
  row.pass1_psnr = report.passes.front().psnr;
  if (report.passes.size() > 1) {
    row.pass2_psnr = report.passes[1].psnr;
    row.sigma2 = report.passes[1].sigma;
  }
  row.mean_ess = report.passes.back().mean_ess;
  row.fallback_rate = report.passes.back().fallback_rate;
  row.wall_ms = timing ? report.wall_ms : 0.0;
  return row;
}

// Noise seed for one evaluation run.
std::uint64_t noise_seed(std::uint64_t seed, std::size_t image_index, double sigma) {
  std::uint64_t h = seed * 0x9E3779B97F4A7C15ULL;
  h ^= (static_cast<std::uint64_t>(image_index) + 1) * 0xC2B2AE3D27D4EB4FULL;
  h ^= static_cast<std::uint64_t>(std::llround(sigma * 1000.0)) * 0x165667B19E3779F9ULL;
  return h;
}

// ----------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string data;
  std::string out = "model.isdm";
  int clusters = DenoiseConfig{}.num_clusters;
  double beta = DenoiseConfig{}.beta;
  int patch_side = DenoiseConfig{}.patch_side;
  int stride = DenoiseConfig{}.train_stride;
  std::uint64_t seed = 0;
  int max_iters = 30;
  double stop_frac = 1e-3;
  int workers = 0;
  bool stamp = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const fs::path root(a.data);
  if (!fs::is_directory(root)) throw PathError("dataset directory not found: " + root.string());
  const fs::path train_dir = fs::is_directory(root / "train") ? root / "train" : root;

  std::vector<ImageBuffer> images;
  for (const auto& path : list_images(train_dir, &err)) images.push_back(load_image(path));
  if (images.empty()) throw InsufficientDataError("no training images in " + train_dir.string());

  PatchMatrix patches = collect_patches(images, a.patch_side, a.stride);
  out << "training on " << patches.rows() << " patches (" << images.size() << " images, p = "
      << patches.cols() << ")\n";

  LearnOptions opts;
  opts.num_clusters = a.clusters;
  opts.beta = a.beta;
  opts.seed = a.seed;
  opts.max_outer_iters = a.max_iters;
  opts.stop_frac = a.stop_frac;
  opts.workers = a.workers;
  opts.record_timestamps = a.stamp;
  const ClusterModel model = learn_prior(std::move(patches), a.patch_side, opts);

  const fs::path out_path(a.out);
  ensure_parent(out_path);
  save_model(model, out_path);

  out << "outer iterations: " << model.meta.outer_iterations << '\n';
  out << "final log-likelihood: " << format_number(model.meta.log_likelihood.back(), 6) << '\n';
  out << "cluster sizes:";
  for (const auto& c : model.clusters) out << ' ' << c.members.size();
  out << "\nwrote " << out_path.string() << '\n';
  return kOk;
}

// ----------------------------------------------------------------------------
// denoise

struct DenoiseArgs {
  CommonArgs common;
  std::string model;
  std::string input;
  std::string output;
  std::string report;
  std::string clean;
  double sigma = 0.0;
};

int cmd_denoise(DenoiseArgs& a, std::ostream& out) {
  finalize(a.common);
  const ClusterModel model = load_existing_model(a.model);
  a.common.config.patch_side = model.patch_side;
  const ImageBuffer noisy = load_existing_image(a.input);
  std::optional<ImageBuffer> clean;
  if (!a.clean.empty()) clean = load_existing_image(a.clean);

  const DenoiseResult result = denoise(noisy, model, a.sigma, a.common.config, clean);

  const fs::path out_path(a.output);
  ensure_parent(out_path);
  save_image(result.image, out_path);

  const fs::path report_path = a.report.empty() ? fs::path(out_path).replace_extension(".csv")
                                                : fs::path(a.report);
  ensure_parent(report_path);
  std::ofstream rep(report_path);
  if (!rep) throw PathError("cannot write report " + report_path.string());
  rep << kReportHeader << '\n';
  write_report_row(rep, make_row(fs::path(a.input).filename().string(), a.sigma, a.common.seed,
                                 result.report, a.common.timing));

  for (std::size_t k = 0; k < result.report.passes.size(); ++k) {
    const auto& p = result.report.passes[k];
    out << "pass " << k + 1 << ": sigma " << format_number(p.sigma) << ", mean ESS "
        << format_number(p.mean_ess, 2) << ", fallback rate " << format_number(p.fallback_rate, 4);
    if (p.psnr) out << ", PSNR " << format_number(*p.psnr, 2) << " dB";
    out << '\n';
  }
  out << "wrote " << out_path.string() << " and " << report_path.string() << '\n';
  return kOk;
}

// ----------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  CommonArgs common;
  std::string model;
  std::string data;
  std::vector<std::string> images;
  std::vector<double> sigmas{20, 30, 40, 50};
  std::vector<std::uint64_t> seeds{0};
  std::string out_dir = "results";
  bool no_images = false;
};

int cmd_evaluate(EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  finalize(a.common);
  if (a.sigmas.empty()) throw ParameterError("--sigmas must list at least one value");
  for (double s : a.sigmas) {
    if (!(s > 0.0)) throw ParameterError("noise levels must be positive");
  }
  const ClusterModel model = load_existing_model(a.model);
  a.common.config.patch_side = model.patch_side;

  std::vector<fs::path> paths;
  for (const auto& p : a.images) paths.emplace_back(p);
  if (!a.data.empty()) {
    const fs::path root(a.data);
    if (!fs::is_directory(root)) throw PathError("dataset directory not found: " + root.string());
    const fs::path test_dir = fs::is_directory(root / "test") ? root / "test" : root;
    for (auto& p : list_images(test_dir, &err)) paths.push_back(std::move(p));
  }
  if (paths.empty()) throw InsufficientDataError("no test images given");
  std::vector<ImageBuffer> cleans;
  for (const auto& p : paths) cleans.push_back(load_existing_image(p));

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::ofstream table(dir / "results.csv");
  if (!table) throw PathError("cannot write " + (dir / "results.csv").string());
  table << kReportHeader << '\n';

  struct Totals {
    int runs = 0;
    double noisy = 0.0, pass1 = 0.0, pass2 = 0.0;
  };
  std::map<double, Totals> per_sigma;

  for (std::size_t i = 0; i < paths.size(); ++i) {
    const std::string stem = paths[i].stem().string();
    for (double sigma : a.sigmas) {
      for (std::uint64_t seed : a.seeds) {
        const ImageBuffer noisy = add_noise(cleans[i], sigma, noise_seed(seed, i, sigma));
        DenoiseConfig config = a.common.config;
        config.base_seed = seed;
        const DenoiseResult result = denoise(noisy, model, sigma, config, cleans[i]);
        write_report_row(table, make_row(paths[i].filename().string(), sigma, seed, result.report,
                                         a.common.timing));
        if (!a.no_images) {
          const std::string name = stem + "_s" + format_number(sigma, 0) + "_seed" +
                                   std::to_string(seed) + ".pgm";
          save_image(result.image, dir / name);
        }
        Totals& t = per_sigma[sigma];
        ++t.runs;
        t.noisy += *result.report.noisy_psnr;
        t.pass1 += *result.report.passes.front().psnr;
        t.pass2 += *result.report.passes.back().psnr;
      }
    }
  }

  std::ofstream summary(dir / "summary.csv");
  if (!summary) throw PathError("cannot write " + (dir / "summary.csv").string());
  summary << "sigma,runs,noisy_psnr,pass1_psnr,final_psnr\n";
  out << "sigma  runs  noisy   pass1   final\n";
  for (const auto& [sigma, t] : per_sigma) {
    const double n = t.runs;
    summary << format_number(sigma) << ',' << t.runs << ',' << format_number(t.noisy / n) << ','
            << format_number(t.pass1 / n) << ',' << format_number(t.pass2 / n) << '\n';
    out << format_number(sigma, 0) << "  " << t.runs << "  " << format_number(t.noisy / n, 2) << "  "
        << format_number(t.pass1 / n, 2) << "  " << format_number(t.pass2 / n, 2) << '\n';
  }
  out << "wrote " << (dir / "results.csv").string() << " and " << (dir / "summary.csv").string()
      << '\n';
  return kOk;
}

// ----------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string out;
  int train = 20;
  int test = 5;
  int size = 128;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  TextImageOptions opts;
  opts.width = opts.height = a.size;
  write_text_dataset(a.out, a.train, a.test, a.seed, opts);
  out << "wrote " << a.train << " training and " << a.test << " test images under " << a.out << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Class-adapted importance-sampling patch denoiser"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Learn a generalized Gaussian patch prior");
  train_cmd->add_option("--data", train.data, "Dataset root (uses train/ when present)")->required();
  train_cmd->add_option("--out,--model", train.out, "Output model file");
  train_cmd->add_option("--clusters", train.clusters, "Number of clusters M")->check(CLI::PositiveNumber);
  train_cmd->add_option("--beta", train.beta, "Generalized Gaussian shape")->check(CLI::PositiveNumber);
  train_cmd->add_option("--patch-side", train.patch_side, "Patch side length")->check(CLI::PositiveNumber);
  train_cmd->add_option("--stride,--train-stride", train.stride, "Training patch stride")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", train.seed, "Random seed");
  train_cmd->add_option("--max-iters", train.max_iters, "Maximum outer iterations");
  train_cmd->add_option("--stop-frac", train.stop_frac, "Stop when fewer patches change cluster");
  train_cmd->add_option("--workers", train.workers, "Worker threads (0 = all cores)");
  train_cmd->add_flag("--stamp", train.stamp, "Record training timestamps in the model file");

  DenoiseArgs dn;
  auto* dn_cmd = app.add_subcommand("denoise", "Denoise one image");
  dn_cmd->add_option("--model", dn.model, "Model file")->required();
  dn_cmd->add_option("--input", dn.input, "Noisy image (PGM or PNG)")->required();
  dn_cmd->add_option("--output", dn.output, "Denoised PGM")->required();
  dn_cmd->add_option("--sigma", dn.sigma, "Noise standard deviation (0-255 scale)")
      ->required()
      ->check(CLI::PositiveNumber);
  dn_cmd->add_option("--report", dn.report, "Report CSV (default: output with .csv)");
  dn_cmd->add_option("--clean", dn.clean, "Ground truth for PSNR");
  add_estimation_options(dn_cmd, dn.common);

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Noise, denoise and score a set of test images");
  ev_cmd->add_option("--model", ev.model, "Model file")->required();
  ev_cmd->add_option("--data", ev.data, "Dataset root (uses test/ when present)");
  ev_cmd->add_option("--images", ev.images, "Explicit test images");
  ev_cmd->add_option("--sigmas,--sigma", ev.sigmas, "Noise levels")->delimiter(',');
  ev_cmd->add_option("--seeds", ev.seeds, "Seeds (noise and sampling)")->delimiter(',');
  ev_cmd->add_option("--out-dir", ev.out_dir, "Directory for results.csv, summary.csv and images");
  ev_cmd->add_flag("--no-images", ev.no_images, "Skip writing denoised images");
  add_estimation_options(ev_cmd, ev.common);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic text-image dataset");
  synth_cmd->add_option("--out", synth.out, "Output dataset root")->required();
  synth_cmd->add_option("--train", synth.train, "Training images")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--test", synth.test, "Test images")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--size", synth.size, "Image side length")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Random seed");

  try {
    std::vector<std::string> args = merge_config(raw_args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const ConfigPathError& e) {
    err << "error: " << e.what() << '\n';
    return kBadPath;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(train, out, err);
    if (*dn_cmd) return cmd_denoise(dn, out);
    if (*ev_cmd) return cmd_evaluate(ev, out, err);
    if (*synth_cmd) return cmd_synth(synth, out);
  } catch (const PathError& e) {
    err << "error: " << e.what() << '\n';
    return kBadPath;
  } catch (const InsufficientDataError& e) {
    err << "error: insufficient data: " << e.what() << '\n';
    return kInsufficientData;
  } catch (const ModelLoadError& e) {
    err << "error: model: " << e.what() << '\n';
    return kModelError;
  } catch (const ImageFormatError& e) {
    err << "error: image: " << e.what() << '\n';
    return kImageError;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kParameterError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kParameterError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kBadPath;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace isden::cli
