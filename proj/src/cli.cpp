#include "nbtv/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "nbtv/config.hpp"
#include "nbtv/error.hpp"
#include "nbtv/experiment.hpp"
#include "nbtv/image_io.hpp"
#include "nbtv/likelihood.hpp"
#include "nbtv/sampler.hpp"
#include "nbtv/solver.hpp"

namespace nbtv {

namespace {

// Keys of the single-run subcommands; experiment keys are accepted everywhere.
const std::set<std::string> kRunKeys{"r", "model", "penalty", "p", "tau", "counts", "truth", "initial"};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void add_common(CLI::App& cmd, CommonOptions& o) {
  cmd.add_option("--config", o.config_path, "Configuration file (key = value lines)")->required();
  cmd.add_option("--seed", o.seed, "Base seed; overrides the 'seed' key");
  cmd.add_option("--out-dir", o.out_dir, "Output directory; overrides the 'out_dir' key");
  cmd.add_option("--set", o.overrides, "Override a key, e.g. --set trials=3")->take_all();
  cmd.add_flag("--quiet", o.quiet, "No progress messages");
}

Config load_config(const CommonOptions& o) {
  Config c = Config::load(o.config_path);
  for (const auto& kv : o.overrides) c.set_assignment(kv);
  if (o.seed) c.set("seed", std::to_string(*o.seed));
  if (o.out_dir) c.set("out_dir", *o.out_dir);
  return c;
}

ExperimentConfig experiment_config(const Config& all) {
  Config c;
  for (const auto& [k, v] : all.entries())
    if (!kRunKeys.count(k)) c.set(k, v);
  return ExperimentConfig::from_config(c);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::filesystem::path output_dir(const ExperimentConfig& e, const char* name) {
  const auto dir = (e.out_dir.empty() ? std::filesystem::path(".") : e.out_dir) / name;
  std::filesystem::create_directories(dir);
  return dir;
}

void write_both(const std::filesystem::path& dir, const std::string& stem, const Image& img) {
  write_csv(dir / (stem + ".csv"), img);
  write_pgm(dir / (stem + ".pgm"), img);
}

int run_simulate(const Config& c, std::ostream& out) {
  const ExperimentConfig e = experiment_config(c);
  const double r = c.get_double("r", 10.0);
  const Image truth = e.truth();
  const Image mean = blur_apply(e.blur, truth);
  RngState rng(e.seed);
  const ObservedCounts y = sample_counts(NoiseModel::negative_binomial(r), mean, rng);

  const auto dir = output_dir(e, "simulate");
  write_both(dir, "truth", truth);
  write_both(dir, "mean", mean);
  write_counts_csv(dir / "counts.csv", y);
  write_pgm(dir / "counts.pgm", y.as_image());
  out << "wrote " << (dir / "counts.csv").string() << " (" << y.rows() << "x" << y.cols()
      << ", total " << y.total() << ")\n";
  return kExitOk;
}

int run_reconstruct(const Config& c, std::ostream& out) {
  const ExperimentConfig e = experiment_config(c);
  const double r = c.get_double("r", 10.0);
  const std::string model_name = c.get_string("model", "nb");
  NoiseModel model = NoiseModel::poisson();
  if (model_name == "nb") model = NoiseModel::negative_binomial(r);
  else if (model_name != "poisson") throw ConfigError("model must be 'nb' or 'poisson', got '" + model_name + "'");
  const PenaltyFamily family = penalty_family_from_string(c.get_string("penalty", "lptv-a"));
  const Penalty penalty = make_penalty(family, c.get_double("p", 0.5), c.get_double("tau", 0.01));
  try {
    penalty.validate();
  } catch (const DomainError& ex) {
    throw ConfigError(ex.what());
  }

  std::optional<Image> truth;
  ObservedCounts y;
  if (c.has("counts")) {
    y = read_counts_csv(c.get_string("counts", ""));
    if (c.has("truth")) truth = read_image(c.get_string("truth", ""));
  } else {
    truth = e.truth();
    RngState rng(e.seed);
    y = sample_counts(NoiseModel::negative_binomial(r), blur_apply(e.blur, *truth), rng);
  }
  std::optional<Image> f0;
  if (c.has("initial")) f0 = read_image(c.get_string("initial", ""));

  const DataFit fit(model, y, e.blur, e.floor_eps);
  const Reconstruction rec = reconstruct(fit, penalty, e.solver, std::move(f0), truth);

  const auto dir = output_dir(e, "reconstruct");
  write_both(dir, "reconstruction", rec.image);
  write_text(dir / "trace.csv", format_trace_csv(rec.trace));

  const auto& d = rec.diagnostics;
  out << "iterations " << rec.trace.size() - 1 << ", returned iterate " << d.best_iter
      << (d.converged ? ", converged" : "") << (d.stalled ? ", stalled" : "") << "\n";
  out << "phi initial " << format_double(rec.trace.front().phi) << ", final "
      << format_double(rec.trace[d.best_iter].phi) << "\n";
  if (truth) out << "rmse " << format_double(rmse(rec.image, *truth)) << "\n";
  out << "wrote " << (dir / "reconstruction.csv").string() << "\n";
  return kExitOk;
}

template <typename Run>
int run_experiment(const Config& c, bool quiet, std::ostream& out, std::ostream& err, Run&& run) {
  const ExperimentConfig e = experiment_config(c);
  ProgressFn progress;
  if (!quiet) progress = [&err](std::string_view msg) { err << msg << std::endl; };
  const auto result = run(e, progress);
  out << result.summary_csv;
  return kExitOk;
}

int run_metrics(const std::string& truth_path, const std::string& estimate_path, std::ostream& out) {
  const Image truth = read_image(truth_path);
  const Image estimate = read_image(estimate_path);
  out << "rmse " << format_double(rmse(estimate, truth)) << "\n";
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Penalized NB/Poisson reconstruction of blurred count images", "nbtv"};
  app.require_subcommand(1);

  CommonOptions sim, rec, ex1, ex2;
  auto* simulate = app.add_subcommand("simulate", "Write a phantom, its blurred mean and NB counts");
  add_common(*simulate, sim);
  auto* reconstruct_cmd = app.add_subcommand("reconstruct", "Reconstruct an image from counts");
  add_common(*reconstruct_cmd, rec);
  auto* experiment1 = app.add_subcommand("experiment1", "r x p x TV-kind sweep under the NB model");
  add_common(*experiment1, ex1);
  auto* experiment2 = app.add_subcommand("experiment2", "Model x penalty x r comparison");
  add_common(*experiment2, ex2);
  std::string truth_path, estimate_path;
  auto* metrics = app.add_subcommand("metrics", "Relative l2 error of an estimate");
  metrics->add_option("--truth", truth_path, "Reference image (CSV or PGM)")->required();
  metrics->add_option("--estimate", estimate_path, "Estimated image (CSV or PGM)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run 'nbtv --help' for usage\n";
    return kExitConfig;
  }

  try {
    if (*metrics) return run_metrics(truth_path, estimate_path, out);
    if (*simulate) return run_simulate(load_config(sim), out);
    if (*reconstruct_cmd) return run_reconstruct(load_config(rec), out);
    if (*experiment1)
      return run_experiment(load_config(ex1), ex1.quiet, out, err,
                            [](const ExperimentConfig& e, const ProgressFn& p) { return run_experiment1(e, p); });
    if (*experiment2)
      return run_experiment(load_config(ex2), ex2.quiet, out, err,
                            [](const ExperimentConfig& e, const ProgressFn& p) { return run_experiment2(e, p); });
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace nbtv
