#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "nbtv/blur.hpp"
#include "nbtv/config.hpp"
#include "nbtv/image.hpp"
#include "nbtv/noise_model.hpp"
#include "nbtv/regularizers.hpp"
#include "nbtv/solver.hpp"

namespace nbtv {

/// One of the five penalty families compared across noise models.
enum class PenaltyFamily { LpTvAniso, LpTvIso, L1TvAniso, L1TvIso, LpNorm };

std::string to_string(PenaltyFamily f);
/// Accepts "lptv-a", "lptv-i", "l1tv-a", "l1tv-i", "lp-norm".
PenaltyFamily penalty_family_from_string(std::string_view s);
/// True for the families with a free exponent p.
bool has_free_p(PenaltyFamily f);
Penalty make_penalty(PenaltyFamily f, double p, double tau);

enum class TauScaling {
  /// tau = grid value; the same grid for every model.
  None,
  /// With w = r / (r + mu_ref), mu_ref the mean noiseless count over the
  /// phantom support and r the dispersion of the data: NB cells multiply the
  /// grid by sqrt(w), Poisson cells by 1 / sqrt(w). Both fits then peak near
  /// the same grid entry.
  Model,
};

struct ExperimentConfig {
  /// Built-in phantom id or a path to a CSV/PGM image (rescaled to peak
  /// `intensity`).
  std::string phantom = "shapes";
  std::size_t size = 64;
  double intensity = 50.0;
  BlurSpec blur = BlurSpec::with_default_radius(2.0);
  double floor_eps = 1e-10;

  std::vector<double> r_list{1.0, 10.0, 25.0, 1000.0};
  /// Experiment I exponents.
  std::vector<double> p_list{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<TvKind> kinds{TvKind::Anisotropic, TvKind::Isotropic};
  /// Experiment II exponent grid for the families with free p.
  std::vector<double> exp2_p_list{0.1, 0.5, 0.9};
  std::vector<PenaltyFamily> penalties{PenaltyFamily::LpTvAniso, PenaltyFamily::LpTvIso,
                                       PenaltyFamily::L1TvAniso, PenaltyFamily::L1TvIso,
                                       PenaltyFamily::LpNorm};
  std::vector<NoiseKind> models{NoiseKind::NegativeBinomial, NoiseKind::Poisson};

  /// TV penalties; 2^-8 .. 2^-1.
  std::vector<double> tau_grid;
  /// Pixelwise lp-norm penalty; 2^-15 .. 2^-8.
  std::vector<double> lp_tau_grid;
  TauScaling tau_scaling = TauScaling::Model;

  std::size_t trials = 10;
  std::uint64_t seed = 1;
  SolverConfig solver;

  /// Empty: nothing is written.
  std::filesystem::path out_dir = "out";
  bool write_images = true;

  ExperimentConfig();

  /// Reads every known key from `c`, defaulting the rest; rejects unknown keys.
  static ExperimentConfig from_config(const Config& c);
  void validate() const;

  /// Sorted "key = value" lines of every setting that affects results
  /// (out_dir and write_images excluded).
  std::string canonical_text() const;
  std::string digest() const { return fnv1a_hex(canonical_text()); }

  Image truth() const;
  /// Noiseless expected counts A f*.
  Image mean_counts() const;
  /// Grid multiplier for a cell fitting `model` to data of dispersion r.
  double tau_scale(NoiseKind model, double r) const;
};

/// Keys understood by ExperimentConfig::from_config.
const std::vector<std::string>& experiment_config_keys();

/// Observation of trial `trial` under dispersion r: NB(r) counts of
/// mean_counts() drawn with seed base_seed + trial.
ObservedCounts simulate_trial(const ExperimentConfig& cfg, const Image& mean, double r,
                              std::size_t trial);

struct CellScore {
  double mean_rmse = 0.0;
  double std_rmse = 0.0;
  std::vector<double> trial_rmse;
};

struct Experiment1Row {
  std::string cell;
  double r = 0.0;
  TvKind kind = TvKind::Anisotropic;
  double p = 0.0;
  std::size_t best_tau_index = 0;
  double best_tau = 0.0;
  CellScore best;
  /// Mean RMSE per tau grid entry.
  std::vector<double> tau_mean_rmse;
  bool phi_ok = true;
  bool nonneg_ok = true;
  std::string error;
};

struct Experiment2Row {
  std::string cell;
  NoiseKind model = NoiseKind::NegativeBinomial;
  PenaltyFamily penalty = PenaltyFamily::LpTvAniso;
  double r = 0.0;
  /// Selected exponent; 1 for the l1 TV families.
  double best_p = 1.0;
  double best_tau = 0.0;
  CellScore best;
  bool phi_ok = true;
  bool nonneg_ok = true;
  std::string error;
};

struct Experiment1Result {
  std::string digest;
  std::vector<Experiment1Row> rows;
  std::string summary_csv;
  std::string grid_csv;
};

struct Experiment2Result {
  std::string digest;
  std::vector<Experiment2Row> rows;
  std::string summary_csv;
  std::string grid_csv;
};

using ProgressFn = std::function<void(std::string_view)>;

/// r x p x kind sweep of the NB model. Per cell the tau grid entry with the
/// lowest mean RMSE over trials is reported. Writes summary.csv (one row per
/// cell) and grid.csv (mean RMSE at every grid point) under
/// <out>/experiment1/ and, when write_images is set, the best reconstruction
/// of every trial as <cell>/trial<k>.{csv,pgm}.
Experiment1Result run_experiment1(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// model x penalty x r grid; tau (and p for the lp families) chosen per cell by
/// lowest mean RMSE. Output layout as run_experiment1 under experiment2/.
Experiment2Result run_experiment2(const ExperimentConfig& cfg, const ProgressFn& progress = {});

}  // namespace nbtv
