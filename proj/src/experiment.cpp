#include "nbtv/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "nbtv/error.hpp"
#include "nbtv/image_io.hpp"
#include "nbtv/likelihood.hpp"
#include "nbtv/phantom.hpp"
#include "nbtv/sampler.hpp"

namespace nbtv {

std::string to_string(PenaltyFamily f) {
  switch (f) {
    case PenaltyFamily::LpTvAniso: return "lptv-a";
    case PenaltyFamily::LpTvIso: return "lptv-i";
    case PenaltyFamily::L1TvAniso: return "l1tv-a";
    case PenaltyFamily::L1TvIso: return "l1tv-i";
    case PenaltyFamily::LpNorm: return "lp-norm";
  }
  return "?";
}

PenaltyFamily penalty_family_from_string(std::string_view s) {
  for (auto f : {PenaltyFamily::LpTvAniso, PenaltyFamily::LpTvIso, PenaltyFamily::L1TvAniso,
                 PenaltyFamily::L1TvIso, PenaltyFamily::LpNorm})
    if (s == to_string(f)) return f;
  throw ConfigError("unknown penalty '" + std::string(s) +
                    "' (expected lptv-a, lptv-i, l1tv-a, l1tv-i or lp-norm)");
}

bool has_free_p(PenaltyFamily f) {
  return f == PenaltyFamily::LpTvAniso || f == PenaltyFamily::LpTvIso || f == PenaltyFamily::LpNorm;
}

Penalty make_penalty(PenaltyFamily f, double p, double tau) {
  switch (f) {
    case PenaltyFamily::LpTvAniso: return Penalty{PenaltyKind::AnisoTV, p, tau};
    case PenaltyFamily::LpTvIso: return Penalty{PenaltyKind::IsoTV, p, tau};
    case PenaltyFamily::L1TvAniso: return Penalty{PenaltyKind::AnisoTV, 1.0, tau};
    case PenaltyFamily::L1TvIso: return Penalty{PenaltyKind::IsoTV, 1.0, tau};
    case PenaltyFamily::LpNorm: return Penalty{PenaltyKind::LpNorm, p, tau};
  }
  throw ConfigError("unknown penalty family");
}

namespace {

std::vector<double> powers_of_two(int lo, int hi) {
  std::vector<double> out;
  for (int e = lo; e <= hi; ++e) out.push_back(std::ldexp(1.0, e));
  return out;
}

std::string kind_name(TvKind k) { return k == TvKind::Anisotropic ? "aniso" : "iso"; }

TvKind kind_from_string(const std::string& s) {
  if (s == "aniso") return TvKind::Anisotropic;
  if (s == "iso") return TvKind::Isotropic;
  throw ConfigError("unknown TV kind '" + s + "' (expected aniso or iso)");
}

std::string model_name(NoiseKind k) { return k == NoiseKind::Poisson ? "poisson" : "nb"; }

NoiseKind model_from_string(const std::string& s) {
  if (s == "nb") return NoiseKind::NegativeBinomial;
  if (s == "poisson") return NoiseKind::Poisson;
  throw ConfigError("unknown model '" + s + "' (expected nb or poisson)");
}

NoiseModel model_for(NoiseKind k, double r) {
  return k == NoiseKind::Poisson ? NoiseModel::poisson() : NoiseModel::negative_binomial(r);
}

template <typename T, typename F>
std::string join(const std::vector<T>& v, F&& fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v[i]);
  }
  return out;
}

bool is_builtin_phantom(const std::string& id) {
  const auto ids = phantom_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

}  // namespace

const std::vector<std::string>& experiment_config_keys() {
  static const std::vector<std::string> keys{
      "phantom", "size", "intensity", "blur_sigma", "blur_radius", "floor_eps",
      "r_list", "p_list", "kinds", "exp2_p_list", "penalties", "models",
      "tau_grid", "lp_tau_grid", "tau_scaling", "trials", "seed", "out_dir", "write_images",
      "solver.max_outer_iters", "solver.rel_change_tol", "solver.alpha_min", "solver.alpha_max",
      "solver.alpha_init", "solver.safeguard_memory", "solver.safeguard_sigma",
      "solver.safeguard_max_backtracks",
      "prox.max_inner_iters", "prox.dual_tolerance", "prox.eps_w", "prox.reweight_every"};
  return keys;
}

ExperimentConfig::ExperimentConfig() : tau_grid(powers_of_two(-8, -1)), lp_tau_grid(powers_of_two(-15, -8)) {
  solver.max_outer_iters = 100;
  solver.prox.max_inner_iters = 20;
  solver.safeguard_memory = 10;
}

ExperimentConfig ExperimentConfig::from_config(const Config& c) {
  const auto& keys = experiment_config_keys();
  c.require_known(std::set<std::string>(keys.begin(), keys.end()));

  ExperimentConfig e;
  e.phantom = c.get_string("phantom", e.phantom);
  e.size = c.get_size("size", e.size);
  e.intensity = c.get_double("intensity", e.intensity);
  const double sigma = c.get_double("blur_sigma", e.blur.sigma);
  e.blur = BlurSpec::with_default_radius(sigma);
  e.blur.kernel_radius = c.get_size("blur_radius", e.blur.kernel_radius);
  e.floor_eps = c.get_double("floor_eps", e.floor_eps);

  e.r_list = c.get_doubles("r_list", e.r_list);
  e.p_list = c.get_doubles("p_list", e.p_list);
  e.exp2_p_list = c.get_doubles("exp2_p_list", e.exp2_p_list);
  if (c.has("kinds")) {
    e.kinds.clear();
    for (const auto& s : c.get_strings("kinds", {})) e.kinds.push_back(kind_from_string(s));
  }
  if (c.has("penalties")) {
    e.penalties.clear();
    for (const auto& s : c.get_strings("penalties", {})) e.penalties.push_back(penalty_family_from_string(s));
  }
  if (c.has("models")) {
    e.models.clear();
    for (const auto& s : c.get_strings("models", {})) e.models.push_back(model_from_string(s));
  }
  e.tau_grid = c.get_doubles("tau_grid", e.tau_grid);
  e.lp_tau_grid = c.get_doubles("lp_tau_grid", e.lp_tau_grid);
  const std::string scaling = c.get_string("tau_scaling", "model");
  if (scaling == "model") e.tau_scaling = TauScaling::Model;
  else if (scaling == "none") e.tau_scaling = TauScaling::None;
  else throw ConfigError("tau_scaling must be 'model' or 'none', got '" + scaling + "'");

  e.trials = c.get_size("trials", e.trials);
  e.seed = c.get_u64("seed", e.seed);
  e.out_dir = c.get_string("out_dir", e.out_dir.string());
  e.write_images = c.get_bool("write_images", e.write_images);

  SolverConfig& s = e.solver;
  s.max_outer_iters = c.get_size("solver.max_outer_iters", s.max_outer_iters);
  s.rel_change_tol = c.get_double("solver.rel_change_tol", s.rel_change_tol);
  s.alpha_min = c.get_double("solver.alpha_min", s.alpha_min);
  s.alpha_max = c.get_double("solver.alpha_max", s.alpha_max);
  s.alpha_init = c.get_double("solver.alpha_init", s.alpha_init);
  s.safeguard_memory = c.get_size("solver.safeguard_memory", s.safeguard_memory);
  s.safeguard_sigma = c.get_double("solver.safeguard_sigma", s.safeguard_sigma);
  s.safeguard_max_backtracks = c.get_size("solver.safeguard_max_backtracks", s.safeguard_max_backtracks);
  s.prox.max_inner_iters = c.get_size("prox.max_inner_iters", s.prox.max_inner_iters);
  s.prox.dual_tolerance = c.get_double("prox.dual_tolerance", s.prox.dual_tolerance);
  s.prox.eps_w = c.get_double("prox.eps_w", s.prox.eps_w);
  s.prox.reweight_every = c.get_size("prox.reweight_every", s.prox.reweight_every);

  e.validate();
  return e;
}

void ExperimentConfig::validate() const {
  if (is_builtin_phantom(phantom) && size < 16) throw ConfigError("size must be at least 16");
  if (!(intensity >= 0.0)) throw ConfigError("intensity must be nonnegative");
  try {
    blur.validate();
    solver.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(floor_eps > 0.0)) throw ConfigError("floor_eps must be positive");
  if (r_list.empty()) throw ConfigError("r_list must not be empty");
  for (double r : r_list)
    if (!(r > 0.0)) throw ConfigError("r_list entries must be positive");
  for (const auto* list : {&p_list, &exp2_p_list})
    for (double p : *list)
      if (!(p > 0.0 && p < 1.0)) throw ConfigError("p_list entries must lie in (0, 1)");
  for (const auto* grid : {&tau_grid, &lp_tau_grid}) {
    if (grid->empty()) throw ConfigError("tau grids must not be empty");
    for (double t : *grid)
      if (!(t > 0.0)) throw ConfigError("tau grid entries must be positive");
  }
  if (trials < 1) throw ConfigError("trials must be at least 1");
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  kv["phantom"] = phantom;
  if (!is_builtin_phantom(phantom)) kv["phantom_content"] = fnv1a_hex(format_csv(read_image(phantom)));
  kv["size"] = std::to_string(size);
  kv["intensity"] = format_double(intensity);
  kv["blur_sigma"] = format_double(blur.sigma);
  kv["blur_radius"] = std::to_string(blur.kernel_radius);
  kv["floor_eps"] = format_double(floor_eps);
  kv["r_list"] = format_doubles(r_list);
  kv["p_list"] = format_doubles(p_list);
  kv["exp2_p_list"] = format_doubles(exp2_p_list);
  kv["kinds"] = join(kinds, kind_name);
  kv["penalties"] = join(penalties, [](PenaltyFamily f) { return to_string(f); });
  kv["models"] = join(models, model_name);
  kv["tau_grid"] = format_doubles(tau_grid);
  kv["lp_tau_grid"] = format_doubles(lp_tau_grid);
  kv["tau_scaling"] = tau_scaling == TauScaling::Model ? "model" : "none";
  kv["trials"] = std::to_string(trials);
  kv["seed"] = std::to_string(seed);
  kv["solver.max_outer_iters"] = std::to_string(solver.max_outer_iters);
  kv["solver.rel_change_tol"] = format_double(solver.rel_change_tol);
  kv["solver.alpha_min"] = format_double(solver.alpha_min);
  kv["solver.alpha_max"] = format_double(solver.alpha_max);
  kv["solver.alpha_init"] = format_double(solver.alpha_init);
  kv["solver.safeguard_memory"] = std::to_string(solver.safeguard_memory);
  kv["solver.safeguard_sigma"] = format_double(solver.safeguard_sigma);
  kv["solver.safeguard_max_backtracks"] = std::to_string(solver.safeguard_max_backtracks);
  kv["prox.max_inner_iters"] = std::to_string(solver.prox.max_inner_iters);
  kv["prox.dual_tolerance"] = format_double(solver.prox.dual_tolerance);
  kv["prox.eps_w"] = format_double(solver.prox.eps_w);
  kv["prox.reweight_every"] = std::to_string(solver.prox.reweight_every);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

Image ExperimentConfig::truth() const {
  if (is_builtin_phantom(phantom)) return make_phantom(phantom, size, intensity);
  Image img = read_image(phantom);
  require_nonnegative(img, "phantom image");
  const double peak = img.max();
  if (peak > 0.0)
    for (double& v : img.values()) v *= intensity / peak;
  return img;
}

Image ExperimentConfig::mean_counts() const { return blur_apply(blur, truth()); }

double ExperimentConfig::tau_scale(NoiseKind model, double r) const {
  if (tau_scaling == TauScaling::None) return 1.0;
  const Image mean = mean_counts();
  const double peak = mean.max();
  if (!(peak > 0.0)) return 1.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : mean.values())
    if (v > 0.01 * peak) {
      sum += v;
      ++count;
    }
  const double w = r / (r + sum / static_cast<double>(count));
  return model == NoiseKind::Poisson ? 1.0 / std::sqrt(w) : std::sqrt(w);
}

ObservedCounts simulate_trial(const ExperimentConfig& cfg, const Image& mean, double r,
                              std::size_t trial) {
  RngState rng(cfg.seed + trial);
  return sample_counts(NoiseModel::negative_binomial(r), mean, rng);
}

namespace {

// Field for CSV output: no commas, quotes or line breaks.
std::string csv_safe(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '"' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string bool_field(bool b) { return b ? "1" : "0"; }

struct Evaluation {
  CellScore score;
  std::vector<Image> images;
  bool phi_ok = true;
  bool nonneg_ok = true;
};

CellScore summarize(std::vector<double> rmse) {
  CellScore s;
  double sum = 0.0;
  for (double v : rmse) sum += v;
  s.mean_rmse = sum / static_cast<double>(rmse.size());
  if (rmse.size() > 1) {
    double ss = 0.0;
    for (double v : rmse) ss += (v - s.mean_rmse) * (v - s.mean_rmse);
    s.std_rmse = std::sqrt(ss / static_cast<double>(rmse.size() - 1));
  }
  s.trial_rmse = std::move(rmse);
  return s;
}

// Reconstructs every trial for one (model, penalty) setting.
Evaluation evaluate(const ExperimentConfig& cfg, const Image& truth,
                    const std::vector<ObservedCounts>& observations, const NoiseModel& model,
                    const Penalty& penalty) {
  Evaluation ev;
  std::vector<double> rmses;
  for (const auto& y : observations) {
    const DataFit fit(model, y, cfg.blur, cfg.floor_eps);
    Reconstruction rec = reconstruct(fit, penalty, cfg.solver);
    const auto& d = rec.diagnostics;
    ev.phi_ok = ev.phi_ok && rec.trace[d.best_iter].phi <= rec.trace.front().phi;
    ev.nonneg_ok = ev.nonneg_ok && d.min_iterate_value >= 0.0 && rec.image.min() >= 0.0;
    rmses.push_back(rmse(rec.image, truth));
    ev.images.push_back(std::move(rec.image));
  }
  ev.score = summarize(std::move(rmses));
  return ev;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

void write_trial_images(const std::filesystem::path& dir, const std::vector<Image>& images) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < images.size(); ++k) {
    const std::string stem = "trial" + std::to_string(k);
    write_csv(dir / (stem + ".csv"), images[k]);
    write_pgm(dir / (stem + ".pgm"), images[k]);
  }
}

std::vector<ObservedCounts> simulate_all(const ExperimentConfig& cfg, const Image& mean, double r) {
  std::vector<ObservedCounts> obs;
  for (std::size_t t = 0; t < cfg.trials; ++t) obs.push_back(simulate_trial(cfg, mean, r, t));
  return obs;
}

std::filesystem::path experiment_dir(const ExperimentConfig& cfg, const char* name) {
  if (cfg.out_dir.empty()) return {};
  const auto dir = cfg.out_dir / name;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

Experiment1Result run_experiment1(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  Experiment1Result res;
  res.digest = cfg.digest();
  const Image truth = cfg.truth();
  const Image mean = blur_apply(cfg.blur, truth);
  const auto dir = experiment_dir(cfg, "experiment1");

  std::string summary = "config_digest,cell,r,kind,p,tau_index,tau,mean_rmse,std_rmse,trials,phi_ok,nonneg_ok,status,message\n";
  std::string grid = "config_digest,cell,tau_index,tau,mean_rmse\n";
  for (double r : cfg.r_list) {
    const NoiseModel model = NoiseModel::negative_binomial(r);
    const auto observations = simulate_all(cfg, mean, r);
    const double scale = cfg.tau_scale(NoiseKind::NegativeBinomial, r);
    for (TvKind kind : cfg.kinds) {
      for (double p : cfg.p_list) {
        Experiment1Row row;
        row.cell = "r" + format_double(r) + "_" + kind_name(kind) + "_p" + format_double(p);
        row.r = r;
        row.kind = kind;
        row.p = p;
        if (progress) progress("experiment1 " + row.cell);
        try {
          std::vector<Image> best_images;
          for (std::size_t j = 0; j < cfg.tau_grid.size(); ++j) {
            const double tau = cfg.tau_grid[j] * scale;
            const PenaltyKind pk = kind == TvKind::Anisotropic ? PenaltyKind::AnisoTV : PenaltyKind::IsoTV;
            Evaluation ev = evaluate(cfg, truth, observations, model, Penalty{pk, p, tau});
            row.tau_mean_rmse.push_back(ev.score.mean_rmse);
            row.phi_ok = row.phi_ok && ev.phi_ok;
            row.nonneg_ok = row.nonneg_ok && ev.nonneg_ok;
            grid += res.digest + "," + row.cell + "," + std::to_string(j) + "," + format_double(tau) +
                    "," + format_double(ev.score.mean_rmse) + "\n";
            if (j == 0 || ev.score.mean_rmse < row.best.mean_rmse) {
              row.best_tau_index = j;
              row.best_tau = tau;
              row.best = ev.score;
              best_images = std::move(ev.images);
            }
          }
          if (!dir.empty() && cfg.write_images) write_trial_images(dir / row.cell, best_images);
          summary += res.digest + "," + row.cell + "," + format_double(r) + "," + kind_name(kind) + "," +
                     format_double(p) + "," + std::to_string(row.best_tau_index) + "," +
                     format_double(row.best_tau) + "," + format_double(row.best.mean_rmse) + "," +
                     format_double(row.best.std_rmse) + "," + std::to_string(cfg.trials) + "," +
                     bool_field(row.phi_ok) + "," + bool_field(row.nonneg_ok) + ",ok,\n";
        } catch (const std::exception& e) {
          row.error = e.what();
          summary += res.digest + "," + row.cell + "," + format_double(r) + "," + kind_name(kind) + "," +
                     format_double(p) + ",,,,," + std::to_string(cfg.trials) + ",,,error," +
                     csv_safe(row.error) + "\n";
        }
        res.rows.push_back(std::move(row));
      }
    }
  }
  res.summary_csv = std::move(summary);
  res.grid_csv = std::move(grid);
  if (!dir.empty()) {
    write_text(dir / "summary.csv", res.summary_csv);
    write_text(dir / "grid.csv", res.grid_csv);
  }
  return res;
}

Experiment2Result run_experiment2(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  Experiment2Result res;
  res.digest = cfg.digest();
  const Image truth = cfg.truth();
  const Image mean = blur_apply(cfg.blur, truth);
  const auto dir = experiment_dir(cfg, "experiment2");

  const std::size_t nr = cfg.r_list.size();
  const std::size_t np = cfg.penalties.size();
  std::vector<Experiment2Row> rows(cfg.models.size() * np * nr);
  std::vector<std::string> grid_lines(rows.size());
  for (std::size_t ir = 0; ir < nr; ++ir) {
    const double r = cfg.r_list[ir];
    const auto observations = simulate_all(cfg, mean, r);
    for (std::size_t im = 0; im < cfg.models.size(); ++im) {
      const NoiseModel model = model_for(cfg.models[im], r);
      const double scale = cfg.tau_scale(cfg.models[im], r);
      for (std::size_t ip = 0; ip < np; ++ip) {
        const PenaltyFamily family = cfg.penalties[ip];
        const std::size_t index = (im * np + ip) * nr + ir;
        Experiment2Row& row = rows[index];
        row.cell = model_name(cfg.models[im]) + "_" + to_string(family) + "_r" + format_double(r);
        row.model = cfg.models[im];
        row.penalty = family;
        row.r = r;
        if (progress) progress("experiment2 " + row.cell);
        try {
          const std::vector<double> ps = has_free_p(family) ? cfg.exp2_p_list : std::vector<double>{1.0};
          const auto& taus = family == PenaltyFamily::LpNorm ? cfg.lp_tau_grid : cfg.tau_grid;
          std::vector<Image> best_images;
          bool first = true;
          for (double p : ps) {
            for (std::size_t j = 0; j < taus.size(); ++j) {
              const double tau = taus[j] * scale;
              Evaluation ev = evaluate(cfg, truth, observations, model, make_penalty(family, p, tau));
              row.phi_ok = row.phi_ok && ev.phi_ok;
              row.nonneg_ok = row.nonneg_ok && ev.nonneg_ok;
              grid_lines[index] += res.digest + "," + row.cell + "," + format_double(p) + "," +
                                   std::to_string(j) + "," + format_double(tau) + "," +
                                   format_double(ev.score.mean_rmse) + "\n";
              if (first || ev.score.mean_rmse < row.best.mean_rmse) {
                first = false;
                row.best_p = p;
                row.best_tau = tau;
                row.best = ev.score;
                best_images = std::move(ev.images);
              }
            }
          }
          if (!dir.empty() && cfg.write_images) write_trial_images(dir / row.cell, best_images);
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      }
    }
  }

  std::string summary = "config_digest,cell,model,penalty,r,p,tau,mean_rmse,std_rmse,trials,phi_ok,nonneg_ok,status,message\n";
  std::string grid = "config_digest,cell,p,tau_index,tau,mean_rmse\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    summary += res.digest + "," + row.cell + "," + model_name(row.model) + "," + to_string(row.penalty) +
               "," + format_double(row.r) + ",";
    if (row.error.empty()) {
      summary += format_double(row.best_p) + "," + format_double(row.best_tau) + "," +
                 format_double(row.best.mean_rmse) + "," + format_double(row.best.std_rmse) + "," +
                 std::to_string(cfg.trials) + "," + bool_field(row.phi_ok) + "," +
                 bool_field(row.nonneg_ok) + ",ok,\n";
    } else {
      summary += ",,,," + std::to_string(cfg.trials) + ",,,error," + csv_safe(row.error) + "\n";
    }
    grid += grid_lines[i];
  }
  res.rows = std::move(rows);
  res.summary_csv = std::move(summary);
  res.grid_csv = std::move(grid);
  if (!dir.empty()) {
    write_text(dir / "summary.csv", res.summary_csv);
    write_text(dir / "grid.csv", res.grid_csv);
  }
  return res;
}

}  // namespace nbtv
