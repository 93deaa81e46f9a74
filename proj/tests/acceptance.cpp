// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion;
// the exit status is nonzero if any selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "nbtv/blur.hpp"
#include "nbtv/experiment.hpp"
#include "nbtv/likelihood.hpp"
#include "nbtv/prox.hpp"
#include "nbtv/sampler.hpp"
#include "nbtv/solver.hpp"
#include "prox_oracle.hpp"
#include "test_support.hpp"

namespace {

using namespace nbtv;
using nbtv::testing::random_image;

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double relative_l2(const Image& got, const Image& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num / den);
}

DataFit random_fit(std::mt19937_64& rng, std::size_t m, std::size_t n, double r, Image& f) {
  std::uniform_real_distribution<double> sigma(0.5, 2.0);
  const BlurSpec blur = BlurSpec::with_default_radius(sigma(rng));
  f = random_image(m, n, rng, 0.5, 10.0);
  RngState counts_rng(rng());
  return DataFit(NoiseModel::negative_binomial(r),
                 sample_counts(NoiseModel::negative_binomial(r), blur_apply(blur, f), counts_rng), blur);
}

Image central_difference(const std::function<double(const Image&)>& phi, const Image& f, double h) {
  Image g(f.rows(), f.cols());
  for (std::size_t i = 0; i < f.size(); ++i) {
    Image up = f, down = f;
    up[i] += h;
    down[i] -= h;
    g[i] = (phi(up) - phi(down)) / (2 * h);
  }
  return g;
}

Outcome gradients() {
  Stopwatch clock;
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> dim(3, 6);
  const double rs[] = {1.0, 10.0, 1000.0};
  double worst = 0.0;
  int instances = 0;
  for (int k = 0; k < 30; ++k, ++instances) {
    Image f;
    const DataFit nb = random_fit(rng, dim(rng), dim(rng), rs[k % 3], f);
    const DataFit po = nb.with_model(NoiseModel::poisson());
    const double h = 1e-4;
    worst = std::max(worst, relative_l2(central_difference([&](const Image& x) { return nb_objective(nb, x); }, f, h),
                                        nb_gradient(nb, f)));
    worst = std::max(worst,
                     relative_l2(central_difference([&](const Image& x) { return poisson_objective(po, x); }, f, h),
                                 poisson_gradient(po, f)));
  }
  const double t = clock.seconds();
  return {worst < 1e-5 && t < 10.0,
          fmt("%d instances x 2 models, max relative error %.2e (limit 1e-5), %.2f s (limit 10 s)", instances, worst,
              t)};
}

Outcome hessian() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> dim(2, 4);
  std::normal_distribution<double> normal;
  const double rs[] = {1.0, 10.0, 1000.0};
  double worst = 0.0;
  const int instances = 21;
  for (int k = 0; k < instances; ++k) {
    Image f;
    const DataFit fit = random_fit(rng, dim(rng), dim(rng), rs[k % 3], f);
    Image v(f.rows(), f.cols());
    for (auto& x : v.values()) x = normal(rng);
    const double h = 1e-5;
    Image up = f, down = f;
    for (std::size_t i = 0; i < f.size(); ++i) {
      up[i] += h * v[i];
      down[i] -= h * v[i];
    }
    const Image gu = nb_gradient(fit, up), gd = nb_gradient(fit, down);
    Image fd(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.size(); ++i) fd[i] = (gu[i] - gd[i]) / (2 * h);
    const auto hv = nb_hessian_dense(fit, f).multiply({v.values().begin(), v.values().end()});
    worst = std::max(worst, relative_l2(Image(f.rows(), f.cols(), hv), fd));
  }
  return {worst < 1e-4, fmt("%d instances of <= 16 pixels, max relative error %.2e (limit 1e-4)", instances, worst)};
}

Outcome adjoint() {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  std::uniform_real_distribution<double> sigma(0.3, 4.0);
  std::uniform_int_distribution<int> extra(-2, 3);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double s = sigma(rng);
    const int radius = std::max(0, static_cast<int>(std::ceil(3 * s)) + extra(rng));
    const GaussianBlur A(BlurSpec{static_cast<std::size_t>(radius), s});
    const std::size_t m = dim(rng), n = dim(rng);
    const Image f = random_image(m, n, rng, -1.0, 1.0);
    const Image g = random_image(m, n, rng, -1.0, 1.0);
    worst = std::max(worst, std::abs(dot(A.apply(f), g) - dot(f, A.adjoint(g))));
  }
  return {worst < 1e-10, fmt("100 blur/shape combinations, max |<Af,g> - <f,A^T g>| = %.2e (limit 1e-10)", worst)};
}

Outcome sampler() {
  Stopwatch clock;
  const std::pair<double, double> cases[] = {{5.0, 1.0}, {5.0, 10.0}, {20.0, 25.0}};
  const std::size_t n = 1'000'000;
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 404;
  for (auto [mu, r] : cases) {
    RngState rng(seed++);
    std::vector<double> x(n);
    double sum = 0.0;
    for (auto& v : x) sum += v = static_cast<double>(sample_count(NoiseModel::negative_binomial(r), mu, rng));
    const double mean = sum / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
      const double d = (v - mean) * (v - mean);
      m2 += d;
      m4 += d * d;
    }
    const double var = m2 / (n - 1);
    const double mean_z = (mean - mu) / std::sqrt(var / n);
    const double var_z = (var - (mu + mu * mu / r)) / std::sqrt((m4 / n - var * var) / n);
    ok = ok && std::abs(mean_z) < 3 && std::abs(var_z) < 3;
    detail += fmt("(mu %g, r %g): mean z %+.2f, var z %+.2f; ", mu, r, mean_z, var_z);
  }
  const double t = clock.seconds();
  return {ok && t < 30.0, detail + fmt("%.1f s (limit 30 s)", t)};
}

Outcome poisson_limit() {
  std::mt19937_64 rng(505);
  double grad_diff = 0.0;
  for (int k = 0; k < 10; ++k) {
    Image f;
    const DataFit nb = random_fit(rng, 4 + k % 3, 5, 1e6, f);
    const Image a = nb_gradient(nb, f);
    const Image b = poisson_gradient(nb.with_model(NoiseModel::poisson()), f);
    for (std::size_t i = 0; i < f.size(); ++i) grad_diff = std::max(grad_diff, std::abs(a[i] - b[i]));
  }
  double iter_diff = 0.0;
  for (int k = 0; k < 5; ++k) {
    Image f;
    const DataFit nb = random_fit(rng, 16, 16, 1e6, f);
    const Penalty pen{k % 2 ? PenaltyKind::IsoTV : PenaltyKind::AnisoTV, 0.5 + 0.1 * k, 0.05};
    Reconstructor a(nb, pen, SolverConfig{});
    Reconstructor b(nb.with_model(NoiseModel::poisson()), pen, SolverConfig{});
    a.step();
    b.step();
    iter_diff = std::max(iter_diff, relative_l2(a.iterate(), b.iterate()));
  }
  return {grad_diff < 1e-4 && iter_diff < 1e-3,
          fmt("r = 1e6: max |grad NB - grad Poisson| %.2e (limit 1e-4), first-iterate relative gap %.2e (limit 1e-3)",
              grad_diff, iter_diff)};
}

Outcome prox_oracle() {
  Stopwatch clock;
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> wdist(0.3, 3.0);
  ProxConfig cfg;
  cfg.max_inner_iters = 5000;
  cfg.dual_tolerance = 1e-13;
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Image b = random_image(4, 4, rng, -0.5, 2.0);
    const TvKind kind = k % 2 ? TvKind::Isotropic : TvKind::Anisotropic;
    WeightFields w = WeightFields::uniform(b.shape());
    if (k >= 4) {
      for (auto& g : w.gamma) g = wdist(rng);
      for (auto& o : w.omega) o = wdist(rng);
    }
    const double lambda = 0.1 + 0.1 * k;
    const Image x = prox_weighted_tv(b, lambda, kind, w, cfg);
    const double got = prox_objective(x, b, lambda, kind, w);
    const double want = nbtv::testing::projected_subgradient_oracle(b, lambda, kind, w);
    worst = std::max(worst, std::abs(got - want) / want);
  }
  const double t = clock.seconds();
  return {worst < 1e-5 && t < 60.0,
          fmt("10 instances, max relative objective gap %.2e (limit 1e-5), %.1f s (limit 60 s)", worst, t)};
}

std::string model_label(NoiseKind m) { return m == NoiseKind::Poisson ? "poisson" : "nb"; }

void print_experiment2_table(const Experiment2Result& res, const std::vector<double>& r_list) {
  std::printf("        %-8s %-8s", "model", "penalty");
  for (double r : r_list) std::printf("  r=%-7g", r);
  std::printf("\n");
  std::map<std::pair<NoiseKind, PenaltyFamily>, std::map<double, const Experiment2Row*>> table;
  for (const auto& row : res.rows) table[{row.model, row.penalty}][row.r] = &row;
  for (const auto& [key, cells] : table) {
    std::printf("        %-8s %-8s", model_label(key.first).c_str(), to_string(key.second).c_str());
    for (double r : r_list) {
      const auto* row = cells.at(r);
      if (row->error.empty()) std::printf("  %.4f   ", row->best.mean_rmse);
      else std::printf("  error    ");
    }
    std::printf("\n");
  }
}

Outcome trends(const Experiment2Result& res, const ExperimentConfig& cfg, double seconds) {
  std::map<std::pair<NoiseKind, PenaltyFamily>, std::map<double, double>> rmse;
  std::size_t errors = 0;
  for (const auto& row : res.rows) {
    if (!row.error.empty()) ++errors;
    rmse[{row.model, row.penalty}][row.r] = row.error.empty() ? row.best.mean_rmse : NAN;
  }
  std::vector<std::string> fails_a, fails_b, fails_c;
  for (const auto& [key, by_r] : rmse) {
    for (std::size_t i = 0; i + 1 < cfg.r_list.size(); ++i)
      if (!(by_r.at(cfg.r_list[i + 1]) < by_r.at(cfg.r_list[i])))
        fails_a.push_back(model_label(key.first) + "/" + to_string(key.second) + fmt(" r=%g->%g", cfg.r_list[i],
                                                                                      cfg.r_list[i + 1]));
  }
  for (double r : {1.0, 10.0}) {
    for (PenaltyFamily pen : cfg.penalties) {
      const double nb = rmse[{NoiseKind::NegativeBinomial, pen}][r];
      const double po = rmse[{NoiseKind::Poisson, pen}][r];
      if (!(nb <= po)) fails_b.push_back(to_string(pen) + fmt(" r=%g (%.4f vs %.4f)", r, nb, po));
    }
  }
  for (NoiseKind m : cfg.models) {
    for (double r : cfg.r_list) {
      const double lp = rmse[{m, PenaltyFamily::LpNorm}][r];
      for (PenaltyFamily tv : {PenaltyFamily::LpTvAniso, PenaltyFamily::LpTvIso}) {
        const double v = rmse[{m, tv}][r];
        if (!(v <= lp)) fails_c.push_back(model_label(m) + "/" + to_string(tv) + fmt(" r=%g", r));
      }
    }
  }
  auto part = [](const char* name, const std::vector<std::string>& fails) {
    std::string s = std::string(name) + (fails.empty() ? " ok" : " FAIL [");
    for (std::size_t i = 0; i < fails.size(); ++i) s += (i ? "; " : "") + fails[i];
    return s + (fails.empty() ? "" : "]");
  };
  const bool ok = errors == 0 && fails_a.empty() && fails_b.empty() && fails_c.empty();
  return {ok, part("(a) decreasing in r:", fails_a) + "; " + part("(b) NB <= Poisson at r=1,10:", fails_b) + "; " +
                  part("(c) lp TV <= lp norm:", fails_c) +
                  fmt("; %zu error cells; %zu trials, runtime %.0f s (target 900 s%s)", errors, cfg.trials, seconds,
                      seconds < 900 ? "" : ", missed")};
}

Outcome p_insensitivity(const ExperimentConfig& cfg) {
  Stopwatch clock;
  const auto res = run_experiment1(cfg);
  const double seconds = clock.seconds();
  std::map<std::pair<double, TvKind>, std::vector<double>> by_cell;
  std::size_t errors = 0;
  for (const auto& row : res.rows) {
    if (!row.error.empty()) ++errors;
    by_cell[{row.r, row.kind}].push_back(row.error.empty() ? row.best.mean_rmse : NAN);
  }
  bool ok = errors == 0;
  double worst = 0.0;
  std::string detail;
  for (const auto& [key, values] : by_cell) {
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= values.size();
    const double spread = (*hi - *lo) / mean;
    worst = std::max(worst, spread);
    ok = ok && spread < 0.05;
    detail += fmt("r=%g %s %.1f%%; ", key.first, key.second == TvKind::Isotropic ? "iso" : "aniso", 100 * spread);
  }
  return {ok, detail + fmt("max spread %.1f%% (limit 5%%), %zu trials, %zu error cells, %.0f s", 100 * worst,
                           cfg.trials, errors, seconds)};
}

Outcome solver_contracts(const Experiment2Result& first, const ExperimentConfig& cfg) {
  std::size_t phi_bad = 0, neg_bad = 0, errors = 0;
  for (const auto& row : first.rows) {
    if (!row.error.empty()) ++errors;
    if (!row.phi_ok) ++phi_bad;
    if (!row.nonneg_ok) ++neg_bad;
  }
  ExperimentConfig rerun = cfg;
  rerun.out_dir.clear();
  const auto second = run_experiment2(rerun);
  const bool identical = second.summary_csv == first.summary_csv && second.grid_csv == first.grid_csv;
  return {phi_bad == 0 && neg_bad == 0 && errors == 0 && identical,
          fmt("%zu cells: %zu with final phi > initial phi, %zu with a negative iterate, %zu errors; rerun summary "
              "%s",
              first.rows.size(), phi_bad, neg_bad, errors, identical ? "bit-identical" : "DIFFERS")};
}

void report(int id, const char* name, const Outcome& o, int& failures) {
  std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks for the nbtv library"};
  std::vector<int> selected;
  std::size_t exp1_trials = 0, exp2_trials = 0;
  std::string out_dir = "acceptance_out";
  app.add_option("criteria", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--exp1-trials", exp1_trials, "Override the trial count of the p sweep");
  app.add_option("--exp2-trials", exp2_trials, "Override the trial count of the model comparison");
  app.add_option("--out-dir", out_dir, "Where experiment tables are written");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> want = selected.empty() ? std::set<int>{1, 2, 3, 4, 5, 6, 7, 8, 9}
                                              : std::set<int>(selected.begin(), selected.end());

  int failures = 0;
  if (want.count(1)) report(1, "gradient correctness", gradients(), failures);
  if (want.count(2)) report(2, "Hessian-vector products", hessian(), failures);
  if (want.count(3)) report(3, "adjoint identity", adjoint(), failures);
  if (want.count(4)) report(4, "sampler moments", sampler(), failures);
  if (want.count(5)) report(5, "Poisson limit", poisson_limit(), failures);
  if (want.count(6)) report(6, "prox oracle equivalence", prox_oracle(), failures);

  ExperimentConfig cfg;
  cfg.out_dir = out_dir;
  cfg.write_images = false;
  if (want.count(7) || want.count(9)) {
    ExperimentConfig c2 = cfg;
    if (exp2_trials) c2.trials = exp2_trials;
    Stopwatch clock;
    const auto res = run_experiment2(c2);
    const double seconds = clock.seconds();
    print_experiment2_table(res, c2.r_list);
    if (want.count(7)) report(7, "model/penalty trends", trends(res, c2, seconds), failures);
    if (want.count(9)) report(9, "solver contracts", solver_contracts(res, c2), failures);
  }
  if (want.count(8)) {
    ExperimentConfig c1 = cfg;
    if (exp1_trials) c1.trials = exp1_trials;
    report(8, "p insensitivity", p_insensitivity(c1), failures);
  }
  std::printf("%d of %zu criteria failed\n", failures, want.size());
  return failures == 0 ? 0 : 1;
}
