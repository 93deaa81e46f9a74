#include "nbtv/solver.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <deque>

#include "nbtv/error.hpp"

namespace nbtv {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void append_double(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

double distance(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

void SolverConfig::validate() const {
  if (max_outer_iters == 0) throw DomainError("SolverConfig: max_outer_iters must be positive");
  if (!(rel_change_tol > 0.0)) throw DomainError("SolverConfig: rel_change_tol must be positive");
  if (!(alpha_min > 0.0 && alpha_min <= alpha_init && alpha_init <= alpha_max)) {
    throw DomainError("SolverConfig: need 0 < alpha_min <= alpha_init <= alpha_max");
  }
  if (!(safeguard_sigma > 0.0)) throw DomainError("SolverConfig: safeguard_sigma must be positive");
  prox.validate();
}

std::string format_trace_csv(const IterationTrace& trace) {
  std::string out = std::string(kTraceCsvHeader) + "\n";
  for (const auto& row : trace) {
    out += std::to_string(row.iter);
    for (double v : {row.phi, row.datafit, row.penalty, row.alpha, row.relchange}) {
      out += ',';
      append_double(out, v);
    }
    out += ',';
    if (row.rmse) append_double(out, *row.rmse);
    out += ',';
    append_double(out, row.seconds);
    out += '\n';
  }
  return out;
}

double bb_step(std::span<const double> s, std::span<const double> u, const SolverConfig& cfg) {
  if (s.size() != u.size()) throw ShapeError("bb_step: s and u differ in length");
  double ss = 0.0;
  double su = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    ss += s[i] * s[i];
    su += s[i] * u[i];
  }
  if (ss == 0.0) throw DegenerateInputError("bb_step: zero step");
  if (su <= 0.0) return cfg.alpha_init;
  return std::clamp(su / ss, cfg.alpha_min, cfg.alpha_max);
}

Image default_initial_image(const DataFit& fit) {
  Image x = clip_nonnegative(fit.blur().adjoint(fit.counts().as_image()));
  const double total = static_cast<double>(fit.counts().total());
  const double sum = x.sum();
  if (sum > 0.0) {
    const double scale = total / sum;
    for (double& v : x.values()) v *= scale;
  }
  return x;
}

Reconstructor::Reconstructor(const DataFit& fit, Penalty penalty, SolverConfig cfg,
                             std::optional<Image> f0, std::optional<Image> truth)
    : fit_(fit), penalty_(penalty), cfg_(cfg), truth_(std::move(truth)) {
  penalty_.validate();
  cfg_.validate();
  f_ = f0 ? std::move(*f0) : default_initial_image(fit_);
  require_same_shape(f_.shape(), fit_.shape(), "reconstruct: initial image");
  require_nonnegative(f_, "reconstruct: initial image");
  if (truth_) require_same_shape(truth_->shape(), fit_.shape(), "reconstruct: truth");
  diag_.all_zero_counts = fit_.counts().total() == 0;
  diag_.min_iterate_value = f_.size() ? f_.min() : 0.0;

  if (cfg_.record_timing) start_seconds_ = now_seconds();
  weights_ = WeightFields::uniform(f_.shape());
  const double datafit = fit_.objective_and_gradient(f_, grad_);
  phi_ = datafit + penalty_value(f_);
  record(datafit, cfg_.alpha_init, 0.0);
  best_ = f_;
  best_phi_ = phi_;
}

void Reconstructor::record(double datafit, double alpha, double relchange) {
  TraceRow row;
  row.iter = iter_;
  row.phi = phi_;
  row.datafit = datafit;
  row.penalty = phi_ - datafit;
  row.alpha = alpha;
  row.relchange = relchange;
  if (truth_) row.rmse = rmse(f_, *truth_);
  if (cfg_.record_timing) row.seconds = now_seconds() - start_seconds_;
  trace_.push_back(row);
}

Image Reconstructor::solve_subproblem(const Image& q, double alpha) {
  const double lambda = penalty_.tau / alpha;
  if (!penalty_.is_tv()) return prox_weighted_lp(q, lambda, penalty_.p, f_, cfg_.prox.eps_w);

  ProxReport rep;
  Image x;
  if (penalty_.p == 1.0) {
    x = prox_tv(q, lambda, penalty_.tv_kind(), cfg_.prox, &dual_, &rep);
  } else {
    if (iter_ % cfg_.prox.reweight_every == 0) weights_ = compute_weights(penalty_.p, f_, cfg_.prox.eps_w);
    x = prox_weighted_tv(q, lambda, penalty_.tv_kind(), weights_, cfg_.prox, &dual_, &rep);
  }
  if (!rep.converged) ++diag_.prox_not_converged;
  if (rep.fell_back) ++diag_.prox_fallbacks;
  return x;
}

bool Reconstructor::step() {
  if (done_) return false;

  double alpha = cfg_.alpha_init;
  if (iter_ > 0) {
    std::vector<double> s(f_.size()), u(f_.size());
    bool moved = false;
    for (std::size_t i = 0; i < f_.size(); ++i) {
      s[i] = f_[i] - f_prev_[i];
      u[i] = grad_[i] - grad_prev_[i];
      moved = moved || s[i] != 0.0;
    }
    if (!moved) {
      done_ = true;
      diag_.converged = true;
      return false;
    }
    double su = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) su += s[i] * u[i];
    if (su <= 0.0) ++diag_.curvature_fallbacks;
    alpha = bb_step(s, u, cfg_);
  }

  // Reference value for the optional acceptance test.
  double phi_ref = phi_;
  if (cfg_.safeguard_memory > 0) {
    const std::size_t first = trace_.size() > cfg_.safeguard_memory ? trace_.size() - cfg_.safeguard_memory : 0;
    for (std::size_t i = first; i < trace_.size(); ++i) phi_ref = std::max(phi_ref, trace_[i].phi);
  }

  const DualField dual_start = dual_;
  Image f_new;
  Image g_new;
  double datafit_new = 0.0;
  double phi_new = 0.0;
  for (std::size_t attempt = 0;; ++attempt) {
    Image q = f_;
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= grad_[i] / alpha;
    f_new = solve_subproblem(q, alpha);
    datafit_new = fit_.objective_and_gradient(f_new, g_new);
    phi_new = datafit_new + penalty_value(f_new);
    if (cfg_.safeguard_memory == 0) break;
    const double step = distance(f_new, f_);
    if (phi_new <= phi_ref - 0.5 * cfg_.safeguard_sigma * alpha * step * step) break;
    if (attempt + 1 >= cfg_.safeguard_max_backtracks || alpha >= cfg_.alpha_max) {
      // No acceptable step left: stay at f_j and stop.
      dual_ = dual_start;
      done_ = true;
      diag_.stalled = true;
      return false;
    }
    ++diag_.backtracks;
    alpha = std::min(2.0 * alpha, cfg_.alpha_max);
    dual_ = dual_start;
  }

  const double relchange = distance(f_new, f_) / std::max(norm2(f_), 1.0);
  f_prev_ = std::move(f_);
  grad_prev_ = std::move(grad_);
  f_ = std::move(f_new);
  grad_ = std::move(g_new);
  phi_ = phi_new;
  diag_.min_iterate_value = std::min(diag_.min_iterate_value, f_.min());
  ++iter_;
  record(datafit_new, alpha, relchange);

  if (phi_ < best_phi_) {
    best_phi_ = phi_;
    best_ = f_;
    diag_.best_iter = iter_;
  }
  if (relchange < cfg_.rel_change_tol) {
    done_ = true;
    diag_.converged = true;
  } else if (iter_ >= cfg_.max_outer_iters) {
    done_ = true;
  }
  return !done_;
}

Reconstruction Reconstructor::finish() && {
  diag_.floored_pixels = fit_.floored_pixels(best_);
  return Reconstruction{std::move(best_), std::move(trace_), diag_};
}

Reconstruction reconstruct(const DataFit& fit, const Penalty& penalty, const SolverConfig& cfg,
                           std::optional<Image> f0, std::optional<Image> truth) {
  Reconstructor solver(fit, penalty, cfg, std::move(f0), std::move(truth));
  while (solver.step()) {
  }
  return std::move(solver).finish();
}

}  // namespace nbtv
