#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nbtv/image.hpp"
#include "nbtv/likelihood.hpp"
#include "nbtv/prox.hpp"
#include "nbtv/regularizers.hpp"

namespace nbtv {

struct SolverConfig {
  std::size_t max_outer_iters = 200;
  /// Stop once ||f_{j+1} - f_j|| / max(||f_j||, 1) drops below this.
  double rel_change_tol = 1e-6;
  double alpha_min = 1e-6;
  double alpha_max = 1e6;
  double alpha_init = 1.0;
  ProxConfig prox;
  /// Optional nonmonotone acceptance test: when > 0, a step is accepted only
  /// if phi_new <= max(last `safeguard_memory` phi) - sigma/2 * alpha ||s||^2,
  /// otherwise alpha is doubled and the subproblem re-solved. 0 disables it.
  std::size_t safeguard_memory = 0;
  double safeguard_sigma = 1e-5;
  std::size_t safeguard_max_backtracks = 30;
  /// Record wall-clock seconds in the trace. Off by default so that traces of
  /// identical runs compare bit-identical.
  bool record_timing = false;

  void validate() const;
};

struct TraceRow {
  std::size_t iter = 0;
  double phi = 0.0;
  double datafit = 0.0;
  double penalty = 0.0;
  double alpha = 0.0;
  double relchange = 0.0;
  std::optional<double> rmse;
  double seconds = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

using IterationTrace = std::vector<TraceRow>;

inline constexpr const char* kTraceCsvHeader = "iter,phi,datafit,penalty,alpha,relchange,rmse,seconds";
std::string format_trace_csv(const IterationTrace& trace);

struct SolverDiagnostics {
  bool converged = false;
  bool all_zero_counts = false;
  std::size_t floored_pixels = 0;       // at the returned image
  std::size_t prox_not_converged = 0;   // outer iterations whose inner solve hit its budget
  std::size_t prox_fallbacks = 0;
  std::size_t curvature_fallbacks = 0;  // BB steps with s^T u <= 0
  std::size_t best_iter = 0;            // trace index of the returned image
  bool stalled = false;                 // acceptance test rejected every trial step
  std::size_t backtracks = 0;           // rejected trial steps
  double min_iterate_value = 0.0;       // smallest pixel over every accepted iterate
};

struct Reconstruction {
  Image image;
  IterationTrace trace;
  SolverDiagnostics diagnostics;
};

/// BB1 curvature (s^T u)/(s^T s), clamped to [alpha_min, alpha_max];
/// alpha_init when s^T u <= 0. Throws DegenerateInputError for s == 0.
double bb_step(std::span<const double> s, std::span<const double> u, const SolverConfig& cfg);

/// Default starting point: A^T y clipped at 0 and rescaled to the total count.
Image default_initial_image(const DataFit& fit);

/// Outer loop minimizing phi(f) = F(f) + tau R(f) over f >= 0.
///
/// Each step replaces the data-fit Hessian by alpha_j I, forms
/// q = f_j - grad F(f_j) / alpha_j and solves the denoising subproblem with
/// weight tau / alpha_j, reweighting the l_p penalty from f_j. The returned
/// image is the lowest-phi iterate visited, so phi never ends above phi(f_0).
class Reconstructor {
 public:
  Reconstructor(const DataFit& fit, Penalty penalty, SolverConfig cfg,
                std::optional<Image> f0 = std::nullopt, std::optional<Image> truth = std::nullopt);

  /// One outer iteration. Returns false once the stopping rule has fired.
  bool step();
  bool done() const noexcept { return done_; }

  const Image& iterate() const noexcept { return f_; }
  const IterationTrace& trace() const noexcept { return trace_; }
  const SolverDiagnostics& diagnostics() const noexcept { return diag_; }

  Reconstruction finish() &&;

 private:
  double penalty_value(const Image& f) const { return penalty_.value(f); }
  Image solve_subproblem(const Image& q, double alpha);
  void record(double datafit, double alpha, double relchange);

  const DataFit& fit_;
  Penalty penalty_;
  SolverConfig cfg_;
  std::optional<Image> truth_;

  Image f_;
  Image grad_;
  Image f_prev_;
  Image grad_prev_;
  double phi_ = 0.0;
  std::size_t iter_ = 0;
  bool done_ = false;

  WeightFields weights_;
  DualField dual_;
  IterationTrace trace_;
  SolverDiagnostics diag_;
  Image best_;
  double best_phi_ = 0.0;
  double start_seconds_ = 0.0;
};

Reconstruction reconstruct(const DataFit& fit, const Penalty& penalty, const SolverConfig& cfg,
                           std::optional<Image> f0 = std::nullopt,
                           std::optional<Image> truth = std::nullopt);

}  // namespace nbtv
