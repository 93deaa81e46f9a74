#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "nbtv/image.hpp"
#include "nbtv/regularizers.hpp"

namespace nbtv {

struct ProxConfig {
  std::size_t max_inner_iters = 50;
  /// Stop once ||W_k - W_{k-1}|| / ||W_k|| falls below this.
  double dual_tolerance = 1e-6;
  /// Smoothing floor of the reweighting; caps weights at eps_w^(p-1).
  double eps_w = kDefaultWeightEps;
  /// Outer iterations between weight refreshes (1 = every iteration).
  std::size_t reweight_every = 1;

  void validate() const;
};

/// Dual variables of the TV prox, laid out like WeightFields. Passing the
/// same field to consecutive solves warm-starts them.
struct DualField {
  Shape image;
  std::vector<double> vertical;
  std::vector<double> horizontal;

  bool matches(Shape s) const noexcept { return image == s && !(vertical.empty() && horizontal.empty()); }
};

struct ProxReport {
  std::size_t iterations = 0;
  bool converged = false;
  /// FGP output scored worse than max(b, 0), which was returned instead.
  bool fell_back = false;
};

/// argmin_{x >= 0} 1/2 ||x - b||^2 + lambda * weighted_tv(kind, w, x).
///
/// Fast gradient projection on the dual: x = max(b - lambda D^T W, 0) with W
/// confined to |W_e| <= w_e per edge (anisotropic) or to the ellipse
/// (P/gamma)^2 + (Q/omega)^2 <= 1 per interior pixel (isotropic, exact
/// Euclidean projection). Step 1/(8 lambda) from ||D||^2 <= 8.
Image prox_weighted_tv(const Image& b, double lambda, TvKind kind, const WeightFields& w,
                       const ProxConfig& cfg, DualField* warm = nullptr,
                       ProxReport* report = nullptr);

/// Unweighted l1 TV prox (unit box / unit disk duals).
Image prox_tv(const Image& b, double lambda, TvKind kind, const ProxConfig& cfg,
              DualField* warm = nullptr, ProxReport* report = nullptr);

/// x_i = max(0, b_i - lambda w_i), w_i = (|f_prev_i| + eps_w)^(p-1); w = 1 for p = 1.
Image prox_weighted_lp(const Image& b, double lambda, double p, const Image& f_prev,
                       double eps_w = kDefaultWeightEps);

/// 1/2 ||x - b||^2 + lambda * weighted_tv(kind, w, x).
double prox_objective(const Image& x, const Image& b, double lambda, TvKind kind,
                      const WeightFields& w);

/// Euclidean projection of (p, q) onto {(p/a)^2 + (q/b)^2 <= 1}, a, b > 0.
std::pair<double, double> project_onto_ellipse(double p, double q, double a, double b);

}  // namespace nbtv
