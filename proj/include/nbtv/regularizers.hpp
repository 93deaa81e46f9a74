#pragma once

#include <string>
#include <vector>

#include "nbtv/image.hpp"

namespace nbtv {

enum class TvKind { Anisotropic, Isotropic };

enum class PenaltyKind { AnisoTV, IsoTV, LpNorm };

/// tau * R(f) with R the l_p TV quasi-seminorm (either kind) or the l_p
/// quasi-norm. p = 1 with a TV kind is plain l1 TV.
struct Penalty {
  PenaltyKind kind = PenaltyKind::AnisoTV;
  double p = 1.0;
  double tau = 1.0;

  void validate() const;
  bool is_tv() const noexcept { return kind != PenaltyKind::LpNorm; }
  TvKind tv_kind() const;
  /// tau * R(f).
  double value(const Image& f) const;
  std::string name() const;
};

std::string to_string(PenaltyKind kind);
PenaltyKind penalty_kind_from_string(const std::string& name);

// Difference conventions used throughout:
//   vertical   dv(l,k) = f(l,k) - f(l+1,k),  l < m-1, all k      ((m-1) x n)
//   horizontal dh(l,k) = f(l,k) - f(l,k+1),  all l, k < n-1      (m x (n-1))

/// Anisotropic: sum |dv|^p + sum |dh|^p.
/// Isotropic: sum over l<m-1, k<n-1 of sqrt(|dv|^2p + |dh|^2p), plus |dv|^p
/// down the last column and |dh|^p along the last row.
double tv_value(TvKind kind, double p, const Image& f);

/// sum |f_i|^p.
double lp_norm_value(double p, const Image& f);

/// Per-edge weights of the reweighted l1 surrogate. gamma pairs with the
/// vertical differences, omega with the horizontal ones.
struct WeightFields {
  Shape image;
  std::vector<double> gamma;  // (m-1) x n
  std::vector<double> omega;  // m x (n-1)

  static WeightFields uniform(Shape image, double value = 1.0);

  double gamma_at(std::size_t l, std::size_t k) const { return gamma[l * image.cols + k]; }
  double omega_at(std::size_t l, std::size_t k) const { return omega[l * (image.cols - 1) + k]; }
  void validate() const;
};

inline constexpr double kDefaultWeightEps = 1e-8;

/// gamma = (|dv(f_prev)| + eps_w)^(p-1), omega likewise from dh. Every weight
/// lies in (0, eps_w^(p-1)]; p = 1 gives exactly 1. Both TV kinds use the same
/// fields.
WeightFields compute_weights(double p, const Image& f_prev, double eps_w = kDefaultWeightEps);

/// Anisotropic: sum gamma |dv| + sum omega |dh|.
/// Isotropic: sum sqrt((gamma dv)^2 + (omega dh)^2) over the interior plus
/// the weighted last-column and last-row terms.
double weighted_tv_value(TvKind kind, const WeightFields& w, const Image& f);

}  // namespace nbtv
