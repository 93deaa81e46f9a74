#pragma once

#include <string>

namespace nbtv {

/// Count distribution: negative binomial with dispersion r, or Poisson.
///
/// For NB with mean mu the per-pixel failure probability is r / (r + mu),
/// giving variance mu + mu^2 / r. Poisson is the r -> infinity limit.
class NoiseModel {
 public:
  enum class Kind { NegativeBinomial, Poisson };

  static NoiseModel negative_binomial(double r);
  static NoiseModel poisson() { return NoiseModel(Kind::Poisson, 0.0); }

  Kind kind() const noexcept { return kind_; }
  bool is_poisson() const noexcept { return kind_ == Kind::Poisson; }
  /// Dispersion r; only meaningful for the NB kind.
  double dispersion() const;

  double mean_to_variance(double mu) const;
  /// NB failure probability r / (r + mu).
  double failure_probability(double mu) const;

  std::string name() const;

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;

 private:
  NoiseModel(Kind kind, double r) : kind_(kind), r_(r) {}
  Kind kind_;
  double r_;
};

using NoiseKind = NoiseModel::Kind;

}  // namespace nbtv
