#include "nbtv/regularizers.hpp"

#include <cmath>
#include <sstream>

#include "nbtv/error.hpp"

namespace nbtv {

void Penalty::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("Penalty: p must lie in (0, 1]");
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("Penalty: tau must be positive");
}

TvKind Penalty::tv_kind() const {
  switch (kind) {
    case PenaltyKind::AnisoTV:
      return TvKind::Anisotropic;
    case PenaltyKind::IsoTV:
      return TvKind::Isotropic;
    case PenaltyKind::LpNorm:
      break;
  }
  throw DomainError("Penalty: l_p norm has no TV kind");
}

double Penalty::value(const Image& f) const {
  return tau * (is_tv() ? tv_value(tv_kind(), p, f) : lp_norm_value(p, f));
}

std::string Penalty::name() const {
  std::ostringstream ss;
  ss << to_string(kind) << "(p=" << p << ",tau=" << tau << ")";
  return ss.str();
}

std::string to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::AnisoTV:
      return "aniso-tv";
    case PenaltyKind::IsoTV:
      return "iso-tv";
    case PenaltyKind::LpNorm:
      return "lp-norm";
  }
  return "?";
}

PenaltyKind penalty_kind_from_string(const std::string& name) {
  if (name == "aniso-tv" || name == "aniso") return PenaltyKind::AnisoTV;
  if (name == "iso-tv" || name == "iso") return PenaltyKind::IsoTV;
  if (name == "lp-norm" || name == "lp") return PenaltyKind::LpNorm;
  throw ConfigError("unknown penalty kind '" + name + "'");
}

double tv_value(TvKind kind, double p, const Image& f) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("tv_value: p must lie in (0, 1]");
  const std::size_t m = f.rows();
  const std::size_t n = f.cols();
  double total = 0.0;
  if (kind == TvKind::Anisotropic) {
    for (std::size_t l = 0; l + 1 < m; ++l)
      for (std::size_t k = 0; k < n; ++k) total += std::pow(std::abs(f(l, k) - f(l + 1, k)), p);
    for (std::size_t l = 0; l < m; ++l)
      for (std::size_t k = 0; k + 1 < n; ++k) total += std::pow(std::abs(f(l, k) - f(l, k + 1)), p);
    return total;
  }
  for (std::size_t l = 0; l + 1 < m; ++l) {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double dv = std::abs(f(l, k) - f(l + 1, k));
      const double dh = std::abs(f(l, k) - f(l, k + 1));
      total += std::sqrt(std::pow(dv, 2.0 * p) + std::pow(dh, 2.0 * p));
    }
  }
  if (n > 0)
    for (std::size_t l = 0; l + 1 < m; ++l) total += std::pow(std::abs(f(l, n - 1) - f(l + 1, n - 1)), p);
  if (m > 0)
    for (std::size_t k = 0; k + 1 < n; ++k) total += std::pow(std::abs(f(m - 1, k) - f(m - 1, k + 1)), p);
  return total;
}

double lp_norm_value(double p, const Image& f) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("lp_norm_value: p must lie in (0, 1]");
  double total = 0.0;
  for (double v : f.values()) total += std::pow(std::abs(v), p);
  return total;
}

WeightFields WeightFields::uniform(Shape image, double value) {
  WeightFields w;
  w.image = image;
  w.gamma.assign(image.rows > 0 ? (image.rows - 1) * image.cols : 0, value);
  w.omega.assign(image.cols > 0 ? image.rows * (image.cols - 1) : 0, value);
  return w;
}

void WeightFields::validate() const {
  if (gamma.size() != (image.rows > 0 ? (image.rows - 1) * image.cols : 0) ||
      omega.size() != (image.cols > 0 ? image.rows * (image.cols - 1) : 0)) {
    throw ShapeError("WeightFields: field sizes do not match the image shape");
  }
  for (double g : gamma)
    if (!(g > 0.0) || !std::isfinite(g)) throw DomainError("WeightFields: weights must be positive");
  for (double o : omega)
    if (!(o > 0.0) || !std::isfinite(o)) throw DomainError("WeightFields: weights must be positive");
}

WeightFields compute_weights(double p, const Image& f_prev, double eps_w) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("compute_weights: p must lie in (0, 1]");
  if (!(eps_w > 0.0)) throw DomainError("compute_weights: eps_w must be positive");
  WeightFields w = WeightFields::uniform(f_prev.shape());
  if (p == 1.0) return w;
  const std::size_t m = f_prev.rows();
  const std::size_t n = f_prev.cols();
  const double e = p - 1.0;
  for (std::size_t l = 0; l + 1 < m; ++l)
    for (std::size_t k = 0; k < n; ++k)
      w.gamma[l * n + k] = std::pow(std::abs(f_prev(l, k) - f_prev(l + 1, k)) + eps_w, e);
  for (std::size_t l = 0; l < m; ++l)
    for (std::size_t k = 0; k + 1 < n; ++k)
      w.omega[l * (n - 1) + k] = std::pow(std::abs(f_prev(l, k) - f_prev(l, k + 1)) + eps_w, e);
  return w;
}

double weighted_tv_value(TvKind kind, const WeightFields& w, const Image& f) {
  require_same_shape(w.image, f.shape(), "weighted_tv_value");
  const std::size_t m = f.rows();
  const std::size_t n = f.cols();
  double total = 0.0;
  if (kind == TvKind::Anisotropic) {
    for (std::size_t l = 0; l + 1 < m; ++l)
      for (std::size_t k = 0; k < n; ++k) total += w.gamma_at(l, k) * std::abs(f(l, k) - f(l + 1, k));
    for (std::size_t l = 0; l < m; ++l)
      for (std::size_t k = 0; k + 1 < n; ++k) total += w.omega_at(l, k) * std::abs(f(l, k) - f(l, k + 1));
    return total;
  }
  for (std::size_t l = 0; l + 1 < m; ++l) {
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double dv = w.gamma_at(l, k) * (f(l, k) - f(l + 1, k));
      const double dh = w.omega_at(l, k) * (f(l, k) - f(l, k + 1));
      total += std::sqrt(dv * dv + dh * dh);
    }
  }
  if (n > 0)
    for (std::size_t l = 0; l + 1 < m; ++l)
      total += w.gamma_at(l, n - 1) * std::abs(f(l, n - 1) - f(l + 1, n - 1));
  if (m > 0)
    for (std::size_t k = 0; k + 1 < n; ++k)
      total += w.omega_at(m - 1, k) * std::abs(f(m - 1, k) - f(m - 1, k + 1));
  return total;
}

}  // namespace nbtv
