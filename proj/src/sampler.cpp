#include "nbtv/sampler.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "nbtv/error.hpp"

namespace nbtv {

NoiseModel NoiseModel::negative_binomial(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("NoiseModel: dispersion r must be positive");
  return NoiseModel(Kind::NegativeBinomial, r);
}

double NoiseModel::dispersion() const {
  if (is_poisson()) throw DomainError("NoiseModel: Poisson model has no dispersion parameter");
  return r_;
}

double NoiseModel::mean_to_variance(double mu) const {
  return is_poisson() ? mu : mu + mu * mu / r_;
}

double NoiseModel::failure_probability(double mu) const { return dispersion() / (dispersion() + mu); }

std::string NoiseModel::name() const {
  if (is_poisson()) return "poisson";
  std::ostringstream ss;
  ss << "nb(r=" << r_ << ")";
  return ss.str();
}

std::int64_t sample_count(const NoiseModel& model, double mu, RngState& rng) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw DomainError("sample_count: mean must be finite and >= 0");
  if (mu == 0.0) return 0;
  double lambda = mu;
  if (!model.is_poisson()) {
    const double r = model.dispersion();
    std::gamma_distribution<double> gamma(r, mu / r);
    lambda = gamma(rng.engine());
    if (lambda <= 0.0) return 0;
  }
  std::poisson_distribution<std::int64_t> poisson(lambda);
  return poisson(rng.engine());
}

ObservedCounts sample_counts(const NoiseModel& model, const Image& mean_image, RngState& rng) {
  require_nonnegative(mean_image, "sample_counts");
  std::vector<std::int64_t> y(mean_image.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = sample_count(model, mean_image[i], rng);
  return ObservedCounts(mean_image.rows(), mean_image.cols(), std::move(y));
}

}  // namespace nbtv
