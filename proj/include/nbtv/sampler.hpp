#pragma once

#include <cstdint>
#include <random>

#include "nbtv/image.hpp"
#include "nbtv/noise_model.hpp"

namespace nbtv {

/// Seeded random stream. Identical seed and call sequence give identical draws.
class RngState {
 public:
  explicit RngState(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// One count with mean mu. NB is drawn as a Gamma-Poisson mixture:
/// lambda ~ Gamma(shape r, scale mu / r), y ~ Poisson(lambda). mu == 0 gives 0.
std::int64_t sample_count(const NoiseModel& model, double mu, RngState& rng);

/// Independent draws for every pixel of a nonnegative mean image, row-major order.
ObservedCounts sample_counts(const NoiseModel& model, const Image& mean_image, RngState& rng);

}  // namespace nbtv
