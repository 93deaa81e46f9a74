#pragma once

#include <cstddef>
#include <vector>

#include "nbtv/blur.hpp"
#include "nbtv/image.hpp"
#include "nbtv/noise_model.hpp"

namespace nbtv {

inline constexpr double kDefaultFloorEps = 1e-10;

/// Data-fit term: counts y observed through the blur A under a noise model.
///
/// Every log and ratio uses a_i = max((Af)_i, floor_eps), so the objective is
/// finite on the whole nonnegative orthant. The f-independent log-binomial
/// constant of the NB likelihood is dropped.
class DataFit {
 public:
  DataFit(NoiseModel model, ObservedCounts counts, BlurSpec blur,
          double floor_eps = kDefaultFloorEps);

  const NoiseModel& model() const noexcept { return model_; }
  const ObservedCounts& counts() const noexcept { return counts_; }
  const GaussianBlur& blur() const noexcept { return blur_; }
  double floor_eps() const noexcept { return floor_eps_; }
  Shape shape() const noexcept { return counts_.shape(); }

  /// Same counts and operator under a different noise model.
  DataFit with_model(NoiseModel model) const;

  /// Objective of the configured model (NB or Poisson).
  double objective(const Image& f) const;
  Image gradient(const Image& f) const;
  /// Evaluates both with a single forward blur.
  double objective_and_gradient(const Image& f, Image& grad) const;

  /// Number of pixels where (Af)_i sits at or below the floor.
  std::size_t floored_pixels(const Image& f) const;

 private:
  friend double nb_objective(const DataFit&, const Image&);
  friend Image nb_gradient(const DataFit&, const Image&);
  friend double poisson_objective(const DataFit&, const Image&);
  friend Image poisson_gradient(const DataFit&, const Image&);

  Image floored_forward(const Image& f) const;
  double nb_value(const Image& a) const;
  double poisson_value(const Image& a) const;
  Image nb_residual(const Image& a) const;
  Image poisson_residual(const Image& a) const;

  NoiseModel model_;
  ObservedCounts counts_;
  GaussianBlur blur_;
  double floor_eps_;
};

/// sum_i (r + y_i) log(r + a_i) - y_i log a_i. Requires an NB model.
double nb_objective(const DataFit& fit, const Image& f);
/// A^T d with d_i = (r + y_i)/(r + a_i) - y_i / a_i.
Image nb_gradient(const DataFit& fit, const Image& f);

/// sum_i a_i - y_i log a_i, using the fit's counts and operator.
double poisson_objective(const DataFit& fit, const Image& f);
/// A^T (1 - y_i / a_i).
Image poisson_gradient(const DataFit& fit, const Image& f);

/// Row-major square matrix.
struct DenseMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  std::vector<double> multiply(const std::vector<double>& v) const;
};

inline constexpr std::size_t kDenseHessianCap = 256;

/// Exact NB Hessian A^T diag(h) A, h_i = y_i / a_i^2 - (r + y_i) / (r + a_i)^2.
/// Materializes A column by column; throws CapacityError above kDenseHessianCap
/// unknowns.
DenseMatrix nb_hessian_dense(const DataFit& fit, const Image& f);

}  // namespace nbtv
