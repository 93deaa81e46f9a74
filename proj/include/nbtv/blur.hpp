#pragma once

#include <cstddef>
#include <vector>

#include "nbtv/image.hpp"

namespace nbtv {

struct BlurSpec {
  std::size_t kernel_radius = 6;
  double sigma = 2.0;

  /// radius = ceil(3 sigma).
  static BlurSpec with_default_radius(double sigma);
  void validate() const;
};

/// Normalized 1-D Gaussian taps k[-R..R], stored at index t + R. Sums to 1.
std::vector<double> gaussian_taps(const BlurSpec& spec);

/// Half-sample symmetric reflection of an index into [0, n): ..., 1, 0 | 0, 1, ..., n-1 | n-1, ...
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n);

/// Matrix-free separable Gaussian blur A and its exact adjoint.
///
/// A applies the 1-D kernel along columns then rows with symmetric reflection
/// at the borders. The 2-D kernel is the outer product of the 1-D taps.
class GaussianBlur {
 public:
  GaussianBlur() : GaussianBlur(BlurSpec{0, 1.0}) {}
  explicit GaussianBlur(BlurSpec spec);

  const BlurSpec& spec() const noexcept { return spec_; }
  const std::vector<double>& taps() const noexcept { return taps_; }
  bool is_identity() const noexcept { return spec_.kernel_radius == 0; }

  Image apply(const Image& f) const;
  Image adjoint(const Image& g) const;

 private:
  BlurSpec spec_;
  std::vector<double> taps_;
};

inline Image blur_apply(const BlurSpec& spec, const Image& f) { return GaussianBlur(spec).apply(f); }
inline Image blur_adjoint(const BlurSpec& spec, const Image& g) { return GaussianBlur(spec).adjoint(g); }

}  // namespace nbtv
