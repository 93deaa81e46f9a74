#include "nbtv/blur.hpp"

#include <cmath>

#include "nbtv/error.hpp"

namespace nbtv {

BlurSpec BlurSpec::with_default_radius(double sigma) {
  BlurSpec spec{static_cast<std::size_t>(std::ceil(3.0 * sigma)), sigma};
  spec.validate();
  return spec;
}

void BlurSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("BlurSpec: sigma must be positive");
}

std::vector<double> gaussian_taps(const BlurSpec& spec) {
  spec.validate();
  const auto radius = static_cast<std::ptrdiff_t>(spec.kernel_radius);
  std::vector<double> taps(2 * spec.kernel_radius + 1);
  double total = 0.0;
  for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
    const double w = std::exp(-0.5 * static_cast<double>(t * t) / (spec.sigma * spec.sigma));
    taps[t + radius] = w;
    total += w;
  }
  for (double& w : taps) w /= total;
  return taps;
}

std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t r = i % period;
  if (r < 0) r += period;
  if (r >= static_cast<std::ptrdiff_t>(n)) r = period - 1 - r;
  return static_cast<std::size_t>(r);
}

GaussianBlur::GaussianBlur(BlurSpec spec) : spec_(spec), taps_(gaussian_taps(spec)) {}

namespace {

// table[i * width + (t + R)] = reflect(i + t, len)
std::vector<std::size_t> reflection_table(std::size_t len, std::size_t radius) {
  const std::size_t width = 2 * radius + 1;
  std::vector<std::size_t> table(len * width);
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      table[i * width + j] = reflect_index(static_cast<std::ptrdiff_t>(i + j) -
                                               static_cast<std::ptrdiff_t>(radius),
                                           len);
    }
  }
  return table;
}

// Gather along one axis: out[i] = sum_t k[t] * in[reflect(i + t)].
// `len` samples spaced `stride` apart, `count` independent lines spaced `step`.
void gather_axis(const std::vector<double>& taps, const double* in, double* out, std::size_t len,
                 std::size_t stride, std::size_t count, std::size_t step) {
  const std::size_t width = taps.size();
  const auto table = reflection_table(len, width / 2);
  for (std::size_t c = 0; c < count; ++c) {
    const double* src = in + c * step;
    double* dst = out + c * step;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t* idx = &table[i * width];
      double acc = 0.0;
      for (std::size_t j = 0; j < width; ++j) acc += taps[j] * src[idx[j] * stride];
      dst[i * stride] = acc;
    }
  }
}

// Transpose of gather_axis: out[reflect(i + t)] += k[t] * in[i].
void scatter_axis(const std::vector<double>& taps, const double* in, double* out, std::size_t len,
                  std::size_t stride, std::size_t count, std::size_t step) {
  const std::size_t width = taps.size();
  const auto table = reflection_table(len, width / 2);
  for (std::size_t c = 0; c < count; ++c) {
    const double* src = in + c * step;
    double* dst = out + c * step;
    for (std::size_t i = 0; i < len; ++i) dst[i * stride] = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t* idx = &table[i * width];
      const double v = src[i * stride];
      for (std::size_t j = 0; j < width; ++j) dst[idx[j] * stride] += taps[j] * v;
    }
  }
}

}  // namespace

Image GaussianBlur::apply(const Image& f) const {
  if (is_identity()) return f;
  const std::size_t m = f.rows();
  const std::size_t n = f.cols();
  Image tmp(m, n);
  Image out(m, n);
  gather_axis(taps_, f.values().data(), tmp.values().data(), m, n, n, 1);
  gather_axis(taps_, tmp.values().data(), out.values().data(), n, 1, m, n);
  return out;
}

Image GaussianBlur::adjoint(const Image& g) const {
  if (is_identity()) return g;
  const std::size_t m = g.rows();
  const std::size_t n = g.cols();
  Image tmp(m, n);
  Image out(m, n);
  scatter_axis(taps_, g.values().data(), tmp.values().data(), n, 1, m, n);
  scatter_axis(taps_, tmp.values().data(), out.values().data(), m, n, n, 1);
  return out;
}

}  // namespace nbtv
