#include "nbtv/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nbtv/error.hpp"

namespace nbtv {

namespace {

std::string shape_str(Shape s) {
  return std::to_string(s.rows) + "x" + std::to_string(s.cols);
}

}  // namespace

Image::Image(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw DomainError("Image: fill value is not finite");
}

Image::Image(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("Image: " + std::to_string(values_.size()) + " values for shape " +
                     shape_str({rows_, cols_}));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("Image: non-finite value");
  }
}

Image Image::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(m * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw ShapeError("Image::from_rows: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Image(m, n, std::move(values));
}

double Image::min() const {
  return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double Image::max() const {
  return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

double Image::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

ObservedCounts::ObservedCounts(std::size_t rows, std::size_t cols,
                               std::vector<std::int64_t> counts)
    : rows_(rows), cols_(cols), counts_(std::move(counts)) {
  if (counts_.size() != rows_ * cols_) {
    throw ShapeError("ObservedCounts: " + std::to_string(counts_.size()) +
                     " counts for shape " + shape_str({rows_, cols_}));
  }
  for (auto c : counts_) {
    if (c < 0) throw DomainError("ObservedCounts: negative count");
  }
}

std::int64_t ObservedCounts::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

Image ObservedCounts::as_image() const {
  std::vector<double> v(counts_.begin(), counts_.end());
  return Image(rows_, cols_, std::move(v));
}

ObservedCounts ObservedCounts::from_image(const Image& img) {
  std::vector<std::int64_t> c(img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double v = img[i];
    if (v < 0.0 || v != std::floor(v)) {
      throw DomainError("ObservedCounts: value " + std::to_string(v) +
                        " is not a nonnegative integer");
    }
    c[i] = static_cast<std::int64_t>(v);
  }
  return ObservedCounts(img.rows(), img.cols(), std::move(c));
}

void require_same_shape(Shape a, Shape b, std::string_view what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_str(a) + " vs " +
                     shape_str(b));
  }
}

void require_nonnegative(const Image& img, std::string_view what) {
  for (double v : img.values()) {
    if (v < 0.0) throw DomainError(std::string(what) + ": negative pixel value");
  }
}

double dot(const Image& a, const Image& b) {
  require_same_shape(a.shape(), b.shape(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Image& a) { return std::sqrt(dot(a, a)); }

Image clip_nonnegative(Image img) {
  for (double& v : img.values()) v = std::max(v, 0.0);
  return img;
}

double rmse(const Image& estimate, const Image& truth) {
  require_same_shape(estimate.shape(), truth.shape(), "rmse");
  double err = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    err += d * d;
    ref += truth[i] * truth[i];
  }
  if (ref == 0.0) throw DegenerateInputError("rmse: reference image has zero norm");
  return std::sqrt(err / ref);
}

}  // namespace nbtv
