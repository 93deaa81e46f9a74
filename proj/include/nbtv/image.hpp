#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace nbtv {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const noexcept { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense row-major 2-D grid of finite reals.
///
/// Pixel (l, k) is row l, column k. Construction rejects NaN/Inf; signal
/// roles (truth, iterates) additionally call require_nonnegative().
class Image {
 public:
  Image() = default;
  Image(std::size_t rows, std::size_t cols, double fill = 0.0);
  Image(std::size_t rows, std::size_t cols, std::vector<double> values);
  explicit Image(Shape shape, double fill = 0.0) : Image(shape.rows, shape.cols, fill) {}

  /// Builds an image from nested row lists; all rows must have equal length.
  static Image from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Shape shape() const noexcept { return {rows_, cols_}; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double operator()(std::size_t l, std::size_t k) const { return values_[l * cols_ + k]; }
  double& operator()(std::size_t l, std::size_t k) { return values_[l * cols_ + k]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double min() const;
  double max() const;
  double sum() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Nonnegative integer measurements y, same layout as Image.
class ObservedCounts {
 public:
  ObservedCounts() = default;
  ObservedCounts(std::size_t rows, std::size_t cols, std::vector<std::int64_t> counts);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Shape shape() const noexcept { return {rows_, cols_}; }
  std::size_t size() const noexcept { return counts_.size(); }

  std::int64_t operator[](std::size_t i) const { return counts_[i]; }
  std::span<const std::int64_t> counts() const noexcept { return counts_; }

  std::int64_t total() const;
  Image as_image() const;

  /// Rounds each value of an image holding integer-valued counts.
  static ObservedCounts from_image(const Image& img);

  friend bool operator==(const ObservedCounts&, const ObservedCounts&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> counts_;
};

void require_same_shape(Shape a, Shape b, std::string_view what);
void require_nonnegative(const Image& img, std::string_view what);

double dot(const Image& a, const Image& b);
double norm2(const Image& a);

/// Elementwise max(img, 0).
Image clip_nonnegative(Image img);

/// Relative l2 error ||estimate - truth|| / ||truth||.
double rmse(const Image& estimate, const Image& truth);

}  // namespace nbtv
