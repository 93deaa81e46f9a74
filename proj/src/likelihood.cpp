#include "nbtv/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include "nbtv/error.hpp"

namespace nbtv {

namespace {

void require_nb(const DataFit& fit, const char* op) {
  if (fit.model().is_poisson()) {
    throw DomainError(std::string(op) + ": data fit is not negative binomial");
  }
}

}  // namespace

DataFit::DataFit(NoiseModel model, ObservedCounts counts, BlurSpec blur, double floor_eps)
    : model_(model), counts_(std::move(counts)), blur_(blur), floor_eps_(floor_eps) {
  if (!(floor_eps_ > 0.0)) throw DomainError("DataFit: floor_eps must be positive");
}

DataFit DataFit::with_model(NoiseModel model) const {
  return DataFit(model, counts_, blur_.spec(), floor_eps_);
}

Image DataFit::floored_forward(const Image& f) const {
  require_same_shape(f.shape(), counts_.shape(), "DataFit");
  require_nonnegative(f, "DataFit");
  Image a = blur_.apply(f);
  for (double& v : a.values()) v = std::max(v, floor_eps_);
  return a;
}

double DataFit::nb_value(const Image& a) const {
  const double r = model_.dispersion();
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto y = static_cast<double>(counts_[i]);
    total += (r + y) * std::log(r + a[i]);
    if (y > 0.0) total -= y * std::log(a[i]);
  }
  return total;
}

double DataFit::poisson_value(const Image& a) const {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto y = static_cast<double>(counts_[i]);
    total += a[i];
    if (y > 0.0) total -= y * std::log(a[i]);
  }
  return total;
}

Image DataFit::nb_residual(const Image& a) const {
  const double r = model_.dispersion();
  Image d(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto y = static_cast<double>(counts_[i]);
    d[i] = (r + y) / (r + a[i]) - y / a[i];
  }
  return d;
}

Image DataFit::poisson_residual(const Image& a) const {
  Image d(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = 1.0 - static_cast<double>(counts_[i]) / a[i];
  }
  return d;
}

double DataFit::objective(const Image& f) const {
  const Image a = floored_forward(f);
  return model_.is_poisson() ? poisson_value(a) : nb_value(a);
}

Image DataFit::gradient(const Image& f) const {
  const Image a = floored_forward(f);
  return blur_.adjoint(model_.is_poisson() ? poisson_residual(a) : nb_residual(a));
}

double DataFit::objective_and_gradient(const Image& f, Image& grad) const {
  const Image a = floored_forward(f);
  if (model_.is_poisson()) {
    grad = blur_.adjoint(poisson_residual(a));
    return poisson_value(a);
  }
  grad = blur_.adjoint(nb_residual(a));
  return nb_value(a);
}

std::size_t DataFit::floored_pixels(const Image& f) const {
  const Image a = blur_.apply(f);
  return static_cast<std::size_t>(
      std::count_if(a.values().begin(), a.values().end(), [&](double v) { return v <= floor_eps_; }));
}

double nb_objective(const DataFit& fit, const Image& f) {
  require_nb(fit, "nb_objective");
  return fit.nb_value(fit.floored_forward(f));
}

Image nb_gradient(const DataFit& fit, const Image& f) {
  require_nb(fit, "nb_gradient");
  return fit.blur_.adjoint(fit.nb_residual(fit.floored_forward(f)));
}

double poisson_objective(const DataFit& fit, const Image& f) {
  return fit.poisson_value(fit.floored_forward(f));
}

Image poisson_gradient(const DataFit& fit, const Image& f) {
  return fit.blur_.adjoint(fit.poisson_residual(fit.floored_forward(f)));
}

std::vector<double> DenseMatrix::multiply(const std::vector<double>& v) const {
  if (v.size() != n) throw ShapeError("DenseMatrix::multiply: size mismatch");
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += data[i * n + j] * v[j];
    out[i] = acc;
  }
  return out;
}

DenseMatrix nb_hessian_dense(const DataFit& fit, const Image& f) {
  require_nb(fit, "nb_hessian_dense");
  const std::size_t n = f.size();
  if (n > kDenseHessianCap) {
    throw CapacityError("nb_hessian_dense: " + std::to_string(n) + " unknowns exceeds cap of " +
                        std::to_string(kDenseHessianCap));
  }
  require_same_shape(f.shape(), fit.shape(), "nb_hessian_dense");
  require_nonnegative(f, "nb_hessian_dense");

  // Column j of A is the blur of the j-th unit image.
  std::vector<Image> columns;
  columns.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    Image e(f.rows(), f.cols());
    e[j] = 1.0;
    columns.push_back(fit.blur().apply(e));
  }

  const double r = fit.model().dispersion();
  Image a = fit.blur().apply(f);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ai = std::max(a[i], fit.floor_eps());
    const auto y = static_cast<double>(fit.counts()[i]);
    h[i] = y / (ai * ai) - (r + y) / ((r + ai) * (r + ai));
  }

  DenseMatrix H{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += columns[j][i] * h[i] * columns[k][i];
      H(j, k) = acc;
      H(k, j) = acc;
    }
  }
  return H;
}

}  // namespace nbtv
