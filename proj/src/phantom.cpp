#include "nbtv/phantom.hpp"

#include <cmath>
#include <functional>

#include "nbtv/error.hpp"

namespace nbtv {

namespace {

struct Region {
  std::function<bool(double, double)> contains;  // (x, y) in unit square
  double level;
};

Region ellipse(double cx, double cy, double ax, double ay, double level) {
  return {[=](double x, double y) {
            const double u = (x - cx) / ax;
            const double v = (y - cy) / ay;
            return u * u + v * v <= 1.0;
          },
          level};
}

Region rect(double x0, double y0, double x1, double y1, double level) {
  return {[=](double x, double y) { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }, level};
}

// Later regions paint over earlier ones.
std::vector<Region> layout(const std::string& id) {
  if (id == "shapes") {
    return {
        ellipse(0.50, 0.50, 0.42, 0.36, 0.30),
        rect(0.22, 0.30, 0.45, 0.70, 0.60),
        ellipse(0.66, 0.40, 0.12, 0.10, 1.00),
        rect(0.58, 0.60, 0.78, 0.72, 0.15),
        ellipse(0.33, 0.50, 0.06, 0.08, 0.80),
    };
  }
  if (id == "blocks") {
    return {
        rect(0.10, 0.10, 0.45, 0.45, 0.25),
        rect(0.55, 0.10, 0.90, 0.45, 0.50),
        rect(0.10, 0.55, 0.45, 0.90, 0.75),
        rect(0.55, 0.55, 0.90, 0.90, 1.00),
    };
  }
  throw ConfigError("unknown phantom id '" + id + "'");
}

}  // namespace

std::vector<std::string> phantom_ids() { return {"shapes", "blocks"}; }

Image make_phantom(const std::string& id, std::size_t size, double intensity_scale) {
  const auto regions = layout(id);
  if (size < 16) throw ConfigError("make_phantom: size must be at least 16");
  if (!(intensity_scale >= 0.0) || !std::isfinite(intensity_scale)) {
    throw ConfigError("make_phantom: intensity scale must be finite and >= 0");
  }
  Image img(size, size);
  for (std::size_t l = 0; l < size; ++l) {
    for (std::size_t k = 0; k < size; ++k) {
      const double x = (static_cast<double>(k) + 0.5) / static_cast<double>(size);
      const double y = (static_cast<double>(l) + 0.5) / static_cast<double>(size);
      double level = 0.0;
      for (const auto& r : regions)
        if (r.contains(x, y)) level = r.level;
      img(l, k) = level * intensity_scale;
    }
  }
  return img;
}

}  // namespace nbtv
