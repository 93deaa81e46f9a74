#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nbtv/error.hpp"
#include "nbtv/prox.hpp"
#include "prox_oracle.hpp"
#include "test_support.hpp"

namespace nbtv {
namespace {

using testing::projected_subgradient_oracle;
using testing::random_image;

constexpr TvKind kKinds[] = {TvKind::Anisotropic, TvKind::Isotropic};

ProxConfig tight() {
  ProxConfig cfg;
  cfg.max_inner_iters = 5000;
  cfg.dual_tolerance = 1e-13;
  return cfg;
}

WeightFields random_weights(Shape s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.3, 3.0);
  WeightFields w = WeightFields::uniform(s);
  for (auto& g : w.gamma) g = u(rng);
  for (auto& o : w.omega) o = u(rng);
  return w;
}

TEST(ProxTv, VanishingWeightIsProjection) {
  std::mt19937_64 rng(1);
  const Image b = random_image(6, 5, rng, -1.0, 2.0);
  const Image want = clip_nonnegative(b);
  for (TvKind kind : kKinds) {
    const Image x = prox_tv(b, 1e-15, kind, ProxConfig{});
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(x[i], want[i], 1e-8);
  }
}

TEST(ProxTv, HugeWeightGivesMean) {
  std::mt19937_64 rng(2);
  const Image b = random_image(6, 6, rng, 0.0, 3.0);
  const double mean = b.sum() / b.size();
  for (TvKind kind : kKinds) {
    const Image x = prox_tv(b, 1e6 * b.max(), kind, tight());
    for (double v : x.values()) EXPECT_NEAR(v, mean, 1e-4);
  }
}

TEST(ProxTv, MatchesSubgradientOracleUniformAniso) {
  std::mt19937_64 rng(3);
  const Image b = random_image(4, 4, rng, -0.5, 2.0);
  const WeightFields w = WeightFields::uniform(b.shape());
  const double lambda = 0.3;
  const Image x = prox_weighted_tv(b, lambda, TvKind::Anisotropic, w, tight());
  const double got = prox_objective(x, b, lambda, TvKind::Anisotropic, w);
  const double want = projected_subgradient_oracle(b, lambda, TvKind::Anisotropic, w);
  EXPECT_LT(std::abs(got - want) / want, 1e-5);
}

TEST(ProxTv, MatchesSubgradientOracleWeightedIso) {
  std::mt19937_64 rng(4);
  const Image b = random_image(4, 4, rng, -0.5, 2.0);
  const WeightFields w = random_weights(b.shape(), rng);
  const double lambda = 0.6;
  const Image x = prox_weighted_tv(b, lambda, TvKind::Isotropic, w, tight());
  const double got = prox_objective(x, b, lambda, TvKind::Isotropic, w);
  const double want = projected_subgradient_oracle(b, lambda, TvKind::Isotropic, w);
  EXPECT_LT(std::abs(got - want) / want, 1e-5);
}

TEST(ProxTv, OracleObjectiveAgreesWithLibrary) {
  std::mt19937_64 rng(5);
  const Image b = random_image(4, 5, rng);
  const Image x = random_image(4, 5, rng);
  const WeightFields w = random_weights(b.shape(), rng);
  Image g(4, 5);
  for (TvKind kind : kKinds)
    EXPECT_NEAR(testing::prox_subgradient(x, b, 0.7, kind, w, g), prox_objective(x, b, 0.7, kind, w), 1e-13);
}

TEST(ProxTv, UnitWeightsMatchUnweightedPath) {
  std::mt19937_64 rng(6);
  const Image b = random_image(7, 6, rng, -0.2, 1.0);
  for (TvKind kind : kKinds) {
    const Image a = prox_tv(b, 0.2, kind, ProxConfig{});
    const Image c = prox_weighted_tv(b, 0.2, kind, WeightFields::uniform(b.shape()), ProxConfig{});
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(a[i], c[i], 1e-12);
  }
}

TEST(ProxTv, NeverWorseThanProjection) {
  std::mt19937_64 rng(7);
  ProxConfig short_run;
  short_run.max_inner_iters = 3;
  for (int rep = 0; rep < 6; ++rep) {
    const Image b = random_image(8, 8, rng, -1.0, 4.0);
    const WeightFields w = random_weights(b.shape(), rng);
    for (TvKind kind : kKinds) {
      const Image x = prox_weighted_tv(b, 0.5 * (rep + 1), kind, w, short_run);
      EXPECT_GE(x.min(), 0.0);
      EXPECT_LE(prox_objective(x, b, 0.5 * (rep + 1), kind, w),
                prox_objective(clip_nonnegative(b), b, 0.5 * (rep + 1), kind, w));
    }
  }
}

TEST(ProxTv, WarmStartReusesDual) {
  std::mt19937_64 rng(8);
  const Image b = random_image(10, 10, rng, 0.0, 2.0);
  ProxConfig cfg;
  cfg.max_inner_iters = 20000;
  cfg.dual_tolerance = 1e-9;
  DualField dual;
  ProxReport cold, warm;
  const Image x1 = prox_tv(b, 0.3, TvKind::Isotropic, cfg, &dual, &cold);
  EXPECT_TRUE(dual.matches(b.shape()));
  const Image x2 = prox_tv(b, 0.3, TvKind::Isotropic, cfg, &dual, &warm);
  EXPECT_TRUE(cold.converged);
  EXPECT_LT(warm.iterations, cold.iterations);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(x1[i], x2[i], 1e-6);
}

TEST(ProxTv, RejectsBadArguments) {
  const Image b(3, 3, 1.0);
  EXPECT_THROW(prox_tv(b, 0.0, TvKind::Anisotropic, ProxConfig{}), DomainError);
  EXPECT_THROW(prox_weighted_tv(b, 1.0, TvKind::Anisotropic, WeightFields::uniform({3, 4}), ProxConfig{}),
               ShapeError);
  ProxConfig bad;
  bad.max_inner_iters = 0;
  EXPECT_THROW(prox_tv(b, 1.0, TvKind::Anisotropic, bad), DomainError);
}

TEST(ProxLp, ZeroWeightIsProjection) {
  const Image b = Image::from_rows({{-1.0, 0.5, 2.0}});
  EXPECT_EQ(prox_weighted_lp(b, 0.0, 0.5, Image(1, 3, 1.0)), clip_nonnegative(b));
}

TEST(ProxLp, SoftThreshold) {
  EXPECT_DOUBLE_EQ(prox_weighted_lp(Image(1, 1, 2.0), 0.5, 1.0, Image(1, 1, 7.0))[0], 1.5);
}

TEST(ProxLp, ReweightedThreshold) {
  EXPECT_NEAR(prox_weighted_lp(Image(1, 1, 2.0), 1.0, 0.5, Image(1, 1, 4.0), 1e-12)[0], 1.5, 1e-12);
}

TEST(ProxLp, ZeroPreviousValueLocksPixel) {
  // Weight eps_w^(p-1) = 1e4 swamps any moderate b.
  EXPECT_EQ(prox_weighted_lp(Image(1, 1, 3.0), 0.01, 0.5, Image(1, 1, 0.0))[0], 0.0);
}

TEST(EllipseProjection, InteriorPointUnchanged) {
  const auto [p, q] = project_onto_ellipse(0.3, -0.2, 1.0, 0.5);
  EXPECT_EQ(p, 0.3);
  EXPECT_EQ(q, -0.2);
}

TEST(EllipseProjection, CircleIsRadialScaling) {
  const auto [p, q] = project_onto_ellipse(3.0, 4.0, 2.0, 2.0);
  EXPECT_NEAR(p, 1.2, 1e-12);
  EXPECT_NEAR(q, 1.6, 1e-12);
}

TEST(EllipseProjection, MatchesDenseBoundarySearch) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> pt(-5.0, 5.0), ax(0.05, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double a = ax(rng), b = ax(rng), p = pt(rng), q = pt(rng);
    if ((p / a) * (p / a) + (q / b) * (q / b) <= 1.0) continue;
    const auto [x, y] = project_onto_ellipse(p, q, a, b);
    EXPECT_NEAR((x / a) * (x / a) + (y / b) * (y / b), 1.0, 1e-9);
    const double got = std::hypot(p - x, q - y);
    double best = 1e300;
    // Coarse scan then golden refinement around the best angle.
    double t0 = 0.0;
    for (int i = 0; i < 4096; ++i) {
      const double t = 2 * M_PI * i / 4096;
      const double d = std::hypot(p - a * std::cos(t), q - b * std::sin(t));
      if (d < best) best = d, t0 = t;
    }
    double lo = t0 - 2 * M_PI / 4096, hi = t0 + 2 * M_PI / 4096;
    auto dist = [&](double t) { return std::hypot(p - a * std::cos(t), q - b * std::sin(t)); };
    for (int i = 0; i < 100; ++i) {
      const double m1 = lo + (hi - lo) * 0.382, m2 = lo + (hi - lo) * 0.618;
      if (dist(m1) < dist(m2)) hi = m2;
      else lo = m1;
    }
    best = std::min(best, dist(0.5 * (lo + hi)));
    EXPECT_LE(got, best + 1e-9) << "a=" << a << " b=" << b << " p=" << p << " q=" << q;
  }
}

}  // namespace
}  // namespace nbtv
