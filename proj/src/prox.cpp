#include "nbtv/prox.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "nbtv/error.hpp"

namespace nbtv {

void ProxConfig::validate() const {
  if (max_inner_iters == 0) throw DomainError("ProxConfig: max_inner_iters must be positive");
  if (!(dual_tolerance > 0.0)) throw DomainError("ProxConfig: dual_tolerance must be positive");
  if (!(eps_w > 0.0)) throw DomainError("ProxConfig: eps_w must be positive");
  if (reweight_every == 0) throw DomainError("ProxConfig: reweight_every must be positive");
}

namespace {

// Multiplier mu >= 0 for the projection of (p, q) onto the ellipse with
// semi-axes (a, b); see project_onto_ellipse. mu_hint may lie on either side
// of the root.
double ellipse_multiplier(double ap, double bq, double a2, double b2, double mu_hint) {
  // (a p / (a^2 + mu), b q / (b^2 + mu)) has unit length at the root. 1/|.| is
  // concave and increasing in mu, so Newton on 1/|.| - 1 lands left of the
  // root after at most one step and then climbs onto it monotonically.
  const double lo = std::max({0.0, ap - a2, bq - b2});
  double mu = std::max(mu_hint, lo);
  for (int it = 0; it < 100; ++it) {
    const double ia = 1.0 / (a2 + mu);
    const double ib = 1.0 / (b2 + mu);
    const double u2 = ap * ap * ia * ia;
    const double v2 = bq * bq * ib * ib;
    const double phi = u2 + v2;
    if (std::abs(phi - 1.0) <= 1e-10) break;
    const double next = std::max(lo, mu + phi * (std::sqrt(phi) - 1.0) / (u2 * ia + v2 * ib));
    if (phi > 1.0 ? !(next > mu) : next == mu) break;
    mu = next;
  }
  return mu;
}

std::pair<double, double> project_with_hint(double p, double q, double a, double b, double& mu) {
  const double sp = p / a;
  const double sq = q / b;
  if (sp * sp + sq * sq <= 1.0) return {p, q};
  if (a == b) {
    const double s = 1.0 / std::sqrt(sp * sp + sq * sq);
    return {p * s, q * s};
  }
  const double a2 = a * a;
  const double b2 = b * b;
  mu = ellipse_multiplier(a * std::abs(p), b * std::abs(q), a2, b2, mu);
  double x = a2 * p / (a2 + mu);
  double y = b2 * q / (b2 + mu);
  const double s = (x / a) * (x / a) + (y / b) * (y / b);
  if (s > 1.0) {
    const double c = 1.0 / std::sqrt(s);
    x *= c;
    y *= c;
  }
  return {x, y};
}

}  // namespace

std::pair<double, double> project_onto_ellipse(double p, double q, double a, double b) {
  double mu = 0.0;
  return project_with_hint(p, q, a, b, mu);
}

namespace {

// out = max(b - lambda * D^T (P, Q), 0), with
// D^T(P, Q)(l,k) = P(l,k) - P(l-1,k) + Q(l,k) - Q(l,k-1), out-of-range terms 0.
void primal_from_dual(const Image& b, double lambda, const std::vector<double>& P,
                      const std::vector<double>& Q, Image& out) {
  const std::size_t m = b.rows();
  const std::size_t n = b.cols();
  const double* bv = b.values().data();
  double* x = out.values().data();
  for (std::size_t l = 0; l < m; ++l) {
    const double* brow = bv + l * n;
    double* xrow = x + l * n;
    const double* pdown = l + 1 < m ? P.data() + l * n : nullptr;
    const double* pup = l > 0 ? P.data() + (l - 1) * n : nullptr;
    const double* q = Q.data() + l * (n - 1);
    for (std::size_t k = 0; k < n; ++k) xrow[k] = 0.0;
    if (pdown)
      for (std::size_t k = 0; k < n; ++k) xrow[k] += pdown[k];
    if (pup)
      for (std::size_t k = 0; k < n; ++k) xrow[k] -= pup[k];
    if (n > 1) {
      for (std::size_t k = 0; k + 1 < n; ++k) xrow[k] += q[k];
      for (std::size_t k = 1; k < n; ++k) xrow[k] -= q[k - 1];
    }
    for (std::size_t k = 0; k < n; ++k) xrow[k] = std::max(brow[k] - lambda * xrow[k], 0.0);
  }
}

// Dual iterate W (P vertical, Q horizontal), its extrapolation (R, S), and the
// edge weights bounding it.
struct DualIterate {
  std::vector<double> P, Q, R, S;
  std::vector<double> mu;  // last ellipse multiplier per pixel (isotropic)
  const std::vector<double>& gamma;
  const std::vector<double>& omega;
};

// Euclidean projection of (P, Q) onto the feasible set, in place.
void project_dual(TvKind kind, Shape shape, DualIterate& d) {
  const std::size_t m = shape.rows;
  const std::size_t n = shape.cols;
  auto clamp_p = [&](std::size_t e) { d.P[e] = std::clamp(d.P[e], -d.gamma[e], d.gamma[e]); };
  auto clamp_q = [&](std::size_t e) { d.Q[e] = std::clamp(d.Q[e], -d.omega[e], d.omega[e]); };
  if (kind == TvKind::Anisotropic) {
    for (std::size_t e = 0; e < d.P.size(); ++e) clamp_p(e);
    for (std::size_t e = 0; e < d.Q.size(); ++e) clamp_q(e);
    return;
  }
  for (std::size_t l = 0; l < m; ++l)
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t ev = l * n + k;
      const std::size_t eh = l * (n - 1) + k;
      if (l + 1 < m && k + 1 < n)
        std::tie(d.P[ev], d.Q[eh]) = project_with_hint(d.P[ev], d.Q[eh], d.gamma[ev], d.omega[eh], d.mu[ev]);
      else if (l + 1 < m)
        clamp_p(ev);
      else if (k + 1 < n)
        clamp_q(eh);
    }
}

struct StepNorms {
  double change2 = 0.0;
  double norm2 = 0.0;
};

// One projected dual gradient step from the extrapolated point plus the
// momentum update, fused into a single pass:
//   W+ = Proj(R + step * D x),  R <- W+ + mom (W+ - W),  W <- W+.
StepNorms dual_step(TvKind kind, const Image& x, double step, double mom, DualIterate& d) {
  const std::size_t m = x.rows();
  const std::size_t n = x.cols();
  const double* xv = x.values().data();
  StepNorms out;
  auto commit = [&](double& w, double& r, double next) {
    const double delta = next - w;
    r = next + mom * delta;
    w = next;
    out.change2 += delta * delta;
    out.norm2 += next * next;
  };
  if (kind == TvKind::Anisotropic) {
    for (std::size_t l = 0; l + 1 < m; ++l)
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t e = l * n + k;
        const double g = d.gamma[e];
        commit(d.P[e], d.R[e], std::clamp(d.R[e] + step * (xv[e] - xv[e + n]), -g, g));
      }
    for (std::size_t l = 0; l < m; ++l)
      for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t e = l * (n - 1) + k;
        const std::size_t i = l * n + k;
        const double w = d.omega[e];
        commit(d.Q[e], d.S[e], std::clamp(d.S[e] + step * (xv[i] - xv[i + 1]), -w, w));
      }
    return out;
  }
  for (std::size_t l = 0; l < m; ++l) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = l * n + k;
      const bool down = l + 1 < m;
      const bool right = k + 1 < n;
      if (down && right) {
        const std::size_t eh = l * (n - 1) + k;
        const auto [p, q] = project_with_hint(d.R[i] + step * (xv[i] - xv[i + n]),
                                              d.S[eh] + step * (xv[i] - xv[i + 1]), d.gamma[i],
                                              d.omega[eh], d.mu[i]);
        commit(d.P[i], d.R[i], p);
        commit(d.Q[eh], d.S[eh], q);
      } else if (down) {
        const double g = d.gamma[i];
        commit(d.P[i], d.R[i], std::clamp(d.R[i] + step * (xv[i] - xv[i + n]), -g, g));
      } else if (right) {
        const std::size_t eh = l * (n - 1) + k;
        const double w = d.omega[eh];
        commit(d.Q[eh], d.S[eh], std::clamp(d.S[eh] + step * (xv[i] - xv[i + 1]), -w, w));
      }
    }
  }
  return out;
}

double prox_value(TvKind kind, const WeightFields& w, const Image& x, const Image& b,
                  double lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - b[i]) * (x[i] - b[i]);
  return 0.5 * s + lambda * weighted_tv_value(kind, w, x);
}

Image fgp(const Image& b, double lambda, TvKind kind, const WeightFields& w, const ProxConfig& cfg,
          DualField* warm, ProxReport* report) {
  cfg.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("prox: lambda must be positive");
  const Shape shape = b.shape();
  const std::size_t m = shape.rows;
  const std::size_t n = shape.cols;
  const std::size_t nv = m > 0 ? (m - 1) * n : 0;
  const std::size_t nh = n > 0 ? m * (n - 1) : 0;

  DualIterate d{std::vector<double>(nv, 0.0), std::vector<double>(nh, 0.0), {}, {},
                std::vector<double>(kind == TvKind::Isotropic ? m * n : 0, 0.0), w.gamma, w.omega};
  if (warm && warm->matches(shape)) {
    d.P = warm->vertical;
    d.Q = warm->horizontal;
    project_dual(kind, shape, d);
  }
  d.R = d.P;
  d.S = d.Q;
  Image x(m, n);
  double t = 1.0;
  const double step = 1.0 / (8.0 * lambda);

  ProxReport rep;
  for (std::size_t it = 0; it < cfg.max_inner_iters; ++it) {
    primal_from_dual(b, lambda, d.R, d.S, x);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const StepNorms s = dual_step(kind, x, step, (t - 1.0) / t_next, d);
    t = t_next;
    rep.iterations = it + 1;
    if (s.change2 == 0.0 || s.change2 < cfg.dual_tolerance * cfg.dual_tolerance * s.norm2) {
      rep.converged = true;
      break;
    }
  }
  primal_from_dual(b, lambda, d.P, d.Q, x);

  Image fallback = clip_nonnegative(b);
  if (prox_value(kind, w, x, b, lambda) > prox_value(kind, w, fallback, b, lambda)) {
    x = std::move(fallback);
    rep.fell_back = true;
  }

  if (warm) {
    warm->image = shape;
    warm->vertical = std::move(d.P);
    warm->horizontal = std::move(d.Q);
  }
  if (report) *report = rep;
  return x;
}

}  // namespace

Image prox_weighted_tv(const Image& b, double lambda, TvKind kind, const WeightFields& w,
                       const ProxConfig& cfg, DualField* warm, ProxReport* report) {
  require_same_shape(w.image, b.shape(), "prox_weighted_tv");
  return fgp(b, lambda, kind, w, cfg, warm, report);
}

Image prox_tv(const Image& b, double lambda, TvKind kind, const ProxConfig& cfg, DualField* warm,
              ProxReport* report) {
  return fgp(b, lambda, kind, WeightFields::uniform(b.shape()), cfg, warm, report);
}

Image prox_weighted_lp(const Image& b, double lambda, double p, const Image& f_prev, double eps_w) {
  require_same_shape(b.shape(), f_prev.shape(), "prox_weighted_lp");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("prox_weighted_lp: p must lie in (0, 1]");
  if (!(lambda >= 0.0)) throw DomainError("prox_weighted_lp: lambda must be nonnegative");
  Image x(b.rows(), b.cols());
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double w = p == 1.0 ? 1.0 : std::pow(std::abs(f_prev[i]) + eps_w, p - 1.0);
    x[i] = std::max(0.0, b[i] - lambda * w);
  }
  return x;
}

double prox_objective(const Image& x, const Image& b, double lambda, TvKind kind,
                      const WeightFields& w) {
  require_same_shape(x.shape(), b.shape(), "prox_objective");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - b[i]) * (x[i] - b[i]);
  return 0.5 * s + lambda * weighted_tv_value(kind, w, x);
}

}  // namespace nbtv
