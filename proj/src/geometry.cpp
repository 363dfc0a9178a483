#include "alf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "alf/errors.hpp"
#include "alf/quadrature.hpp"
#include "alf/report.hpp"

namespace alf {

Christoffel operator+(Christoffel x, const Christoffel& y) {
  for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] += y.v[i];
  return x;
}

Christoffel operator-(Christoffel x, const Christoffel& y) {
  for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] -= y.v[i];
  return x;
}

Christoffel operator*(double s, Christoffel x) {
  for (double& e : x.v) e *= s;
  return x;
}

Christoffel operator/(Christoffel x, double s) {
  for (double& e : x.v) e /= s;
  return x;
}

Christoffel christoffel(const MetricField& metric, const Vec4& x, const FdStep& step) {
  std::array<Mat4, 4> dg;
  for (int c = 0; c < 4; ++c) dg[c] = detail::partial(metric, x, c, step);
  const Mat4 g = metric(x);
  Eigen::LLT<Mat4> llt(g);
  if (llt.info() != Eigen::Success) throw PositivityError("metric is not positive definite");
  const Mat4 ginv = llt.solve(Mat4::Identity());
  Christoffel G;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = b; c < 4; ++c) {
        double s = 0.0;
        for (int d = 0; d < 4; ++d) s += ginv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
        G(a, b, c) = 0.5 * s;
        G(a, c, b) = 0.5 * s;
      }
  return G;
}

Riemann riemann(const MetricField& metric, const Vec4& x, const FdStep& step) {
  auto gamma = [&](const Vec4& y) { return christoffel(metric, y, step); };
  std::array<Christoffel, 4> dG;
  for (int c = 0; c < 4; ++c) dG[c] = detail::partial(gamma, x, c, step);
  const Christoffel G = gamma(x);
  Riemann R;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = c + 1; d < 4; ++d) {
          double s = dG[c](a, d, b) - dG[d](a, c, b);
          for (int e = 0; e < 4; ++e) s += G(a, c, e) * G(e, d, b) - G(a, d, e) * G(e, c, b);
          R(a, b, c, d) = s;
          R(a, b, d, c) = -s;
        }
  return R;
}

CurvatureInvariants curvature_invariants(const Riemann& R, const Mat4& metric) {
  const Mat4 ginv = metric.inverse();
  // Lower the first index, then raise all four for the full contraction.
  std::array<double, 256> low{};
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 64; ++i) {
      double s = 0.0;
      for (int e = 0; e < 4; ++e) s += metric(a, e) * R.v[64 * e + i];
      low[64 * a + i] = s;
    }
  std::array<double, 256> up = low;
  for (int slot = 0; slot < 4; ++slot) {
    const int stride = 64 >> (2 * slot);
    std::array<double, 256> next{};
    for (int i = 0; i < 256; ++i) {
      const int idx = (i / stride) % 4;
      const int base = i - idx * stride;
      double s = 0.0;
      for (int e = 0; e < 4; ++e) s += ginv(idx, e) * up[base + e * stride];
      next[i] = s;
    }
    up = next;
  }
  double rm2 = 0.0;
  for (int i = 0; i < 256; ++i) rm2 += low[i] * up[i];

  Mat4 ric = Mat4::Zero();
  for (int b = 0; b < 4; ++b)
    for (int d = 0; d < 4; ++d)
      for (int a = 0; a < 4; ++a) ric(b, d) += R(a, b, a, d);
  const Mat4 ric_up = ginv * ric * ginv;
  const double ric2 = (ric.array() * ric_up.array()).sum();

  double scale = 0.0;
  double bianchi = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          scale = std::max(scale, std::abs(R(a, b, c, d)));
          bianchi = std::max(bianchi, std::abs(R(a, b, c, d) + R(a, c, d, b) + R(a, d, b, c)));
        }
  return {std::sqrt(std::max(rm2, 0.0)), std::sqrt(std::max(ric2, 0.0)), scale > 0.0 ? bianchi / scale : 0.0};
}

MetricField gh_metric_field(const MonopoleConfig& config, const GaugeChart& chart) {
  return [config, chart](const Vec4& y) {
    ChartPoint q;
    q.base = y.head<3>();
    q.fiber = y[3];
    return gh_metric(config, q, chart);
  };
}

namespace {

// Length scale for the FD step: the distance to the singular set, capped by
// max(|x|, 1) so configurations without singularities still get a finite step.
double step_scale(const MonopoleConfig& config, const Vec3& x) {
  return std::min(config.distance_to_singularity(x), std::max(x.norm(), 1.0));
}

}  // namespace

CurvatureSample ricci_norm(const MonopoleConfig& config, const ChartPoint& p, const FdStep& step) {
  if (p.frame != Frame::outer) throw DomainError("ricci_norm expects an OUTER chart point");
  config.require_admissible(p.base);
  if (!(step.h > 0.0)) throw ConfigError("FD step must be positive");
  const double d = config.distance_to_singularity(p.base);
  if (d < 10.0 * step.h) {
    throw DomainError(fmt::format("FD step {} too large for distance {} to the singular set", step.h, d));
  }
  const MetricField field = gh_metric_field(config, gauge_avoiding(config, p.base));
  const Riemann R = riemann(field, p.coords(), step);
  const CurvatureInvariants inv = curvature_invariants(R, field(p.coords()));
  return {p, inv.riemann_norm, inv.ricci_norm, step.h, inv.bianchi_residual};
}

CurvatureSample ricci_norm(const MonopoleConfig& config, const ChartPoint& p, const CurvatureOptions& opts) {
  return ricci_norm(config, p, FdStep{opts.relative_step * step_scale(config, p.base), opts.richardson});
}

double ball_volume(const MonopoleConfig& config, double R, int order) {
  config.require_positive_epsilon();
  if (order < 2) throw ConfigError("ball_volume order must be >= 2");
  double enclosed = 0.0;
  for (const Center& c : config.centers()) {
    if (!(c.position.norm() + config.clearance() < R)) {
      throw DomainError(fmt::format("radius {} does not enclose the singular point at distance {}", R,
                                    c.position.norm()));
    }
    enclosed += c.charge * c.position.squaredNorm();
  }
  const QuadratureRule rule = gauss_legendre(order, -1.0, 1.0);
  const int nphi = 2 * order;
  double surface = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double u = rule.nodes[i];
    const double rho = std::sqrt(std::max(0.0, 1.0 - u * u));
    double ring = 0.0;
    for (int j = 0; j < nphi; ++j) {
      const double phi = kTwoPi * (j + 0.5) / nphi;
      const Vec3 n(rho * std::cos(phi), rho * std::sin(phi), u);
      const Vec3 x = R * n;
      ring += eval_h(config, x) * R / 3.0 - R * R / 6.0 * grad_h(config, x).dot(n);
    }
    surface += rule.weights[i] * ring * (kTwoPi / nphi);
  }
  surface *= R * R;
  const double eps = config.epsilon();
  return kTwoPi / (eps * eps * eps) * (surface - 4.0 * kPi / 6.0 * enclosed);
}

namespace {

void require_increasing(const std::vector<double>& radii) {
  if (radii.size() < 3) throw FitError("need at least 3 radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || (i > 0 && !(radii[i] > radii[i - 1]))) {
      throw FitError("radii must be positive and strictly increasing");
    }
  }
}

}  // namespace

VolumeGrowth volume_growth(const MonopoleConfig& config, const std::vector<double>& radii, int order) {
  require_increasing(radii);
  VolumeGrowth out;
  out.radii = radii;
  for (double R : radii) out.volumes.push_back(ball_volume(config, R, order));
  const LogLogFit fit = loglog_fit(out.radii, out.volumes);
  out.exponent = fit.slope;
  out.intercept = fit.intercept;
  out.r_squared = fit.r_squared;
  return out;
}

CurvatureDecay curvature_decay(const MonopoleConfig& config, const std::vector<double>& radii,
                               const DecayOptions& opts) {
  require_increasing(radii);
  if (opts.angular_count < 1) throw ConfigError("angular_count must be >= 1");
  config.require_positive_epsilon();
  const std::vector<Vec3> dirs = fibonacci_sphere(opts.angular_count);
  std::vector<ChartPoint> points;
  std::vector<std::size_t> offsets{0};
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const Mat3 rot = counter_rotation(opts.seed, 5, i);
    for (int j = 0; j < opts.angular_count; ++j) {
      ChartPoint p;
      p.base = radii[i] * (rot * dirs[j]);
      p.fiber = kTwoPi * counter_uniform(opts.seed, 6, i * opts.angular_count + j);
      if (config.admissible(p.base)) points.push_back(p);
    }
    if (points.size() == offsets.back()) {
      throw DomainError(fmt::format("no admissible samples at radius {}", radii[i]));
    }
    offsets.push_back(points.size());
  }

  CurvatureDecay out;
  out.radii = radii;
  out.samples.resize(points.size());
  std::vector<double> h(points.size());
  parallel_for(points.size(), opts.threads, [&](std::size_t n) {
    out.samples[n] = ricci_norm(config, points[n], opts.curvature);
    h[n] = eval_h(config, points[n].base);
  });

  const double eps = config.epsilon();
  std::vector<double> density;  // shell density of |Rm|^2 dV per unit r
  for (std::size_t i = 0; i < radii.size(); ++i) {
    double rm = 0.0, ric = 0.0, dens = 0.0;
    const double count = static_cast<double>(offsets[i + 1] - offsets[i]);
    for (std::size_t n = offsets[i]; n < offsets[i + 1]; ++n) {
      rm += out.samples[n].riemann_norm;
      ric += out.samples[n].ricci_norm;
      dens += out.samples[n].riemann_norm * out.samples[n].riemann_norm * h[n];
    }
    out.mean_riemann.push_back(rm / count);
    out.mean_ricci.push_back(ric / count);
    density.push_back(dens / count * 4.0 * kPi * radii[i] * radii[i] * kTwoPi / (eps * eps * eps));
  }
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
    out.tail_contributions.push_back(0.5 * (density[i] + density[i + 1]) * (radii[i + 1] - radii[i]));
  }
  out.tail_decreasing = true;
  for (std::size_t i = 1; i < out.tail_contributions.size(); ++i) {
    if (!(out.tail_contributions[i] < out.tail_contributions[i - 1])) out.tail_decreasing = false;
  }

  out.flat = std::all_of(out.samples.begin(), out.samples.end(),
                         [&](const CurvatureSample& s) { return s.riemann_norm <= opts.flat_tolerance; });
  if (!out.flat) {
    const LogLogFit fit = loglog_fit(out.radii, out.mean_riemann);
    out.q = -fit.slope;
    out.r_squared = fit.r_squared;
  }
  return out;
}

}  // namespace alf
