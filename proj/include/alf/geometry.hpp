#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "alf/ansatz.hpp"
#include "alf/forms.hpp"

namespace alf {

using MetricField = std::function<Mat4(const Vec4&)>;

/// Gamma^a_bc, stored with the upper index first.
struct Christoffel {
  std::array<double, 64> v{};

  double operator()(int a, int b, int c) const { return v[16 * a + 4 * b + c]; }
  double& operator()(int a, int b, int c) { return v[16 * a + 4 * b + c]; }

  friend Christoffel operator+(Christoffel x, const Christoffel& y);
  friend Christoffel operator-(Christoffel x, const Christoffel& y);
  friend Christoffel operator*(double s, Christoffel x);
  friend Christoffel operator/(Christoffel x, double s);
};

/// R^a_bcd with R(X, Y)Z = [nabla_X, nabla_Y] Z - nabla_[X,Y] Z.
struct Riemann {
  std::array<double, 256> v{};

  double operator()(int a, int b, int c, int d) const { return v[64 * a + 16 * b + 4 * c + d]; }
  double& operator()(int a, int b, int c, int d) { return v[64 * a + 16 * b + 4 * c + d]; }
};

/// Christoffel symbols from central differences of the metric.
Christoffel christoffel(const MetricField& metric, const Vec4& x, const FdStep& step);

/// Riemann tensor from central differences of the Christoffel symbols.
Riemann riemann(const MetricField& metric, const Vec4& x, const FdStep& step);

struct CurvatureInvariants {
  double riemann_norm;  // sqrt(R_abcd R^abcd)
  double ricci_norm;    // sqrt(Ric_ab Ric^ab)
  // max |R^a_[bcd]| relative to max |R^a_bcd|.
  double bianchi_residual;
};

CurvatureInvariants curvature_invariants(const Riemann& R, const Mat4& metric);

struct CurvatureSample {
  ChartPoint point;
  double riemann_norm;
  double ricci_norm;
  double step;
  double bianchi_residual;
};

struct CurvatureOptions {
  double relative_step = 1e-3;  // fraction of the distance to the nearest singularity
  bool richardson = true;
};

/// Gibbons-Hawking metric as a field on the OUTER chart, in a fixed gauge.
MetricField gh_metric_field(const MonopoleConfig& config, const GaugeChart& chart);

/// Curvature of the Gibbons-Hawking metric at p. The gauge is rotated so no
/// Dirac string comes near the stencil. Requires distance to the singular
/// set >= 10 step.
CurvatureSample ricci_norm(const MonopoleConfig& config, const ChartPoint& p, const FdStep& step);
CurvatureSample ricci_norm(const MonopoleConfig& config, const ChartPoint& p,
                           const CurvatureOptions& opts = {});

struct VolumeGrowth {
  std::vector<double> radii;
  std::vector<double> volumes;
  double exponent;
  double intercept;
  double r_squared;
};

/// Volume of {|x| < R} times the fiber circle, with volume element
/// 2 pi h / eps^3. Green's identity against |x|^2/6 turns it into a sphere
/// integral of h R/3 - (R^2/6) dh/dr plus the point-charge terms, so the
/// quadrature never meets a singularity. `order` Gauss-Legendre nodes in
/// cos(theta), 2*order in phi.
double ball_volume(const MonopoleConfig& config, double R, int order = 48);

/// Log-log fit of ball_volume over increasing radii beyond every singularity.
VolumeGrowth volume_growth(const MonopoleConfig& config, const std::vector<double>& radii, int order = 48);

struct DecayOptions {
  int angular_count = 12;
  std::uint64_t seed = 11;
  double flat_tolerance = 1e-9;
  CurvatureOptions curvature;
  int threads = 1;
};

struct CurvatureDecay {
  std::vector<double> radii;
  std::vector<double> mean_riemann;
  std::vector<double> mean_ricci;
  std::vector<CurvatureSample> samples;  // grouped by radius
  bool flat = false;                     // every |Rm| below flat_tolerance; no fit
  double q = 0.0;                        // |Rm| ~ r^-q
  double r_squared = 0.0;
  // Integral of |Rm|^2 dV over consecutive annuli (trapezoid in r).
  std::vector<double> tail_contributions;
  bool tail_decreasing = false;
};

CurvatureDecay curvature_decay(const MonopoleConfig& config, const std::vector<double>& radii,
                               const DecayOptions& opts = {});

}  // namespace alf
