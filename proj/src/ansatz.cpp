#include "alf/ansatz.hpp"

#include <cmath>

#include <fmt/format.h>

#include "alf/errors.hpp"

namespace alf {

double wrap_angle(double t) {
  double w = std::fmod(t, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

Mat4 gibbons_hawking_metric(double h, const Vec3& A, double s) {
  const Vec4 alpha(A[0], A[1], A[2], 1.0);
  Mat4 g = alpha * alpha.transpose() / h;
  for (int i = 0; i < 3; ++i) g(i, i) += h * s * s;
  return g;
}

CoTriple gibbons_hawking_triple(double h, const Vec3& A, double s) {
  const Vec4 alpha(A[0], A[1], A[2], 1.0);
  CoTriple t;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    TwoForm w = TwoForm::Zero();
    // dx_i ^ alpha
    for (int b = 0; b < 4; ++b) {
      if (b == i) continue;
      w(i, b) += s * alpha[b];
      w(b, i) -= s * alpha[b];
    }
    w(j, k) += h * s * s;
    w(k, j) -= h * s * s;
    t.omega[i] = w;
  }
  return t;
}

namespace {

void require_frame(const ChartPoint& p, Frame expected) {
  if (p.frame != expected) {
    throw DomainError(expected == Frame::outer ? "expected an OUTER chart point"
                                               : "expected a CENTER chart point");
  }
}

double positive_h(double h) {
  if (!(h > 0.0)) throw PositivityError(fmt::format("harmonic function h = {} is not positive", h));
  return h;
}

}  // namespace

Mat4 gh_metric(const MonopoleConfig& config, const ChartPoint& p, const GaugeChart& chart) {
  require_frame(p, Frame::outer);
  const double h = positive_h(eval_h(config, p.base));
  return gibbons_hawking_metric(h, total_connection(config, chart, p.base), 1.0 / config.epsilon());
}

Mat4 gh_metric(const MonopoleConfig& config, const ChartPoint& p) {
  return gh_metric(config, p, config.gauge());
}

CoTriple gh_triple(const MonopoleConfig& config, const ChartPoint& p, const GaugeChart& chart) {
  require_frame(p, Frame::outer);
  const double h = positive_h(eval_h(config, p.base));
  return gibbons_hawking_triple(h, total_connection(config, chart, p.base), 1.0 / config.epsilon());
}

CoTriple gh_triple(const MonopoleConfig& config, const ChartPoint& p) {
  return gh_triple(config, p, config.gauge());
}

Vec3 center_connection(const GaugeChart& chart, const Vec3& x_prime) {
  return monopole_potential(-1.0, Vec3::Zero(), chart, x_prime);
}

Mat4 ah_model_metric(const MonopoleConfig& config, const ChartPoint& p, const GaugeChart& chart) {
  require_frame(p, Frame::center);
  const double h = positive_h(eval_h_center(config, p.base));
  return gibbons_hawking_metric(h, center_connection(chart, p.base), 1.0);
}

Mat4 ah_model_metric(const MonopoleConfig& config, const ChartPoint& p) {
  return ah_model_metric(config, p, config.gauge());
}

CoTriple ah_model_triple(const MonopoleConfig& config, const ChartPoint& p, const GaugeChart& chart) {
  require_frame(p, Frame::center);
  const double h = positive_h(eval_h_center(config, p.base));
  return gibbons_hawking_triple(h, center_connection(chart, p.base), 1.0);
}

CoTriple ah_model_triple(const MonopoleConfig& config, const ChartPoint& p) {
  return ah_model_triple(config, p, config.gauge());
}

ChartPoint involution_pullback(const ChartPoint& p) {
  if (!p.base.allFinite() || !std::isfinite(p.fiber)) throw DomainError("non-finite chart point");
  return {-p.base, wrap_angle(-p.fiber), p.frame};
}

double fiber_length(const MonopoleConfig& config, const ChartPoint& p) {
  const double h = positive_h(p.frame == Frame::outer ? eval_h(config, p.base)
                                                      : eval_h_center(config, p.base));
  return kTwoPi / std::sqrt(h);
}

}  // namespace alf
