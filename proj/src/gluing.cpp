#include "alf/gluing.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "alf/errors.hpp"
#include "alf/report.hpp"

namespace alf {

void NeckSpec::validate() const {
  if (!(epsilon > 0.0) || !(delta > 0.0)) throw FrameError("neck needs epsilon > 0 and delta > 0");
  if (!(inner_radius() < ell0 && ell0 < ell1 && ell1 < outer_radius())) {
    throw FrameError(fmt::format("transition [{}, {}] not inside the neck ({}, {})", ell0, ell1,
                                 inner_radius(), outer_radius()));
  }
}

NeckSpec NeckPolicy::at(double epsilon, double delta) const {
  NeckSpec spec{epsilon, delta, 0.0, 0.0};
  switch (scheme) {
    case NeckScheme::center_anchored:
      spec.ell0 = epsilon * inner / delta;
      spec.ell1 = epsilon * outer / delta;
      break;
    case NeckScheme::geometric_mean:
      spec.ell0 = std::sqrt(epsilon * delta);
      spec.ell1 = std::sqrt(epsilon / delta);
      break;
  }
  spec.validate();
  return spec;
}

Vec3 kappa(const Vec3& x, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("kappa needs epsilon > 0");
  return x / epsilon;
}

Vec3 kappa_inverse(const Vec3& x_prime, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("kappa_inverse needs epsilon > 0");
  return x_prime * epsilon;
}

namespace {

// Position in the transition, in [0, 1] on log|x|.
double transition_coordinate(double r, const NeckSpec& spec) {
  return std::log(r / spec.ell0) / std::log(spec.ell1 / spec.ell0);
}

}  // namespace

double cutoff(const Vec3& x, const NeckSpec& spec) {
  const double r = x.norm();
  if (r <= spec.ell0) return 1.0;
  if (r >= spec.ell1) return 0.0;
  const double s = transition_coordinate(r, spec);
  return 1.0 - s * s * s * (10.0 + s * (6.0 * s - 15.0));
}

Vec3 cutoff_gradient(const Vec3& x, const NeckSpec& spec) {
  const double r = x.norm();
  if (r <= spec.ell0 || r >= spec.ell1) return Vec3::Zero();
  const double s = transition_coordinate(r, spec);
  const double dchi_dr = -30.0 * s * s * (1.0 - s) * (1.0 - s) / (r * std::log(spec.ell1 / spec.ell0));
  return dchi_dr * x / r;
}

NeckGluing::NeckGluing(const MonopoleConfig& config, const NeckSpec& spec, PatchMode mode)
    : config_(config), spec_(spec), mode_(mode), homotopy_rule_(gauss_legendre(24)) {
  config_.require_positive_epsilon();
  spec_.validate();
  if (std::abs(spec_.epsilon - config_.epsilon()) > 1e-15 * config_.epsilon() ||
      std::abs(spec_.delta - config_.delta()) > 1e-15 * config_.delta()) {
    throw ConfigError("neck spec and config disagree on epsilon or delta");
  }
  const double eps = config_.epsilon();
  if (std::abs(config_.center_charge() + eps) > 1e-12 * eps) {
    throw ConfigError("the center model needs center charge -epsilon");
  }
  // Gauge shift phi(x) = b.x + x^T S x / 2 with grad phi = A_pair to first order at 0.
  shift_linear_ = pair_potential(Vec3::Zero());
  Mat3 J = Mat3::Zero();
  const double q = config_.pair_charge();
  for (const Vec3& p : config_.points()) {
    J += monopole_potential_jacobian(q, p, config_.gauge(), Vec3::Zero());
    J += monopole_potential_jacobian(q, -p, config_.gauge(), Vec3::Zero());
  }
  J /= eps;
  shift_quadratic_ = 0.5 * (J + J.transpose());
}

Vec3 NeckGluing::pair_potential(const Vec3& x) const {
  Vec3 a = Vec3::Zero();
  const double q = config_.pair_charge();
  for (const Vec3& p : config_.points()) {
    a += monopole_potential(q, p, config_.gauge(), x);
    a += monopole_potential(q, -p, config_.gauge(), x);
  }
  return a / config_.epsilon();
}

double NeckGluing::fiber_shift(const Vec3& x) const {
  return shift_linear_.dot(x) + 0.5 * x.dot(shift_quadratic_ * x);
}

CoTriple NeckGluing::outer_triple(const Vec3& x) const {
  ChartPoint p;
  p.base = x;
  return gh_triple(config_, p);
}

CoTriple NeckGluing::center_triple(const Vec3& x) const {
  const double eps = config_.epsilon();
  const Vec3 xp = kappa(x, eps);
  const double h = eval_h_center(config_, xp);
  if (!(h > 0.0)) throw PositivityError(fmt::format("center potential h' = {} is not positive", h));
  // alpha' = dt' + A'.dx' with t' = t + phi and dx' = dx / eps.
  const Vec3 A = center_connection(config_.gauge(), xp) / eps + shift_linear_ + shift_quadratic_ * x;
  return gibbons_hawking_triple(h, A, 1.0 / eps);
}

Vec3 NeckGluing::connection_mismatch(const Vec3& x) const {
  return shift_linear_ + shift_quadratic_ * x - pair_potential(x);
}

double NeckGluing::potential_mismatch(const Vec3& x) const {
  const double q = config_.pair_charge();
  double d = 0.0;
  for (const Vec3& p : config_.points()) {
    d += config_.epsilon() / p.norm() - q * (1.0 / (x - p).norm() + 1.0 / (x + p).norm());
  }
  return d;
}

namespace {

// Base part of a Gibbons-Hawking triple: dx_i ^ A s + h s^2 dx_j ^ dx_k.
CoTriple base_triple(double h, const Vec3& A, double s) {
  CoTriple t;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    TwoForm w = TwoForm::Zero();
    for (int b = 0; b < 3; ++b) {
      if (b == i) continue;
      w(i, b) += s * A[b];
      w(b, i) -= s * A[b];
    }
    w(j, k) += h * s * s;
    w(k, j) -= h * s * s;
    t.omega[i] = w;
  }
  return t;
}

TwoForm wedge_1_1(const Vec4& a, const Vec4& b) {
  return a * b.transpose() - b * a.transpose();
}

}  // namespace

CoTriple NeckGluing::triple_mismatch(const Vec3& x) const {
  return base_triple(potential_mismatch(x), connection_mismatch(x), 1.0 / config_.epsilon());
}

std::array<Vec4, 3> NeckGluing::mismatch_primitive(const Vec3& x) const {
  std::array<Vec4, 3> beta{Vec4::Zero(), Vec4::Zero(), Vec4::Zero()};
  const Vec4 x4(x[0], x[1], x[2], 0.0);
  for (std::size_t n = 0; n < homotopy_rule_.nodes.size(); ++n) {
    const double s = homotopy_rule_.nodes[n];
    const double w = homotopy_rule_.weights[n] * s;
    const CoTriple F = triple_mismatch(s * x);
    for (int i = 0; i < 3; ++i) beta[i] += w * (F.omega[i].transpose() * x4);
  }
  return beta;
}

void NeckGluing::require_neck_point(const Vec3& x, double chi) const {
  const double r = x.norm();
  if (chi > 0.0 && chi < 1.0 && !(r > spec_.inner_radius() && r < spec_.outer_radius())) {
    throw FrameError(fmt::format("transition point |x| = {} outside the neck", r));
  }
}

CoTriple NeckGluing::patched_triple(const ChartPoint& p) const {
  if (p.frame != Frame::outer) throw DomainError("patched_triple expects an OUTER chart point");
  config_.require_admissible(p.base);
  const double chi = cutoff(p.base, spec_);
  if (chi == 0.0) return outer_triple(p.base);
  if (chi == 1.0) return center_triple(p.base);
  require_neck_point(p.base, chi);
  const CoTriple outer = outer_triple(p.base);
  if (mode_ == PatchMode::convex) return center_triple(p.base) * chi + outer * (1.0 - chi);

  const CoTriple F = triple_mismatch(p.base);
  const Vec3 g = cutoff_gradient(p.base, spec_);
  const Vec4 dchi(g[0], g[1], g[2], 0.0);
  const auto beta = mismatch_primitive(p.base);
  CoTriple out;
  for (int i = 0; i < 3; ++i) out.omega[i] = outer.omega[i] + chi * F.omega[i] + wedge_1_1(dchi, beta[i]);
  return out;
}

ErrorSample error_field(const NeckGluing& gluing, const ChartPoint& p, const ErrorOptions& opts) {
  const CoTriple t = gluing.patched_triple(p);
  ErrorSample out;
  out.point = p;
  out.radius = p.base.norm();
  out.epsilon = gluing.config().epsilon();
  out.q_defect = q_defect(t);

  // Defect triples are not hyperKaehler; the recovered metric is only a frame.
  const Mat4 g = metric_from_triple(t, RecoveryTolerance{1e-1, 1e-1});
  const FdStep step{opts.relative_step * gluing.config().distance_to_singularity(p.base), opts.richardson};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    auto field = [&](const Vec4& y) -> TwoForm {
      ChartPoint q;
      q.base = y.head<3>();
      q.fiber = y[3];
      return gluing.patched_triple(q).omega[i];
    };
    worst = std::max(worst, frame_norm(exterior_derivative(field, p.coords(), step), g));
  }
  out.closedness_defect = worst;
  return out;
}

ErrorSample error_field(const MonopoleConfig& config, const NeckSpec& spec, const ChartPoint& p,
                        PatchMode mode, const ErrorOptions& opts) {
  return error_field(NeckGluing(config, spec, mode), p, opts);
}

ScalingFit fit_scaling(const std::vector<double>& epsilons, const std::vector<double>& sup_defects,
                       double underflow) {
  if (epsilons.size() != sup_defects.size()) throw FitError("epsilons and defects differ in length");
  if (epsilons.size() < 4) throw FitError("scaling fit needs at least 4 epsilon values");
  for (std::size_t i = 1; i < epsilons.size(); ++i) {
    if (!(epsilons[i] < epsilons[i - 1])) throw FitError("epsilons must be strictly decreasing");
  }
  if (std::all_of(sup_defects.begin(), sup_defects.end(), [&](double d) { return d < underflow; })) {
    throw FitError(fmt::format("all defects below the underflow floor {}", underflow));
  }
  const LogLogFit fit = loglog_fit(epsilons, sup_defects);
  if (fit.r_squared < 0.9) throw FitError(fmt::format("scaling fit r^2 = {} below 0.9", fit.r_squared));
  return {epsilons, sup_defects, fit.slope, fit.intercept, fit.r_squared};
}

ScalingFit ScalingStudy::fit_q_defect(double underflow) const {
  return fit_scaling(epsilons, sup_q_defect, underflow);
}

ScalingFit ScalingStudy::fit_closedness(double underflow) const {
  return fit_scaling(epsilons, sup_closedness, underflow);
}

std::vector<ChartPoint> neck_samples(const NeckGluing& gluing, const ScalingOptions& opts) {
  if (opts.radial_count < 1 || opts.angular_count < 1) throw ConfigError("neck sample counts must be >= 1");
  const NeckSpec& spec = gluing.spec();
  const Mat3 rot = counter_rotation(opts.seed, 3, 0);
  const std::vector<Vec3> dirs = fibonacci_sphere(opts.angular_count);
  const Vec3 string = gluing.config().gauge().string_direction;
  std::vector<ChartPoint> out;
  for (int i = 0; i < opts.radial_count; ++i) {
    const double r = spec.ell0 * std::pow(spec.ell1 / spec.ell0, (i + 0.5) / opts.radial_count);
    for (int j = 0; j < opts.angular_count; ++j) {
      const Vec3 d = rot * dirs[j];
      if (std::acos(std::clamp(d.dot(string), -1.0, 1.0)) < opts.string_guard) continue;
      ChartPoint p;
      p.base = r * d;
      p.fiber = kTwoPi * counter_uniform(opts.seed, 4, static_cast<std::uint64_t>(i) * opts.angular_count + j);
      if (gluing.config().admissible(p.base)) out.push_back(p);
    }
  }
  if (out.empty()) throw ConfigError("neck sampling produced no admissible points");
  return out;
}

ScalingStudy scaling_study(const MonopoleConfig& config_template, const std::vector<double>& epsilons,
                           const ScalingOptions& opts) {
  if (epsilons.size() < 4) throw ConfigError("scaling study needs at least 4 epsilon values");
  std::vector<NeckGluing> gluings;
  std::vector<std::vector<ChartPoint>> points;
  std::vector<std::size_t> offsets{0};
  for (double eps : epsilons) {
    const MonopoleConfig cfg = config_template.with_epsilon(eps);
    gluings.emplace_back(cfg, opts.neck.at(eps, cfg.delta()), opts.mode);
    points.push_back(neck_samples(gluings.back(), opts));
    offsets.push_back(offsets.back() + points.back().size());
  }

  ScalingStudy study;
  study.epsilons = epsilons;
  study.samples.resize(offsets.back());
  parallel_for(offsets.back(), opts.threads, [&](std::size_t n) {
    const std::size_t e = std::upper_bound(offsets.begin(), offsets.end(), n) - offsets.begin() - 1;
    study.samples[n] = error_field(gluings[e], points[e][n - offsets[e]], opts.error);
  });
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    double q = 0.0;
    double c = 0.0;
    for (std::size_t n = offsets[e]; n < offsets[e + 1]; ++n) {
      q = std::max(q, study.samples[n].q_defect);
      c = std::max(c, study.samples[n].closedness_defect);
    }
    study.sup_q_defect.push_back(q);
    study.sup_closedness.push_back(c);
  }
  return study;
}

}  // namespace alf
