#pragma once

#include <cstdint>
#include <vector>

#include "alf/ansatz.hpp"
#include "alf/forms.hpp"
#include "alf/quadrature.hpp"

namespace alf {

/// Neck geometry in OUTER coordinates: eps/delta < ell0 < ell1 < delta, with
/// the cutoff falling from 1 at |x| = ell0 to 0 at |x| = ell1.
struct NeckSpec {
  double epsilon;
  double delta;
  double ell0;
  double ell1;

  double inner_radius() const { return epsilon / delta; }
  double outer_radius() const { return delta; }
  bool in_transition(double r) const { return r > ell0 && r < ell1; }
  /// Throws FrameError when the transition annulus leaves the neck.
  void validate() const;
};

enum class NeckScheme {
  // Transition at fixed center-chart radii |x'| in [inner, outer] / delta.
  center_anchored,
  // Transition centered at sqrt(eps) with log-width log(1/delta).
  geometric_mean,
};

struct NeckPolicy {
  NeckScheme scheme = NeckScheme::center_anchored;
  double inner = 1.2;
  double outer = 1.8;

  NeckSpec at(double epsilon, double delta) const;
};

Vec3 kappa(const Vec3& x, double epsilon);
Vec3 kappa_inverse(const Vec3& x_prime, double epsilon);

/// Quintic smoothstep in log|x|: 1 for |x| <= ell0, 0 for |x| >= ell1, C^2.
double cutoff(const Vec3& x, const NeckSpec& spec);
Vec3 cutoff_gradient(const Vec3& x, const NeckSpec& spec);

enum class PatchMode {
  // chi * omega_center + (1 - chi) * omega_outer.
  convex,
  // omega_outer + d(chi beta), with d beta = omega_center - omega_outer on the
  // neck ball; beta from the radial homotopy operator. Closed by construction.
  closed,
};

/// The two models on the overlap, expressed in the OUTER coframe (dx, dt).
///
/// The CENTER triple is pulled back through x' = x/eps. Its fiber coordinate
/// is identified with the OUTER one up to a quadratic gauge shift
/// t' = t + phi(x), chosen so that the connections agree to second order at
/// the origin. Without the shift the two Dirac gauges differ by an O(1) exact
/// form coming from the strings of the pair charges.
class NeckGluing {
 public:
  NeckGluing(const MonopoleConfig& config, const NeckSpec& spec,
             PatchMode mode = PatchMode::convex);

  const MonopoleConfig& config() const { return config_; }
  const NeckSpec& spec() const { return spec_; }
  PatchMode mode() const { return mode_; }

  CoTriple outer_triple(const Vec3& x) const;
  CoTriple center_triple(const Vec3& x) const;
  /// Equals outer_triple for |x| >= ell1 and center_triple for |x| <= ell0.
  CoTriple patched_triple(const ChartPoint& p) const;

  /// Connection mismatch (alpha_center - alpha_outer).dx, smooth near 0.
  Vec3 connection_mismatch(const Vec3& x) const;
  /// h'(x/eps) - h(x), evaluated without cancellation.
  double potential_mismatch(const Vec3& x) const;
  /// Base 2-forms omega_center,i - omega_outer,i.
  CoTriple triple_mismatch(const Vec3& x) const;
  /// Radial homotopy primitive: d beta_i = triple_mismatch_i on |x| < delta.
  std::array<Vec4, 3> mismatch_primitive(const Vec3& x) const;

  double fiber_shift(const Vec3& x) const;

 private:
  Vec3 pair_potential(const Vec3& x) const;
  void require_neck_point(const Vec3& x, double chi) const;

  MonopoleConfig config_;
  NeckSpec spec_;
  PatchMode mode_;
  Vec3 shift_linear_;
  Mat3 shift_quadratic_;
  QuadratureRule homotopy_rule_;
};

struct ErrorSample {
  ChartPoint point;
  double radius;
  double q_defect;
  double closedness_defect;
  double epsilon;
};

struct ErrorOptions {
  double relative_step = 1e-3;  // FD step as a fraction of the distance to the nearest singularity
  bool richardson = true;
};

/// Q-defect (|Q|_F / mu) and max_i of the orthonormal-frame norm of d omega_i
/// for the patched triple at p.
ErrorSample error_field(const NeckGluing& gluing, const ChartPoint& p, const ErrorOptions& opts = {});
ErrorSample error_field(const MonopoleConfig& config, const NeckSpec& spec, const ChartPoint& p,
                        PatchMode mode = PatchMode::convex, const ErrorOptions& opts = {});

struct ScalingFit {
  std::vector<double> epsilons;
  std::vector<double> sup_defects;
  double slope;
  double intercept;
  double r_squared;
};

/// Log-log fit of sup defect against epsilon. Throws FitError when fewer than
/// 4 values are given, epsilons are not strictly decreasing, every defect is
/// below `underflow`, or r^2 < 0.9.
ScalingFit fit_scaling(const std::vector<double>& epsilons, const std::vector<double>& sup_defects,
                       double underflow = 1e-12);

struct ScalingOptions {
  NeckPolicy neck;
  PatchMode mode = PatchMode::convex;
  std::uint64_t seed = 7;
  int radial_count = 6;
  int angular_count = 24;
  // Samples closer than this angle to the string of the center charge are skipped.
  double string_guard = 0.25;
  ErrorOptions error;
  int threads = 1;
};

struct ScalingStudy {
  std::vector<double> epsilons;
  std::vector<double> sup_q_defect;
  std::vector<double> sup_closedness;
  std::vector<ErrorSample> samples;  // grouped by epsilon, in sample order

  ScalingFit fit_q_defect(double underflow = 1e-12) const;
  ScalingFit fit_closedness(double underflow = 1e-12) const;
};

/// Neck sample directions and radii in units of the transition annulus, so
/// every epsilon sees the same points in the scaled chart.
std::vector<ChartPoint> neck_samples(const NeckGluing& gluing, const ScalingOptions& opts);

ScalingStudy scaling_study(const MonopoleConfig& config_template, const std::vector<double>& epsilons,
                           const ScalingOptions& opts = {});

}  // namespace alf
