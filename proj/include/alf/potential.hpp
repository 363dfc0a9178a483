#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alf/types.hpp"

namespace alf {

/// Dirac-string gauge used for every monopole summand: the string of a
/// center c is the ray c + s * string_direction, s >= 0.
struct GaugeChart {
  Vec3 string_direction = -Vec3::UnitZ();
  double cone_halfangle = 1e-2;

  void validate() const;
  /// True when x lies inside the excluded cone around the string through center.
  bool excludes(const Vec3& center, const Vec3& x) const;
};

/// A singular point of the harmonic function together with its charge.
struct Center {
  Vec3 position;
  double charge;
};

/// Parameters of h_eps and of the glued center model.
///
/// Construct through create(); an existing MonopoleConfig always satisfies
/// its invariants. The singular set is {0} together with every +-p_v. Only
/// centers with nonzero charge count as singular, so a config with zero
/// center charge has no exclusion ball at the origin.
class MonopoleConfig {
 public:
  struct Params {
    double epsilon = 0.05;
    double delta = 0.3;
    std::vector<Vec3> points;
    std::optional<double> center_charge;  // default -epsilon
    std::optional<double> pair_charge;    // default epsilon / 2
    GaugeChart gauge;
    // strict: epsilon in (0, delta^2) and delta in (0, 1/2). Non-strict
    // configs only need epsilon >= 0 and delta > 0 (flat data, limits).
    bool strict = true;
    // Exclusion radius around singular centers; default max(2 eps, 1e-3).
    std::optional<double> clearance;
  };

  static MonopoleConfig create(Params params);

  double epsilon() const { return params_.epsilon; }
  double delta() const { return params_.delta; }
  const std::vector<Vec3>& points() const { return params_.points; }
  std::size_t k() const { return params_.points.size(); }
  double center_charge() const;
  double pair_charge() const;
  bool default_charges() const;
  const GaugeChart& gauge() const { return params_.gauge; }
  bool strict() const { return params_.strict; }
  const Params& params() const { return params_; }

  /// Singular centers (nonzero charge), origin first, then p_1, -p_1, p_2, ...
  const std::vector<Center>& centers() const { return centers_; }
  /// Every center including zero-charge ones, same ordering.
  std::vector<Center> all_centers() const;

  /// Exclusion radius around each singular center, max(2 eps, 1e-3) unless overridden.
  double clearance() const;
  double distance_to_singularity(const Vec3& x) const;
  bool admissible(const Vec3& x) const;
  void require_admissible(const Vec3& x) const;
  /// Throws ConfigError when epsilon == 0 (operations that divide by epsilon).
  void require_positive_epsilon() const;

  /// Same geometry at a different epsilon; unspecified charges rescale.
  MonopoleConfig with_epsilon(double epsilon) const;
  MonopoleConfig with_gauge(const GaugeChart& chart) const;
  MonopoleConfig with_clearance(double clearance) const;

 private:
  explicit MonopoleConfig(Params params);

  Params params_;
  std::vector<Center> centers_;
};

nlohmann::json config_to_json(const MonopoleConfig& config);
/// Reads {epsilon, delta, points, center_charge?, pair_charge?, gauge?, strict?, clearance?}.
MonopoleConfig config_from_json(const nlohmann::json& doc);

double eval_h(const MonopoleConfig& config, const Vec3& x);
Vec3 grad_h(const MonopoleConfig& config, const Vec3& x);

/// h'_eps = 1 - 1/|x'| + sum_v eps/|p_v| on |x'| > 1/delta.
double eval_h_center(const MonopoleConfig& config, const Vec3& x_prime);

/// Axially symmetric Dirac potential with dA = *_flat d(charge/|x - center|).
Vec3 monopole_potential(double charge, const Vec3& center, const GaugeChart& chart,
                        const Vec3& x);

/// Jacobian J(i, j) = d A_i / d x_j of monopole_potential.
Mat3 monopole_potential_jacobian(double charge, const Vec3& center, const GaugeChart& chart,
                                 const Vec3& x);

/// Base part of alpha = dt + A_total, with dA_total = (1/eps) *_flat dh_eps.
Vec3 total_connection(const MonopoleConfig& config, const GaugeChart& chart, const Vec3& x);
Vec3 total_connection(const MonopoleConfig& config, const Vec3& x);

/// Coefficient m of the far-field expansion h = 1 + m/|x| + O(|x|^-3).
double asymptotic_mass(const MonopoleConfig& config);

struct MassFit {
  double mass;       // fitted intercept of (h - 1)|x| against |x|^-2
  double expected;   // asymptotic_mass(config)
  double curvature;  // fitted |x|^-2 coefficient
  int samples;
};

/// Least-squares fit of (h(x) - 1)|x| = m + c/|x|^2 on log-spaced radii
/// along a fixed set of directions.
MassFit fit_asymptotic_mass(const MonopoleConfig& config, double r_min = 1e2,
                            double r_max = 1e4, int radial_count = 24);

/// A chart whose strings point as far as possible from x as seen from every
/// singular center. Used where only gauge-invariant output is needed.
GaugeChart gauge_avoiding(const MonopoleConfig& config, const Vec3& x,
                          double cone_halfangle = 1e-2);

}  // namespace alf
