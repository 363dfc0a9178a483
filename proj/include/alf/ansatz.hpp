#pragma once

#include "alf/forms.hpp"
#include "alf/potential.hpp"

namespace alf {

/// OUTER: x-coordinates of the multi-Taub-NUT chart, |x| > 2 eps.
/// CENTER: x'-coordinates of the center model, |x'| > 1/delta.
enum class Frame { outer, center };

struct ChartPoint {
  Vec3 base = Vec3::Zero();
  double fiber = 0.0;  // [0, 2 pi)
  Frame frame = Frame::outer;

  Vec4 coords() const { return {base[0], base[1], base[2], fiber}; }
};

double wrap_angle(double t);

/// Gibbons-Hawking data in the coframe (dx, dt): metric
/// h s^2 |dx|^2 + h^-1 (dt + A.dx)^2 and triple dx_i ^ alpha s + h s^2 dx_j ^ dx_k,
/// with s the inverse base scale (1/eps outer, 1 center).
Mat4 gibbons_hawking_metric(double h, const Vec3& A, double s);
CoTriple gibbons_hawking_triple(double h, const Vec3& A, double s);

Mat4 gh_metric(const MonopoleConfig& config, const ChartPoint& p, const GaugeChart& chart);
Mat4 gh_metric(const MonopoleConfig& config, const ChartPoint& p);
CoTriple gh_triple(const MonopoleConfig& config, const ChartPoint& p, const GaugeChart& chart);
CoTriple gh_triple(const MonopoleConfig& config, const ChartPoint& p);

/// Connection of the center model: unit negative monopole at the origin.
Vec3 center_connection(const GaugeChart& chart, const Vec3& x_prime);

Mat4 ah_model_metric(const MonopoleConfig& config, const ChartPoint& p, const GaugeChart& chart);
Mat4 ah_model_metric(const MonopoleConfig& config, const ChartPoint& p);
CoTriple ah_model_triple(const MonopoleConfig& config, const ChartPoint& p, const GaugeChart& chart);
CoTriple ah_model_triple(const MonopoleConfig& config, const ChartPoint& p);

/// Lift of x -> -x: base negated, fiber angle t -> -t (mod 2 pi).
ChartPoint involution_pullback(const ChartPoint& p);

/// Length of the fiber circle over p, 2 pi h^{-1/2}.
double fiber_length(const MonopoleConfig& config, const ChartPoint& p);

}  // namespace alf
