#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "alf/ansatz.hpp"

namespace alf {

enum class Topology { sphere };

/// Self-intersection of the bolt sphere in the glued space. Metadata only;
/// nothing here computes intersection numbers.
inline constexpr int kBoltSelfIntersection = -4;
/// Self-intersection of a segment sphere between adjacent positive centers.
inline constexpr int kSegmentSelfIntersection = -2;

/// Grid over [0, 1] x S^1 in the OUTER chart: row i sits at u = i / nu
/// (inclusive ends), column j at v = 2 pi j / nv (periodic, no duplicate
/// seam column). Rows 0 and nu are collapsed poles: every node of such a row
/// has the same base point. Pole rows may sit on a singular point; only
/// cell centers are ever evaluated.
class ParamSurface {
 public:
  ParamSurface(int nu, int nv, std::vector<ChartPoint> nodes, std::optional<int> homology_note = {});

  int nu() const { return nu_; }
  int nv() const { return nv_; }
  Topology topology() const { return Topology::sphere; }
  const std::optional<int>& homology_note() const { return homology_note_; }

  const ChartPoint& node(int i, int j) const { return nodes_[i * nv_ + ((j % nv_) + nv_) % nv_]; }
  const std::vector<ChartPoint>& nodes() const { return nodes_; }
  int cell_count() const { return nu_ * nv_; }
  /// Midpoint weight du dv; weights sum to 2 pi.
  double cell_weight() const;

  /// Same image with v reversed.
  ParamSurface reversed() const;

 private:
  int nu_;
  int nv_;
  std::vector<ChartPoint> nodes_;
  std::optional<int> homology_note_;
};

nlohmann::json surface_to_json(const ParamSurface& s);
ParamSurface surface_from_json(const nlohmann::json& doc);

/// Midpoint of a cell with its coordinate tangents (d/du, d/dv).
struct CellFrame {
  ChartPoint center;
  Vec4 tu;
  Vec4 tv;
};

CellFrame cell_frame(const ParamSurface& s, int i, int j);

/// Preimage of the segment [a, b] under the fibration: u runs along the
/// segment, v along the fiber. a and b must be singular points.
ParamSurface segment_sphere(const MonopoleConfig& config, const Vec3& a, const Vec3& b, int nu, int nv);

/// Coordinate sphere |x - center| = radius in the base slice t = fiber.
/// `warp` in (-1, 1) reparametrizes the polar angle without moving the image.
ParamSurface round_sphere(const Vec3& center, double radius, double fiber, int nu, int nv, double warp = 0.0);

/// Displaces every node of a segment sphere by amplitude sin^4(pi u) along
/// `normal` in the base (perpendicular to b - a).
ParamSurface bump_segment_sphere(const MonopoleConfig& config, const Vec3& a, const Vec3& b, int nu, int nv,
                                 const Vec3& normal, double amplitude);

/// Cell centers are evaluated with the clearance reduced to 1e-9: surfaces
/// through singular points necessarily enter their clearance balls.
double area(const ParamSurface& s, const MonopoleConfig& config, int threads = 1);
Vec3 flux(const ParamSurface& s, const MonopoleConfig& config, int threads = 1);

struct CalibrationResult {
  double area;
  Vec3 flux;
  double flux_norm;
  double defect;  // area - |flux|
};

/// Area minus the largest Kaehler flux over the sphere of complex structures.
CalibrationResult calibration_defect(const ParamSurface& s, const MonopoleConfig& config, int threads = 1);

using SurfaceBuilder = std::function<ParamSurface(int nu, int nv)>;

struct RefinementLevel {
  int level;
  int nu;
  int nv;
  CalibrationResult result;
};

struct RefinementStudy {
  std::vector<RefinementLevel> levels;
  double extrapolated_area;    // Romberg on h^2, h^4, ...
  double extrapolated_defect;
  std::vector<double> area_ratios;  // successive difference ratios, about 4 for the midpoint rule
};

/// Levels 0..max_level at resolution (nu0, nv0) * 2^level.
RefinementStudy refinement_study(const SurfaceBuilder& build, const MonopoleConfig& config, int nu0, int nv0,
                                 int max_level, int threads = 1);

struct DescentOptions {
  bool enabled = false;  // experimental
  int iterations = 10;
  double step = 1e-3;
  double fd_step = 1e-6;
};

struct DescentResult {
  ParamSurface surface;
  std::vector<double> areas;
};

/// Experimental: node-wise gradient descent on area with fixed topology;
/// pole rows stay fixed. Throws ConfigError unless opts.enabled.
DescentResult area_descent(const ParamSurface& s, const MonopoleConfig& config, const DescentOptions& opts);

}  // namespace alf
