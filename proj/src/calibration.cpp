#include "alf/calibration.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "alf/errors.hpp"
#include "alf/report.hpp"

namespace alf {

namespace {

// Fiber difference in (-pi, pi]; odd under negation.
double fiber_diff(double d) { return d - kTwoPi * std::round(d / kTwoPi); }

bool same_point(const Vec3& a, const Vec3& b) { return (a - b).norm() <= 1e-12 * (1.0 + a.norm()); }

}  // namespace

ParamSurface::ParamSurface(int nu, int nv, std::vector<ChartPoint> nodes, std::optional<int> homology_note)
    : nu_(nu), nv_(nv), nodes_(std::move(nodes)), homology_note_(homology_note) {
  if (nu_ < 1 || nv_ < 3) throw ShapeError(fmt::format("surface grid {}x{} too small", nu_, nv_));
  if (nodes_.size() != static_cast<std::size_t>((nu_ + 1) * nv_)) {
    throw ShapeError(fmt::format("surface expects {} nodes, got {}", (nu_ + 1) * nv_, nodes_.size()));
  }
  for (const ChartPoint& p : nodes_) {
    if (!p.base.allFinite() || !std::isfinite(p.fiber)) throw ShapeError("surface node is not finite");
    if (p.frame != Frame::outer) throw ShapeError("surface nodes must be OUTER chart points");
  }
  for (int i : {0, nu_}) {
    for (int j = 1; j < nv_; ++j) {
      if (!same_point(node(i, j).base, node(i, 0).base)) {
        throw ShapeError(fmt::format("pole row {} does not collapse to a point", i));
      }
    }
  }
}

double ParamSurface::cell_weight() const { return (1.0 / nu_) * (kTwoPi / nv_); }

ParamSurface ParamSurface::reversed() const {
  std::vector<ChartPoint> out(nodes_.size());
  for (int i = 0; i <= nu_; ++i)
    for (int j = 0; j < nv_; ++j) out[i * nv_ + j] = node(i, nv_ - j);
  return ParamSurface(nu_, nv_, std::move(out), homology_note_);
}

nlohmann::json surface_to_json(const ParamSurface& s) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const ChartPoint& p : s.nodes()) nodes.push_back({p.base[0], p.base[1], p.base[2], p.fiber});
  nlohmann::json doc{{"topology", "SPHERE"}, {"resolution", {s.nu(), s.nv()}}, {"nodes", nodes}};
  doc["homology_note"] = s.homology_note() ? nlohmann::json(*s.homology_note()) : nlohmann::json(nullptr);
  return doc;
}

ParamSurface surface_from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("topology", std::string("SPHERE")) != "SPHERE") throw ConfigError("only SPHERE surfaces");
    const auto& res = doc.at("resolution");
    std::vector<ChartPoint> nodes;
    for (const auto& n : doc.at("nodes")) {
      if (n.size() != 4) throw ConfigError("surface node must be [x, y, z, t]");
      ChartPoint p;
      p.base = {n[0].get<double>(), n[1].get<double>(), n[2].get<double>()};
      p.fiber = n[3].get<double>();
      nodes.push_back(p);
    }
    std::optional<int> note;
    if (doc.contains("homology_note") && !doc.at("homology_note").is_null()) {
      note = doc.at("homology_note").get<int>();
    }
    return ParamSurface(res.at(0).get<int>(), res.at(1).get<int>(), std::move(nodes), note);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed surface document: {}", e.what()));
  } catch (const ShapeError& e) {
    throw ConfigError(e.what());
  }
}

CellFrame cell_frame(const ParamSurface& s, int i, int j) {
  const ChartPoint& p00 = s.node(i, j);
  const ChartPoint& p01 = s.node(i, j + 1);
  const ChartPoint& p10 = s.node(i + 1, j);
  const ChartPoint& p11 = s.node(i + 1, j + 1);
  const double du = 1.0 / s.nu();
  const double dv = kTwoPi / s.nv();
  CellFrame f;
  f.center.base = 0.25 * ((p00.base + p01.base) + (p10.base + p11.base));
  f.center.fiber = wrap_angle(p00.fiber + 0.25 * (fiber_diff(p01.fiber - p00.fiber) +
                                                  fiber_diff(p10.fiber - p00.fiber) +
                                                  fiber_diff(p11.fiber - p00.fiber)));
  const Vec3 bu = ((p10.base - p00.base) + (p11.base - p01.base)) / (2.0 * du);
  const Vec3 bv = ((p01.base - p00.base) + (p11.base - p10.base)) / (2.0 * dv);
  const double fu = (fiber_diff(p10.fiber - p00.fiber) + fiber_diff(p11.fiber - p01.fiber)) / (2.0 * du);
  const double fv = (fiber_diff(p01.fiber - p00.fiber) + fiber_diff(p11.fiber - p10.fiber)) / (2.0 * dv);
  f.tu << bu, fu;
  f.tv << bv, fv;
  return f;
}

namespace {

const Center* find_center(const MonopoleConfig& config, const Vec3& x) {
  for (const Center& c : config.centers()) {
    if (same_point(c.position, x)) return &c;
  }
  return nullptr;
}

double segment_distance(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 d = b - a;
  const double t = std::clamp((c - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (a + t * d - c).norm();
}

std::vector<ChartPoint> segment_nodes(const Vec3& a, const Vec3& b, int nu, int nv) {
  std::vector<ChartPoint> nodes;
  nodes.reserve((nu + 1) * nv);
  for (int i = 0; i <= nu; ++i) {
    const Vec3 x = i == 0 ? a : i == nu ? b : Vec3(a + (static_cast<double>(i) / nu) * (b - a));
    for (int j = 0; j < nv; ++j) {
      ChartPoint p;
      p.base = x;
      p.fiber = kTwoPi * j / nv;
      nodes.push_back(p);
    }
  }
  return nodes;
}

}  // namespace

ParamSurface segment_sphere(const MonopoleConfig& config, const Vec3& a, const Vec3& b, int nu, int nv) {
  const Center* ca = find_center(config, a);
  const Center* cb = find_center(config, b);
  if (!ca || !cb) throw DomainError("segment sphere endpoints must be singular points");
  if (ca == cb) throw DomainError("segment sphere endpoints coincide");
  for (const Center& c : config.centers()) {
    if (&c == ca || &c == cb) continue;
    if (segment_distance(a, b, c.position) <= config.clearance()) {
      throw DomainError(fmt::format("segment meets the clearance ball of the center at ({}, {}, {})",
                                    c.position[0], c.position[1], c.position[2]));
    }
  }
  return ParamSurface(nu, nv, segment_nodes(a, b, nu, nv), kSegmentSelfIntersection);
}

ParamSurface bump_segment_sphere(const MonopoleConfig& config, const Vec3& a, const Vec3& b, int nu, int nv,
                                 const Vec3& normal, double amplitude) {
  const ParamSurface base = segment_sphere(config, a, b, nu, nv);
  const Vec3 d = (b - a).normalized();
  const Vec3 n = normal - normal.dot(d) * d;
  if (!(n.norm() > 1e-12)) throw ConfigError("bump normal must not be parallel to the segment");
  const Vec3 nh = n.normalized();
  std::vector<ChartPoint> nodes = base.nodes();
  for (int i = 1; i < nu; ++i) {
    const double s = std::sin(kPi * i / nu);
    for (int j = 0; j < nv; ++j) nodes[i * nv + j].base += amplitude * s * s * s * s * nh;
  }
  return ParamSurface(nu, nv, std::move(nodes), base.homology_note());
}

ParamSurface round_sphere(const Vec3& center, double radius, double fiber, int nu, int nv, double warp) {
  if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
  if (!(std::abs(warp) < 1.0)) throw ConfigError("warp must lie in (-1, 1)");
  std::vector<ChartPoint> nodes;
  nodes.reserve((nu + 1) * nv);
  for (int i = 0; i <= nu; ++i) {
    const double u = static_cast<double>(i) / nu;
    const double theta = kPi * (u - warp * std::sin(kTwoPi * u) / kTwoPi);
    for (int j = 0; j < nv; ++j) {
      const double phi = kTwoPi * j / nv;
      ChartPoint p;
      if (i == 0) {
        p.base = center + radius * Vec3::UnitZ();
      } else if (i == nu) {
        p.base = center - radius * Vec3::UnitZ();
      } else {
        p.base = center + radius * Vec3(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                                        std::cos(theta));
      }
      p.fiber = wrap_angle(fiber);
      nodes.push_back(p);
    }
  }
  return ParamSurface(nu, nv, std::move(nodes));
}

namespace {

// Surfaces through singular points enter their clearance balls; cell
// centers only need to avoid the singular points themselves.
constexpr double kSurfaceClearance = 1e-9;

MonopoleConfig surface_config(const MonopoleConfig& config) {
  return config.with_clearance(std::min(config.clearance(), kSurfaceClearance));
}

void require_off_strings(const ParamSurface& s, const MonopoleConfig& config) {
  const GaugeChart& chart = config.gauge();
  for (const ChartPoint& p : s.nodes()) {
    if (config.distance_to_singularity(p.base) <= config.clearance()) continue;  // collapsed pole
    for (const Center& c : config.centers()) {
      if (chart.excludes(c.position, p.base)) {
        throw GaugeError(fmt::format("surface node ({}, {}, {}) lies on a Dirac string", p.base[0], p.base[1],
                                     p.base[2]));
      }
    }
  }
}

template <class F>
std::vector<F> per_cell(const ParamSurface& s, int threads,
                        const std::function<F(const CellFrame&)>& fn) {
  std::vector<F> out(s.cell_count());
  parallel_for(out.size(), threads, [&](std::size_t n) {
    const int i = static_cast<int>(n) / s.nv();
    const int j = static_cast<int>(n) % s.nv();
    out[n] = fn(cell_frame(s, i, j));
  });
  return out;
}

double cell_area(const CellFrame& f, const MonopoleConfig& config) {
  const Mat4 g = gh_metric(config, f.center);
  const double guu = f.tu.dot(g * f.tu);
  const double gvv = f.tv.dot(g * f.tv);
  const double guv = f.tu.dot(g * f.tv);
  return std::sqrt(std::max(0.0, guu * gvv - guv * guv));
}

}  // namespace

double area(const ParamSurface& s, const MonopoleConfig& config, int threads) {
  require_off_strings(s, config);
  const MonopoleConfig eval = surface_config(config);
  const auto cells = per_cell<double>(s, threads, [&](const CellFrame& f) { return cell_area(f, eval); });
  double total = 0.0;
  for (double a : cells) total += a;
  return total * s.cell_weight();
}

Vec3 flux(const ParamSurface& s, const MonopoleConfig& config, int threads) {
  require_off_strings(s, config);
  const MonopoleConfig eval = surface_config(config);
  const auto cells = per_cell<Vec3>(s, threads, [&](const CellFrame& f) {
    const CoTriple t = gh_triple(eval, f.center);
    return Vec3(f.tu.dot(t.omega[0] * f.tv), f.tu.dot(t.omega[1] * f.tv), f.tu.dot(t.omega[2] * f.tv));
  });
  Vec3 total = Vec3::Zero();
  for (const Vec3& v : cells) total += v;
  return total * s.cell_weight();
}

CalibrationResult calibration_defect(const ParamSurface& s, const MonopoleConfig& config, int threads) {
  CalibrationResult r;
  r.area = area(s, config, threads);
  r.flux = flux(s, config, threads);
  r.flux_norm = r.flux.norm();
  r.defect = r.area - r.flux_norm;
  return r;
}

namespace {

double romberg(std::vector<double> column) {
  // Midpoint errors are even in the mesh width: eliminate h^2, h^4, ...
  double factor = 4.0;
  while (column.size() > 1) {
    std::vector<double> next;
    for (std::size_t i = 1; i < column.size(); ++i) {
      next.push_back((factor * column[i] - column[i - 1]) / (factor - 1.0));
    }
    column = std::move(next);
    factor *= 4.0;
  }
  return column.front();
}

}  // namespace

RefinementStudy refinement_study(const SurfaceBuilder& build, const MonopoleConfig& config, int nu0, int nv0,
                                 int max_level, int threads) {
  if (max_level < 0 || nu0 < 1 || nv0 < 3) throw ConfigError("invalid refinement parameters");
  RefinementStudy study;
  std::vector<double> areas, defects;
  for (int level = 0; level <= max_level; ++level) {
    const int nu = nu0 << level;
    const int nv = nv0 << level;
    const CalibrationResult r = calibration_defect(build(nu, nv), config, threads);
    study.levels.push_back({level, nu, nv, r});
    areas.push_back(r.area);
    defects.push_back(r.defect);
  }
  for (std::size_t i = 2; i < areas.size(); ++i) {
    study.area_ratios.push_back((areas[i - 1] - areas[i - 2]) / (areas[i] - areas[i - 1]));
  }
  study.extrapolated_area = romberg(areas);
  study.extrapolated_defect = romberg(defects);
  return study;
}

DescentResult area_descent(const ParamSurface& s, const MonopoleConfig& config, const DescentOptions& opts) {
  if (!opts.enabled) throw ConfigError("area descent is experimental and disabled");
  std::vector<ChartPoint> nodes = s.nodes();
  const int nu = s.nu();
  const int nv = s.nv();
  const MonopoleConfig eval = surface_config(config);
  auto local_area = [&](const std::vector<ChartPoint>& n, int i, int j) {
    const ParamSurface view(nu, nv, n, s.homology_note());
    double a = 0.0;
    for (int di : {-1, 0})
      for (int dj : {-1, 0}) a += cell_area(cell_frame(view, i + di, j + dj), eval);
    return a * view.cell_weight();
  };
  DescentResult out{s, {area(s, config)}};
  for (int it = 0; it < opts.iterations; ++it) {
    std::vector<Vec3> grad((nu + 1) * nv, Vec3::Zero());
    for (int i = 1; i < nu; ++i)
      for (int j = 0; j < nv; ++j)
        for (int k = 0; k < 3; ++k) {
          std::vector<ChartPoint> plus = nodes, minus = nodes;
          plus[i * nv + j].base[k] += opts.fd_step;
          minus[i * nv + j].base[k] -= opts.fd_step;
          grad[i * nv + j][k] = (local_area(plus, i, j) - local_area(minus, i, j)) / (2.0 * opts.fd_step);
        }
    for (int n = nv; n < nu * nv; ++n) nodes[n].base -= opts.step * grad[n];
    out.surface = ParamSurface(nu, nv, nodes, s.homology_note());
    out.areas.push_back(area(out.surface, config));
  }
  return out;
}

}  // namespace alf
