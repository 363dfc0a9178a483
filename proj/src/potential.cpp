#include "alf/potential.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "alf/errors.hpp"

namespace alf {

void GaugeChart::validate() const {
  const double norm = string_direction.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-12) {
    throw ConfigError(fmt::format("gauge string_direction must be a unit vector (norm {})", norm));
  }
  if (!(cone_halfangle > 0.0 && cone_halfangle < kPi / 2)) {
    throw ConfigError(fmt::format("gauge cone_halfangle {} outside (0, pi/2)", cone_halfangle));
  }
}

bool GaugeChart::excludes(const Vec3& center, const Vec3& x) const {
  const Vec3 y = x - center;
  const double r = y.norm();
  if (r == 0.0) return true;
  return string_direction.dot(y) > r * std::cos(cone_halfangle);
}

MonopoleConfig::MonopoleConfig(Params params) : params_(std::move(params)) {}

MonopoleConfig MonopoleConfig::create(Params params) {
  const double eps = params.epsilon;
  const double delta = params.delta;
  if (!std::isfinite(eps) || !std::isfinite(delta)) {
    throw ConfigError("epsilon and delta must be finite");
  }
  if (params.strict) {
    if (!(delta > 0.0 && delta < 0.5)) {
      throw ConfigError(fmt::format("delta = {} outside (0, 1/2)", delta));
    }
    if (!(eps > 0.0 && eps < delta * delta)) {
      throw ConfigError(fmt::format("epsilon = {} outside (0, delta^2 = {})", eps, delta * delta));
    }
  } else {
    if (!(eps >= 0.0)) throw ConfigError(fmt::format("epsilon = {} must be >= 0", eps));
    if (!(delta > 0.0)) throw ConfigError(fmt::format("delta = {} must be > 0", delta));
  }
  for (const auto* q : {&params.center_charge, &params.pair_charge}) {
    if (q->has_value() && !std::isfinite(**q)) throw ConfigError("charges must be finite");
  }
  params.gauge.validate();
  if (params.clearance && !(*params.clearance > 0.0 && std::isfinite(*params.clearance))) {
    throw ConfigError("clearance must be positive and finite");
  }

  MonopoleConfig config(std::move(params));
  const double clr = config.clearance();
  const auto& pts = config.params_.points;
  for (std::size_t v = 0; v < pts.size(); ++v) {
    if (!pts[v].allFinite()) throw ConfigError(fmt::format("point {} is not finite", v));
    if (!(pts[v].norm() > clr)) {
      throw ConfigError(fmt::format("point {} has |p| = {} <= clearance {}", v, pts[v].norm(), clr));
    }
    for (std::size_t w = 0; w < v; ++w) {
      if (!((pts[v] - pts[w]).norm() > clr) || !((pts[v] + pts[w]).norm() > clr)) {
        throw ConfigError(fmt::format("points {} and {} coincide up to the mirror map", w, v));
      }
    }
  }

  if (config.center_charge() != 0.0) config.centers_.push_back({Vec3::Zero(), config.center_charge()});
  if (config.pair_charge() != 0.0) {
    for (const Vec3& p : pts) {
      config.centers_.push_back({p, config.pair_charge()});
      config.centers_.push_back({-p, config.pair_charge()});
    }
  }
  return config;
}

double MonopoleConfig::center_charge() const {
  return params_.center_charge.value_or(-params_.epsilon);
}

double MonopoleConfig::pair_charge() const {
  return params_.pair_charge.value_or(0.5 * params_.epsilon);
}

bool MonopoleConfig::default_charges() const {
  return center_charge() == -params_.epsilon && pair_charge() == 0.5 * params_.epsilon;
}

std::vector<Center> MonopoleConfig::all_centers() const {
  std::vector<Center> out;
  out.push_back({Vec3::Zero(), center_charge()});
  for (const Vec3& p : params_.points) {
    out.push_back({p, pair_charge()});
    out.push_back({-p, pair_charge()});
  }
  return out;
}

double MonopoleConfig::clearance() const {
  return params_.clearance.value_or(std::max(2.0 * params_.epsilon, 1e-3));
}

double MonopoleConfig::distance_to_singularity(const Vec3& x) const {
  double d = std::numeric_limits<double>::infinity();
  for (const Center& c : centers_) d = std::min(d, (x - c.position).norm());
  return d;
}

bool MonopoleConfig::admissible(const Vec3& x) const {
  return x.allFinite() && distance_to_singularity(x) > clearance();
}

void MonopoleConfig::require_admissible(const Vec3& x) const {
  if (!admissible(x)) {
    throw DomainError(fmt::format("point ({}, {}, {}) violates clearance {} (distance {})", x[0],
                                  x[1], x[2], clearance(), distance_to_singularity(x)));
  }
}

void MonopoleConfig::require_positive_epsilon() const {
  if (!(params_.epsilon > 0.0)) throw ConfigError("operation requires epsilon > 0");
}

MonopoleConfig MonopoleConfig::with_epsilon(double epsilon) const {
  Params p = params_;
  p.epsilon = epsilon;
  return create(std::move(p));
}

MonopoleConfig MonopoleConfig::with_clearance(double clearance) const {
  Params p = params_;
  p.clearance = clearance;
  return create(std::move(p));
}

MonopoleConfig MonopoleConfig::with_gauge(const GaugeChart& chart) const {
  Params p = params_;
  p.gauge = chart;
  return create(std::move(p));
}

nlohmann::json config_to_json(const MonopoleConfig& config) {
  nlohmann::json doc;
  doc["epsilon"] = config.epsilon();
  doc["delta"] = config.delta();
  doc["points"] = nlohmann::json::array();
  for (const Vec3& p : config.points()) doc["points"].push_back({p[0], p[1], p[2]});
  if (config.params().center_charge) doc["center_charge"] = *config.params().center_charge;
  if (config.params().pair_charge) doc["pair_charge"] = *config.params().pair_charge;
  const GaugeChart& g = config.gauge();
  doc["gauge"] = {{"string_direction", {g.string_direction[0], g.string_direction[1], g.string_direction[2]}},
                  {"cone_halfangle", g.cone_halfangle}};
  doc["strict"] = config.strict();
  if (config.params().clearance) doc["clearance"] = *config.params().clearance;
  return doc;
}

namespace {

Vec3 read_vec3(const nlohmann::json& v, const char* what) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(fmt::format("{} must be a 3-vector", what));
  return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

}  // namespace

MonopoleConfig config_from_json(const nlohmann::json& doc) {
  try {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    MonopoleConfig::Params p;
    if (!doc.contains("epsilon") || !doc.contains("delta")) {
      throw ConfigError("config requires epsilon and delta");
    }
    p.epsilon = doc.at("epsilon").get<double>();
    p.delta = doc.at("delta").get<double>();
    if (doc.contains("points")) {
      for (const auto& v : doc.at("points")) p.points.push_back(read_vec3(v, "points entry"));
    }
    if (doc.contains("center_charge") && !doc.at("center_charge").is_null()) {
      p.center_charge = doc.at("center_charge").get<double>();
    }
    if (doc.contains("pair_charge") && !doc.at("pair_charge").is_null()) {
      p.pair_charge = doc.at("pair_charge").get<double>();
    }
    if (doc.contains("gauge")) {
      const auto& g = doc.at("gauge");
      if (g.contains("string_direction")) {
        p.gauge.string_direction = read_vec3(g.at("string_direction"), "gauge.string_direction");
      }
      if (g.contains("cone_halfangle")) p.gauge.cone_halfangle = g.at("cone_halfangle").get<double>();
    }
    if (doc.contains("strict")) p.strict = doc.at("strict").get<bool>();
    if (doc.contains("clearance") && !doc.at("clearance").is_null()) {
      p.clearance = doc.at("clearance").get<double>();
    }
    return MonopoleConfig::create(std::move(p));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed config: {}", e.what()));
  }
}

namespace {

// h - 1, summed without the constant so far-field residuals keep precision.
double h_minus_one(const MonopoleConfig& config, const Vec3& x) {
  double s = 0.0;
  for (const Center& c : config.centers()) s += c.charge / (x - c.position).norm();
  return s;
}

}  // namespace

double eval_h(const MonopoleConfig& config, const Vec3& x) {
  config.require_admissible(x);
  return 1.0 + h_minus_one(config, x);
}

Vec3 grad_h(const MonopoleConfig& config, const Vec3& x) {
  config.require_admissible(x);
  Vec3 g = Vec3::Zero();
  for (const Center& c : config.centers()) {
    const Vec3 y = x - c.position;
    const double r = y.norm();
    g -= c.charge * y / (r * r * r);
  }
  return g;
}

double eval_h_center(const MonopoleConfig& config, const Vec3& x_prime) {
  const double r = x_prime.norm();
  if (!(r > 1.0 / config.delta())) {
    throw DomainError(fmt::format("center chart needs |x'| > 1/delta = {} (got {})",
                                  1.0 / config.delta(), r));
  }
  double shift = 0.0;
  for (const Vec3& p : config.points()) shift += config.epsilon() / p.norm();
  return 1.0 - 1.0 / r + shift;
}

Vec3 monopole_potential(double charge, const Vec3& center, const GaugeChart& chart, const Vec3& x) {
  if (charge == 0.0) return Vec3::Zero();
  if (chart.excludes(center, x)) {
    throw GaugeError(fmt::format("point ({}, {}, {}) inside the Dirac-string cone of center ({}, {}, {})",
                                 x[0], x[1], x[2], center[0], center[1], center[2]));
  }
  const Vec3 y = x - center;
  const double r = y.norm();
  const Vec3 pole = -chart.string_direction;
  // A = g (pole x y) / (r (r + pole.y)), curl A = g y / r^3, g = -charge.
  return -charge * pole.cross(y) / (r * (r + pole.dot(y)));
}

Mat3 monopole_potential_jacobian(double charge, const Vec3& center, const GaugeChart& chart,
                                 const Vec3& x) {
  if (charge == 0.0) return Mat3::Zero();
  if (chart.excludes(center, x)) throw GaugeError("Jacobian requested inside a Dirac-string cone");
  const Vec3 y = x - center;
  const double r = y.norm();
  const Vec3 pole = -chart.string_direction;
  const Vec3 num = pole.cross(y);
  const double den = r * (r + pole.dot(y));
  // d den / d y_j = 2 y_j + (pole.y) y_j / r + r pole_j
  const Vec3 dden = 2.0 * y + (pole.dot(y) / r) * y + r * pole;
  Mat3 dnum;
  for (int j = 0; j < 3; ++j) dnum.col(j) = pole.cross(Vec3::Unit(j));
  return -charge * (dnum / den - num * dden.transpose() / (den * den));
}

Vec3 total_connection(const MonopoleConfig& config, const GaugeChart& chart, const Vec3& x) {
  config.require_positive_epsilon();
  config.require_admissible(x);
  Vec3 a = Vec3::Zero();
  for (const Center& c : config.centers()) a += monopole_potential(c.charge, c.position, chart, x);
  return a / config.epsilon();
}

Vec3 total_connection(const MonopoleConfig& config, const Vec3& x) {
  return total_connection(config, config.gauge(), x);
}

double asymptotic_mass(const MonopoleConfig& config) {
  return config.center_charge() + 2.0 * static_cast<double>(config.k()) * config.pair_charge();
}

namespace {

// Fixed spread of directions for far-field fits: the 14 face and corner
// directions of a cube.
std::array<Vec3, 14> fit_directions() {
  std::array<Vec3, 14> dirs;
  int n = 0;
  for (int axis = 0; axis < 3; ++axis) {
    for (double s : {1.0, -1.0}) {
      Vec3 d = Vec3::Zero();
      d[axis] = s;
      dirs[n++] = d;
    }
  }
  for (double a : {1.0, -1.0})
    for (double b : {1.0, -1.0})
      for (double c : {1.0, -1.0}) dirs[n++] = Vec3(a, b, c).normalized();
  return dirs;
}

}  // namespace

MassFit fit_asymptotic_mass(const MonopoleConfig& config, double r_min, double r_max,
                            int radial_count) {
  if (!(r_min > 0.0 && r_max > r_min) || radial_count < 2) {
    throw ConfigError("fit_asymptotic_mass needs 0 < r_min < r_max and radial_count >= 2");
  }
  Eigen::Matrix2d normal = Eigen::Matrix2d::Zero();
  Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
  int samples = 0;
  for (const Vec3& dir : fit_directions()) {
    for (int i = 0; i < radial_count; ++i) {
      const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (radial_count - 1));
      const Vec3 x = r * dir;
      config.require_admissible(x);
      const double y = h_minus_one(config, x) * r;
      const Eigen::Vector2d row(1.0, 1.0 / (r * r));
      normal += row * row.transpose();
      rhs += row * y;
      ++samples;
    }
  }
  const Eigen::Vector2d coef = normal.ldlt().solve(rhs);
  return {coef[0], asymptotic_mass(config), coef[1], samples};
}

GaugeChart gauge_avoiding(const MonopoleConfig& config, const Vec3& x, double cone_halfangle) {
  GaugeChart best;
  best.cone_halfangle = cone_halfangle;
  if (config.centers().empty()) return best;
  double best_score = -1.0;
  for (int a = -1; a <= 1; ++a) {
    for (int b = -1; b <= 1; ++b) {
      for (int c = -1; c <= 1; ++c) {
        if (a == 0 && b == 0 && c == 0) continue;
        const Vec3 n = Vec3(a, b, c).normalized();
        double score = kPi;
        for (const Center& ctr : config.centers()) {
          const Vec3 y = (x - ctr.position).normalized();
          score = std::min(score, std::acos(std::clamp(n.dot(y), -1.0, 1.0)));
        }
        if (score > best_score) {
          best_score = score;
          best.string_direction = n;
        }
      }
    }
  }
  return best;
}

}  // namespace alf
