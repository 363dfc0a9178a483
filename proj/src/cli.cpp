#include "alf/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <fmt/format.h>

#include "alf/calibration.hpp"
#include "alf/errors.hpp"
#include "alf/geometry.hpp"
#include "alf/gluing.hpp"
#include "alf/report.hpp"

namespace alf {

using nlohmann::json;

Verb parse_verb(const std::string& name) {
  if (name == "verify") return Verb::verify;
  if (name == "scaling") return Verb::scaling;
  if (name == "asymptotics") return Verb::asymptotics;
  if (name == "curvature") return Verb::curvature;
  if (name == "volume") return Verb::volume;
  if (name == "calibrate") return Verb::calibrate;
  throw ConfigError(fmt::format("unknown verb '{}'", name));
}

std::string verb_name(Verb verb) {
  switch (verb) {
    case Verb::verify: return "verify";
    case Verb::scaling: return "scaling";
    case Verb::asymptotics: return "asymptotics";
    case Verb::curvature: return "curvature";
    case Verb::volume: return "volume";
    case Verb::calibrate: return "calibrate";
  }
  return "unknown";
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError(fmt::format("override path '{}' has an empty segment", path));
    if (!node->is_object()) {
      if (!node->is_null()) throw ConfigError(fmt::format("override path '{}' crosses a non-object", path));
      *node = json::object();
    }
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

namespace {

// Value at a dot path inside doc, or fallback when absent.
template <class T>
T lookup(const json& doc, const std::string& path, T fallback) {
  const json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object() || !node->contains(key)) return fallback;
    node = &node->at(key);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  try {
    return node->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config key '{}': {}", path, e.what()));
  }
}

Vec3 vec3_or(const json& doc, const std::string& path, const Vec3& fallback) {
  const auto v = lookup<std::vector<double>>(doc, path, {fallback[0], fallback[1], fallback[2]});
  if (v.size() != 3) throw ConfigError(fmt::format("config key '{}' must be a 3-vector", path));
  return {v[0], v[1], v[2]};
}

json band(double lo, double hi) { return json::array({lo, hi}); }

// ---- verify ---------------------------------------------------------------

VerbOutput verify(const MonopoleConfig& config, const json& doc, int threads) {
  const SampleSpec spec = sample_spec_from_json(doc.value("samples", json::object()));
  const SampleSet set = sample_points(spec, config);
  const double q_tol = lookup(doc, "thresholds.verify.q_defect", 1e-13);
  const double m_tol = lookup(doc, "thresholds.verify.metric_error", 1e-12);
  const double c_tol = lookup(doc, "thresholds.verify.closedness", 1e-6);
  const FdStep step{1e-4 * config.clearance(), false};

  struct Row {
    double q, metric, closed;
  };
  std::vector<Row> rows(set.points.size());
  parallel_for(rows.size(), threads, [&](std::size_t n) {
    const ChartPoint& p = set.points[n];
    const GaugeChart chart = gauge_avoiding(config, p.base);
    const CoTriple t = gh_triple(config, p, chart);
    const Mat4 g = gh_metric(config, p, chart);
    const Mat4 recovered = metric_from_triple(t);
    double closed = 0.0;
    for (int i = 0; i < 3; ++i) {
      auto field = [&](const Vec4& y) {
        ChartPoint q;
        q.base = y.head<3>();
        q.fiber = y[3];
        return gh_triple(config, q, chart).omega[i];
      };
      closed = std::max(closed, frame_norm(exterior_derivative(field, p.coords(), step), g));
    }
    rows[n] = {q_defect(t), (recovered - g).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff(), closed};
  });

  CsvWriter csv({"x", "y", "z", "t", "q_defect", "metric_error", "closedness"});
  double qmax = 0.0, mmax = 0.0, cmax = 0.0;
  for (std::size_t n = 0; n < rows.size(); ++n) {
    const ChartPoint& p = set.points[n];
    csv.row({p.base[0], p.base[1], p.base[2], p.fiber, rows[n].q, rows[n].metric, rows[n].closed});
    qmax = std::max(qmax, rows[n].q);
    mmax = std::max(mmax, rows[n].metric);
    cmax = std::max(cmax, rows[n].closed);
  }
  json r{{"points", set.points.size()},
         {"dropped", set.dropped},
         {"max_q_defect", qmax},
         {"max_metric_error", mmax},
         {"max_closedness", cmax},
         {"fd_step", step.h},
         {"thresholds", {{"q_defect", q_tol}, {"metric_error", m_tol}, {"closedness", c_tol}}}};
  r["pass"] = qmax <= q_tol && mmax <= m_tol && cmax <= c_tol;
  return {r, {{"verify.csv", csv.str()}}};
}

// ---- scaling --------------------------------------------------------------

ScalingOptions scaling_options(const json& doc, int threads) {
  ScalingOptions o;
  const std::string scheme = lookup<std::string>(doc, "neck.scheme", "center_anchored");
  if (scheme == "center_anchored") {
    o.neck.scheme = NeckScheme::center_anchored;
  } else if (scheme == "geometric_mean") {
    o.neck.scheme = NeckScheme::geometric_mean;
  } else {
    throw ConfigError(fmt::format("unknown neck.scheme '{}'", scheme));
  }
  o.neck.inner = lookup(doc, "neck.inner", o.neck.inner);
  o.neck.outer = lookup(doc, "neck.outer", o.neck.outer);
  const std::string mode = lookup<std::string>(doc, "neck.mode", "convex");
  if (mode == "convex") {
    o.mode = PatchMode::convex;
  } else if (mode == "closed") {
    o.mode = PatchMode::closed;
  } else {
    throw ConfigError(fmt::format("unknown neck.mode '{}'", mode));
  }
  o.seed = lookup<std::uint64_t>(doc, "scaling.seed", o.seed);
  o.radial_count = lookup(doc, "scaling.radial_count", o.radial_count);
  o.angular_count = lookup(doc, "scaling.angular_count", o.angular_count);
  o.string_guard = lookup(doc, "scaling.string_guard", o.string_guard);
  o.threads = threads;
  return o;
}

json fit_summary(const ScalingStudy& study, bool closedness, double lo, double hi, double r2_min) {
  try {
    const ScalingFit f = closedness ? study.fit_closedness() : study.fit_q_defect();
    return {{"slope", f.slope},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"pass", f.slope >= lo && f.slope <= hi && f.r_squared >= r2_min}};
  } catch (const FitError& e) {
    return {{"error", e.what()}, {"pass", false}};
  }
}

VerbOutput scaling(const MonopoleConfig& config, const json& doc, int threads) {
  const auto eps = lookup<std::vector<double>>(doc, "scaling.epsilons", {0.04, 0.028, 0.02, 0.014, 0.01});
  const ScalingOptions opts = scaling_options(doc, threads);
  const double lo = lookup(doc, "thresholds.scaling.slope_min", 2.7);
  const double hi = lookup(doc, "thresholds.scaling.slope_max", 3.3);
  const double r2 = lookup(doc, "thresholds.scaling.r_squared_min", 0.98);
  const auto required =
      lookup<std::vector<std::string>>(doc, "thresholds.scaling.require", {"q_defect", "closedness"});

  const ScalingStudy study = scaling_study(config, eps, opts);
  CsvWriter csv({"epsilon", "radius", "q_defect", "closedness_defect"});
  for (const ErrorSample& s : study.samples) csv.row({s.epsilon, s.radius, s.q_defect, s.closedness_defect});

  json table = json::array();
  for (std::size_t i = 0; i < eps.size(); ++i) {
    table.push_back({{"epsilon", eps[i]}, {"sup_q_defect", study.sup_q_defect[i]},
                     {"sup_closedness", study.sup_closedness[i]}});
  }
  json fits{{"q_defect", fit_summary(study, false, lo, hi, r2)},
            {"closedness", fit_summary(study, true, lo, hi, r2)}};
  bool pass = true;
  for (const std::string& key : required) {
    if (!fits.contains(key)) throw ConfigError(fmt::format("unknown scaling requirement '{}'", key));
    pass = pass && fits[key]["pass"].get<bool>();
  }
  json r{{"fits", fits},
         {"sup_table", table},
         {"samples_per_epsilon", study.samples.size() / eps.size()},
         {"mode", lookup<std::string>(doc, "neck.mode", "convex")},
         {"thresholds", {{"slope", band(lo, hi)}, {"r_squared_min", r2}, {"require", required}}},
         {"pass", pass}};
  return {r, {{"scaling.csv", csv.str()}}};
}

// ---- asymptotics ----------------------------------------------------------

VerbOutput asymptotics(const MonopoleConfig& config, const json& doc, int) {
  const double r_min = lookup(doc, "asymptotics.r_min", 1e2);
  const double r_max = lookup(doc, "asymptotics.r_max", 1e4);
  const int count = lookup(doc, "asymptotics.radial_count", 24);
  const double rel = lookup(doc, "thresholds.asymptotics.relative", 0.01);
  const double abs_eps = lookup(doc, "thresholds.asymptotics.absolute_per_epsilon", 1e-3);
  const MassFit fit = fit_asymptotic_mass(config, r_min, r_max, count);

  CsvWriter csv({"radius", "mean_scaled_residual"});
  const std::vector<Vec3> dirs = fibonacci_sphere(14);
  for (int i = 0; i < count; ++i) {
    const double r = r_min * std::pow(r_max / r_min, static_cast<double>(i) / (count - 1));
    double mean = 0.0;
    for (const Vec3& d : dirs) mean += (eval_h(config, r * d) - 1.0) * r;
    csv.row({r, mean / dirs.size()});
  }
  const double tol = std::max(rel * std::abs(fit.expected), abs_eps * config.epsilon());
  json r{{"mass", fit.mass},
         {"expected", fit.expected},
         {"curvature_coefficient", fit.curvature},
         {"samples", fit.samples},
         {"k", config.k()},
         {"tolerance", tol},
         {"pass", std::abs(fit.mass - fit.expected) <= tol}};
  return {r, {{"asymptotics.csv", csv.str()}}};
}

// ---- curvature ------------------------------------------------------------

VerbOutput curvature(const MonopoleConfig& config, const json& doc, int threads) {
  const SampleSpec spec = sample_spec_from_json(doc.value("samples", json::object()));
  const SampleSet set = sample_points(spec, config);
  const double ratio_tol = lookup(doc, "thresholds.curvature.ricci_ratio", 1e-4);
  const double flat_tol = lookup(doc, "thresholds.curvature.flat", 1e-9);
  const double margin = lookup(doc, "thresholds.curvature.decay_margin", 0.5);

  std::vector<CurvatureSample> samples(set.points.size());
  parallel_for(samples.size(), threads, [&](std::size_t n) { samples[n] = ricci_norm(config, set.points[n]); });

  CsvWriter csv({"r", "riemann_norm", "ricci_norm"});
  bool pointwise = true;
  double worst_ratio = 0.0, worst_bianchi = 0.0;
  for (const CurvatureSample& s : samples) {
    csv.row({s.point.base.norm(), s.riemann_norm, s.ricci_norm});
    if (s.riemann_norm > flat_tol) {
      worst_ratio = std::max(worst_ratio, s.ricci_norm / s.riemann_norm);
      pointwise = pointwise && s.ricci_norm <= ratio_tol * s.riemann_norm;
    } else {
      pointwise = pointwise && s.ricci_norm <= flat_tol;
    }
    worst_bianchi = std::max(worst_bianchi, s.bianchi_residual);
  }

  DecayOptions dopts;
  dopts.angular_count = lookup(doc, "curvature.angular_count", dopts.angular_count);
  dopts.seed = lookup<std::uint64_t>(doc, "curvature.seed", dopts.seed);
  dopts.flat_tolerance = flat_tol;
  dopts.threads = threads;
  const auto radii = lookup<std::vector<double>>(doc, "curvature.radii", {4, 8, 16, 32, 64, 128});
  const CurvatureDecay decay = curvature_decay(config, radii, dopts);
  CsvWriter dcsv({"r", "mean_riemann", "mean_ricci"});
  for (std::size_t i = 0; i < radii.size(); ++i) dcsv.row({radii[i], decay.mean_riemann[i], decay.mean_ricci[i]});
  const bool decay_pass = decay.flat || 2.0 * decay.q > 3.0 + margin;

  json r{{"points", samples.size()},
         {"dropped", set.dropped},
         {"max_ricci_ratio", worst_ratio},
         {"max_bianchi_residual", worst_bianchi},
         {"decay", {{"flat", decay.flat},
                    {"q", decay.q},
                    {"r_squared", decay.r_squared},
                    {"tail_contributions", decay.tail_contributions},
                    {"tail_decreasing", decay.tail_decreasing},
                    {"pass", decay_pass}}},
         {"thresholds", {{"ricci_ratio", ratio_tol}, {"flat", flat_tol}, {"decay_margin", margin}}},
         {"pass", pointwise && decay_pass}};
  return {r, {{"curvature.csv", csv.str()}, {"curvature_decay.csv", dcsv.str()}}};
}

// ---- volume ---------------------------------------------------------------

VerbOutput volume(const MonopoleConfig& config, const json& doc, int) {
  const auto radii = lookup<std::vector<double>>(doc, "volume.radii", {20, 40, 80, 160, 320, 640});
  const int order = lookup(doc, "volume.order", 48);
  const double lo = lookup(doc, "thresholds.volume.exponent_min", 2.8);
  const double hi = lookup(doc, "thresholds.volume.exponent_max", 3.2);
  const VolumeGrowth v = volume_growth(config, radii, order);
  CsvWriter csv({"r", "volume"});
  for (std::size_t i = 0; i < radii.size(); ++i) csv.row({radii[i], v.volumes[i]});
  json r{{"exponent", v.exponent},
         {"r_squared", v.r_squared},
         {"thresholds", {{"exponent", band(lo, hi)}}},
         {"pass", v.exponent >= lo && v.exponent <= hi}};
  return {r, {{"volume.csv", csv.str()}}};
}

// ---- calibrate ------------------------------------------------------------

VerbOutput calibrate(const MonopoleConfig& config, const json& doc, int threads) {
  if (config.points().empty()) throw ConfigError("calibrate needs at least one point pair");
  const Vec3 p1 = config.points().front();
  const Vec3 a = vec3_or(doc, "calibrate.a", -p1);
  const Vec3 b = vec3_or(doc, "calibrate.b", p1);
  const auto res = lookup<std::vector<int>>(doc, "calibrate.resolution", {8, 8});
  if (res.size() != 2) throw ConfigError("calibrate.resolution must be [nu, nv]");
  const int levels = lookup(doc, "calibrate.levels", 3);
  const auto amps = lookup<std::vector<double>>(doc, "calibrate.amplitudes", {0.01, 0.02, 0.04});
  const Vec3 normal = vec3_or(doc, "calibrate.normal", (b - a).unitOrthogonal());
  const double ratio_tol = lookup(doc, "thresholds.calibration.defect_ratio", 1e-6);
  const double lo = lookup(doc, "thresholds.calibration.bump_slope_min", 1.8);
  const double hi = lookup(doc, "thresholds.calibration.bump_slope_max", 2.2);

  const RefinementStudy study = refinement_study(
      [&](int nu, int nv) { return segment_sphere(config, a, b, nu, nv); }, config, res[0], res[1], levels, threads);
  CsvWriter csv({"level", "area", "flux_norm", "defect"});
  for (const RefinementLevel& l : study.levels) {
    csv.row({static_cast<double>(l.level), l.result.area, l.result.flux_norm, l.result.defect});
  }
  const RefinementLevel& finest = study.levels.back();
  const double ratio = finest.result.defect / finest.result.area;

  CsvWriter bcsv({"amplitude", "area", "flux_norm", "defect"});
  std::vector<double> defects;
  for (double amp : amps) {
    const auto r = calibration_defect(bump_segment_sphere(config, a, b, finest.nu, finest.nv, normal, amp), config,
                                      threads);
    bcsv.row({amp, r.area, r.flux_norm, r.defect});
    defects.push_back(r.defect);
  }
  json bump{{"amplitudes", amps}, {"defects", defects}};
  bool bump_pass = false;
  try {
    const LogLogFit f = loglog_fit(amps, defects);
    bump["slope"] = f.slope;
    bump["r_squared"] = f.r_squared;
    bump_pass = f.slope >= lo && f.slope <= hi;
  } catch (const FitError& e) {
    bump["error"] = e.what();
  }
  bump["pass"] = bump_pass;

  json r{{"levels", study.levels.size()},
         {"finest_resolution", {finest.nu, finest.nv}},
         {"area", finest.result.area},
         {"flux", {finest.result.flux[0], finest.result.flux[1], finest.result.flux[2]}},
         {"defect", finest.result.defect},
         {"defect_ratio", ratio},
         {"extrapolated_area", study.extrapolated_area},
         {"homology_note", kSegmentSelfIntersection},
         {"bump", bump},
         {"thresholds", {{"defect_ratio", ratio_tol}, {"bump_slope", band(lo, hi)}}}};

  if (lookup(doc, "calibrate.descent.enabled", false)) {
    DescentOptions d;
    d.enabled = true;
    d.iterations = lookup(doc, "calibrate.descent.iterations", d.iterations);
    d.step = lookup(doc, "calibrate.descent.step", d.step);
    const double amp = amps.empty() ? 0.04 : amps.back();
    const DescentResult out =
        area_descent(bump_segment_sphere(config, a, b, res[0], res[1], normal, amp), config, d);
    r["descent"] = {{"experimental", true}, {"areas", out.areas}};
  }
  r["pass"] = std::abs(ratio) <= ratio_tol && bump_pass;
  return {r, {{"calibrate.csv", csv.str()}, {"calibrate_bump.csv", bcsv.str()}}};
}

}  // namespace

VerbOutput run_verb(Verb verb, const json& config_doc, int threads) {
  const MonopoleConfig config = config_from_json(config_doc);
  switch (verb) {
    case Verb::verify: return verify(config, config_doc, threads);
    case Verb::scaling: return scaling(config, config_doc, threads);
    case Verb::asymptotics: return asymptotics(config, config_doc, threads);
    case Verb::curvature: return curvature(config, config_doc, threads);
    case Verb::volume: return volume(config, config_doc, threads);
    case Verb::calibrate: return calibrate(config, config_doc, threads);
  }
  throw ConfigError("unhandled verb");
}

namespace {

json load_config(const Command& cmd) {
  std::ifstream in(cmd.config_path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", cmd.config_path));
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ConfigError(fmt::format("config '{}' is not a JSON object", cmd.config_path));
  }
  for (const std::string& o : cmd.overrides) apply_override(doc, o);
  if (cmd.seed) {
    for (const char* key : {"samples.seed", "scaling.seed", "curvature.seed"}) {
      apply_override(doc, fmt::format("{}={}", key, *cmd.seed));
    }
  }
  return doc;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

}  // namespace

int run(const Command& cmd) {
  const auto start = std::chrono::steady_clock::now();
  try {
    if (cmd.threads < 1) throw ConfigError("--threads must be >= 1");
    const json doc = load_config(cmd);
    const VerbOutput out = run_verb(cmd.verb, doc, cmd.threads);
    std::error_code ec;
    std::filesystem::create_directories(cmd.out_dir, ec);
    if (ec) throw ConfigError(fmt::format("cannot create '{}': {}", cmd.out_dir, ec.message()));
    const std::filesystem::path dir(cmd.out_dir);
    for (const auto& [name, text] : out.files) write_file(dir / name, text);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    write_file(dir / "summary.json", report_envelope(verb_name(cmd.verb), doc, out.results, ms).dump(2) + "\n");
    const bool pass = out.results.at("pass").get<bool>();
    std::cout << fmt::format("{}: {}\n", verb_name(cmd.verb), pass ? "pass" : "FAIL");
    return pass ? exit_code::pass : exit_code::threshold_failure;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const Error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return exit_code::domain_error;
  }
}

}  // namespace alf
