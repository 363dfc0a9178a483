#include "alf/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "alf/errors.hpp"

namespace alf {

void SampleSpec::validate() const {
  if (!(r_min > 0.0) || !(r_max >= r_min) || !std::isfinite(r_max)) {
    throw ConfigError(fmt::format("sample radial range [{}, {}] invalid", r_min, r_max));
  }
  if (radial_count < 2 || angular_count < 2) {
    throw ConfigError("sample radial_count and angular_count must be >= 2");
  }
}

SampleSpec sample_spec_from_json(const nlohmann::json& doc, SampleSpec spec) {
  try {
    if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("radial_range")) {
      const auto& r = doc.at("radial_range");
      if (!r.is_array() || r.size() != 2) throw ConfigError("radial_range must be [r_min, r_max]");
      spec.r_min = r[0].get<double>();
      spec.r_max = r[1].get<double>();
    }
    if (doc.contains("radial_count")) spec.radial_count = doc.at("radial_count").get<int>();
    if (doc.contains("angular_count")) spec.angular_count = doc.at("angular_count").get<int>();
    if (doc.contains("scheme") && doc.at("scheme").get<std::string>() != "LOG_RADIAL_FIBONACCI") {
      throw ConfigError("only the LOG_RADIAL_FIBONACCI sampling scheme is supported");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed samples block: {}", e.what()));
  }
  spec.validate();
  return spec;
}

nlohmann::json sample_spec_to_json(const SampleSpec& spec) {
  return {{"seed", spec.seed},
          {"radial_range", {spec.r_min, spec.r_max}},
          {"radial_count", spec.radial_count},
          {"angular_count", spec.angular_count},
          {"scheme", "LOG_RADIAL_FIBONACCI"}};
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t key = splitmix64(splitmix64(seed ^ 0x5851f42d4c957f2dULL) ^ stream);
  const std::uint64_t bits = splitmix64(key + index * 0xd1b54a32d192ed03ULL);
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

Mat3 counter_rotation(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  // Shoemake's uniform unit quaternion.
  const double u1 = counter_uniform(seed, stream, 3 * index);
  const double u2 = counter_uniform(seed, stream, 3 * index + 1);
  const double u3 = counter_uniform(seed, stream, 3 * index + 2);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  Eigen::Quaterniond q(b * std::cos(kTwoPi * u3), a * std::sin(kTwoPi * u2),
                       a * std::cos(kTwoPi * u2), b * std::sin(kTwoPi * u3));
  return q.normalized().toRotationMatrix();
}

std::vector<Vec3> fibonacci_sphere(int n) {
  std::vector<Vec3> out;
  out.reserve(n);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    out.emplace_back(rho * std::cos(phi), rho * std::sin(phi), z);
  }
  return out;
}

SampleSet sample_points(const SampleSpec& spec, const MonopoleConfig& config) {
  spec.validate();
  const std::vector<Vec3> dirs = fibonacci_sphere(spec.angular_count);
  SampleSet set;
  for (int i = 0; i < spec.radial_count; ++i) {
    const double t = static_cast<double>(i) / (spec.radial_count - 1);
    const double r = spec.r_min * std::pow(spec.r_max / spec.r_min, t);
    const Mat3 rot = counter_rotation(spec.seed, 1, static_cast<std::uint64_t>(i));
    for (int j = 0; j < spec.angular_count; ++j) {
      const std::uint64_t idx = static_cast<std::uint64_t>(i) * spec.angular_count + j;
      ChartPoint p;
      p.base = r * (rot * dirs[j]);
      p.fiber = kTwoPi * counter_uniform(spec.seed, 2, idx);
      if (config.admissible(p.base)) {
        set.points.push_back(p);
      } else {
        ++set.dropped;
      }
    }
  }
  if (set.points.empty()) throw ConfigError("sample spec yields no admissible points");
  return set;
}

LogLogFit loglog_fit(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw FitError("loglog_fit: xs and ys differ in length");
  if (xs.size() < 3) throw FitError("loglog_fit needs at least 3 points");
  const std::size_t n = xs.size();
  double mx = 0.0;
  double my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0) || !std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw FitError(fmt::format("loglog_fit: nonpositive data at index {} ({}, {})", i, xs[i], ys[i]));
    }
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) throw FitError("loglog_fit: all x values coincide");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ly[i] - (intercept + slope * lx[i]);
    ss_res += e * e;
  }
  const double r2 = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  return {slope, intercept, r2};
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_index = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string json_digest(const nlohmann::json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string format_double(double v) { return fmt::format("{}", v); }

CsvWriter::CsvWriter(std::vector<std::string> columns) : width_(columns.size()) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) text_ += ',';
    text_ += columns[i];
  }
  text_ += '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != width_) throw ShapeError("CSV row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) text_ += ',';
    text_ += format_double(values[i]);
  }
  text_ += '\n';
}

std::string CsvWriter::str() const { return text_; }

void CsvWriter::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path));
  out << text_;
}

nlohmann::json report_envelope(const std::string& command, const nlohmann::json& config,
                               nlohmann::json results, double elapsed_ms) {
  return {{"tool_version", ALF_VERSION},
          {"config_digest", json_digest(config)},
          {"command", command},
          {"results", std::move(results)},
          {"timings", {{"elapsed_ms", elapsed_ms}}}};
}

}  // namespace alf
