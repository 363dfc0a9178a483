#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "alf/ansatz.hpp"

namespace alf {

enum class SampleScheme { log_radial_fibonacci };

struct SampleSpec {
  std::uint64_t seed = 20240917;
  double r_min = 0.2;
  double r_max = 8.0;
  int radial_count = 20;
  int angular_count = 10;
  SampleScheme scheme = SampleScheme::log_radial_fibonacci;

  void validate() const;
};

SampleSpec sample_spec_from_json(const nlohmann::json& doc, SampleSpec defaults = {});
nlohmann::json sample_spec_to_json(const SampleSpec& spec);

struct SampleSet {
  std::vector<ChartPoint> points;
  int dropped = 0;
};

/// Log-spaced radii (inclusive endpoints) times a Fibonacci sphere rotated by a
/// seeded random rotation per radius; fiber angles are seeded uniforms.
/// Points violating clearance are dropped and counted.
SampleSet sample_points(const SampleSpec& spec, const MonopoleConfig& config);

/// Counter-based uniform in [0, 1): a pure function of (seed, stream, index).
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Uniformly distributed rotation from three counter uniforms.
Mat3 counter_rotation(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// n points of the Fibonacci (golden-angle) sphere.
std::vector<Vec3> fibonacci_sphere(int n);

struct LogLogFit {
  double slope;
  double intercept;
  double r_squared;
};

/// Least squares of log y against log x.
LogLogFit loglog_fit(std::span<const double> xs, std::span<const double> ys);

/// Evaluates fn(i) for i in [0, n) on up to `threads` workers. Results are
/// stored by index, so any reduction over them is order-independent of the
/// schedule. The first exception (lowest index) is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// FNV-1a 64-bit digest of a canonical JSON dump, as 16 hex digits.
std::string json_digest(const nlohmann::json& doc);

/// Shortest round-trip decimal form, used for every CSV cell.
std::string format_double(double v);

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> columns);
  void row(const std::vector<double>& values);
  std::string str() const;
  void write(const std::string& path) const;

 private:
  std::size_t width_;
  std::string text_;
};

/// {tool_version, config_digest, command, results, timings}.
nlohmann::json report_envelope(const std::string& command, const nlohmann::json& config,
                               nlohmann::json results, double elapsed_ms);

}  // namespace alf
