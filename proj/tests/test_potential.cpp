#include <doctest.h>

#include <cmath>

#include <nlohmann/json.hpp>

#include "alf/errors.hpp"
#include "alf/forms.hpp"
#include "alf/potential.hpp"
#include "alf/report.hpp"
#include "fixtures.hpp"

using namespace alf;

namespace {

std::vector<Vec3> random_points(const MonopoleConfig& c, int n, std::uint64_t seed, double r_lo, double r_hi) {
  std::vector<Vec3> out;
  for (std::uint64_t i = 0; static_cast<int>(out.size()) < n; ++i) {
    const Vec3 d = counter_rotation(seed, 0, i) * Vec3::UnitZ();
    const double r = r_lo + (r_hi - r_lo) * counter_uniform(seed, 1, i);
    const Vec3 x = r * d;
    if (c.admissible(x) && c.admissible(-x)) out.push_back(x);
  }
  return out;
}

// Curl by central differences, step h.
template <class F>
Vec3 fd_curl(const F& A, const Vec3& x, double h) {
  Mat3 J;
  for (int j = 0; j < 3; ++j) {
    Vec3 xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    J.col(j) = (A(xp) - A(xm)) / (2 * h);
  }
  return {J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1)};
}

}  // namespace

TEST_CASE("eval_h hand values") {
  const auto c = fixtures::make(0.1, 0.4, {{1, 0, 0}});
  CHECK(eval_h(c, {2, 0, 0}) == doctest::Approx(1.0 - 0.05 + 0.05 / 3 + 0.05).epsilon(1e-14));
  CHECK(eval_h(c, {0, 0, 2}) == doctest::Approx(1.0 - 0.05 + 0.1 / std::sqrt(5.0)).epsilon(1e-14));
  CHECK(eval_h(c, {2, 0, 0}) == doctest::Approx(1.0166667).epsilon(1e-7));
  CHECK(eval_h(c, {0, 0, 2}) == doctest::Approx(0.9947214).epsilon(1e-7));
}

TEST_CASE("eval_h mirror symmetry") {
  const auto c = fixtures::config("k3");
  for (const Vec3& x : random_points(c, 100, 3, 0.2, 5.0)) CHECK(eval_h(c, -x) == doctest::Approx(eval_h(c, x)).epsilon(1e-15));
}

TEST_CASE("eval_h rejects points inside clearance") {
  const auto c = fixtures::config("k2");
  CHECK_THROWS_AS(eval_h(c, Vec3(0.01, 0, 0)), DomainError);
  CHECK_THROWS_AS(eval_h(c, c.points()[0] + Vec3(0.05, 0, 0)), DomainError);
  CHECK_THROWS_AS(eval_h(c, -c.points()[1]), DomainError);
}

TEST_CASE("grad_h") {
  SUBCASE("zero charges") {
    const auto c = fixtures::make(0.05, 0.3, {{1.5, 0, 0}}, 0.0, 0.0);
    CHECK(grad_h(c, {0.3, 0.2, 0.1}).norm() == 0.0);
  }
  SUBCASE("matches central differences") {
    const auto c = fixtures::config("k2");
    for (const Vec3& x : random_points(c, 50, 5, 0.3, 4.0)) {
      const double h = 1e-4 * x.norm();
      Vec3 fd;
      for (int j = 0; j < 3; ++j) {
        Vec3 xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        fd[j] = (eval_h(c, xp) - eval_h(c, xm)) / (2 * h);
      }
      CHECK((fd - grad_h(c, x)).norm() <= 1e-6 * grad_h(c, x).norm());
    }
  }
  SUBCASE("far field") {
    const auto c = fixtures::config("k3");
    const double m = asymptotic_mass(c);
    for (const Vec3& d : fibonacci_sphere(20)) {
      const Vec3 x = 1e3 * d;
      CHECK((grad_h(c, x) + m * x / std::pow(x.norm(), 3)).norm() <= 10.0 * std::pow(x.norm(), -3));
    }
  }
}

TEST_CASE("harmonicity of h") {
  const auto c = fixtures::config("k3");
  for (const Vec3& x : random_points(c, 60, 9, 0.2, 4.0)) {
    const double d = c.distance_to_singularity(x);
    const double h = 1e-3 * d;
    double lap = -6.0 * eval_h(c, x);
    double scale = 0.0;
    for (const Center& ctr : c.centers()) scale += std::abs(ctr.charge) / std::pow((x - ctr.position).norm(), 3);
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e[j] = h;
      lap += eval_h(c, x + e) + eval_h(c, x - e);
    }
    CHECK(std::abs(lap / (h * h)) <= 1e-5 * scale);
  }
}

TEST_CASE("eval_h_center") {
  const auto c = fixtures::make(0.01, 0.3, {{10, 0, 0}});
  CHECK(eval_h_center(c, {5, 0, 0}) == doctest::Approx(0.801).epsilon(1e-14));
  CHECK_THROWS_AS(eval_h_center(c, {3, 0, 0}), DomainError);
  const auto zero = fixtures::make(0.0, 0.6, {}, {}, {}, false);
  CHECK(eval_h_center(zero, {2, 0, 0}) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("outer and center potentials agree to third order at fixed x'") {
  const auto base = fixtures::config("k2");
  const Vec3 xp = Vec3(0.3, -0.5, 0.8).normalized() * (1.5 / base.delta());
  std::vector<double> diffs;
  for (double eps : {0.04, 0.02, 0.01}) {
    const auto c = base.with_epsilon(eps);
    diffs.push_back(std::abs(eval_h(c, eps * xp) - eval_h_center(c, xp)));
  }
  for (int i = 0; i + 1 < 3; ++i) {
    const double ratio = diffs[i] / diffs[i + 1];
    CHECK(ratio > 7.0);
    CHECK(ratio < 9.0);
  }
}

TEST_CASE("monopole_potential") {
  const GaugeChart chart;
  SUBCASE("zero charge") { CHECK(monopole_potential(0.0, Vec3::Zero(), chart, {1, 2, 3}).norm() == 0.0); }
  SUBCASE("curl equals the Coulomb field") {
    const Vec3 c(0.2, -0.1, 0.4);
    const double q = 0.7;
    auto A = [&](const Vec3& x) { return monopole_potential(q, c, chart, x); };
    for (std::uint64_t i = 0; i < 40; ++i) {
      const Vec3 x = c + (0.5 + counter_uniform(1, 2, i)) * (counter_rotation(1, 3, i) * Vec3(0.6, 0.0, 0.8));
      const Vec3 y = x - c;
      // Central differences lose accuracy as A blows up near the string.
      if (y.normalized().dot(chart.string_direction) > std::cos(0.3)) continue;
      const Vec3 coulomb = -q * y / std::pow(y.norm(), 3);
      CHECK((fd_curl(A, x, 1e-5) - coulomb).norm() <= 1e-6 * coulomb.norm());
    }
  }
  SUBCASE("axial symmetry about the string") {
    const Vec3 c(0.1, 0.2, 0.3);
    const Vec3 x = c + Vec3(0.4, -0.3, 0.5);
    for (double ang : {0.3, 1.7, 4.0}) {
      const Mat3 R = Eigen::AngleAxisd(ang, chart.string_direction).toRotationMatrix();
      const Vec3 a = monopole_potential(-1.0, c, chart, x);
      const Vec3 b = monopole_potential(-1.0, c, chart, c + R * (x - c));
      CHECK((b - R * a).norm() <= 1e-14);
    }
  }
  SUBCASE("GaugeError inside the string cone") {
    CHECK_THROWS_AS(monopole_potential(1.0, Vec3::Zero(), chart, Vec3(1e-4, 0, -1)), GaugeError);
  }
  SUBCASE("analytic Jacobian") {
    const Vec3 c(0.3, 0.1, -0.2);
    const Vec3 x(1.0, -0.5, 0.4);
    Mat3 fd;
    for (int j = 0; j < 3; ++j) {
      Vec3 xp = x, xm = x;
      xp[j] += 1e-6;
      xm[j] -= 1e-6;
      fd.col(j) = (monopole_potential(0.8, c, chart, xp) - monopole_potential(0.8, c, chart, xm)) / 2e-6;
    }
    CHECK((fd - monopole_potential_jacobian(0.8, c, chart, x)).norm() <= 1e-8);
  }
}

TEST_CASE("total_connection curvature is (1/eps) grad h") {
  const auto c = fixtures::config("k2");
  int checked = 0;
  for (const Vec3& x : random_points(c, 100, 21, 0.2, 4.0)) {
    const GaugeChart chart = gauge_avoiding(c, x);
    auto A = [&](const Vec3& y) { return total_connection(c, chart, y); };
    const double h = 1e-4 * c.distance_to_singularity(x);
    const Vec3 expect = grad_h(c, x) / c.epsilon();
    CHECK((fd_curl(A, x, h) - expect).norm() <= 1e-6 * expect.norm());
    // The mirror point carries the opposite curvature.
    const GaugeChart mchart = gauge_avoiding(c, -x);
    auto Am = [&](const Vec3& y) { return total_connection(c, mchart, y); };
    CHECK((fd_curl(Am, -x, h) + fd_curl(A, x, h)).norm() <= 1e-6 * expect.norm());
    ++checked;
  }
  CHECK(checked == 100);
  const auto zero = fixtures::make(0.05, 0.3, {{1.5, 0, 0}}, 0.0, 0.0);
  CHECK(total_connection(zero, Vec3(0.3, 0.2, 0.1)).norm() == 0.0);
}

TEST_CASE("asymptotic mass") {
  CHECK(asymptotic_mass(fixtures::config("k1")) == 0.0);
  const auto k3 = fixtures::make(0.1, 0.4, {{1.5, 0.4, 0.3}, {-0.5, 1.7, -0.6}, {0.6, -0.8, 1.6}});
  CHECK(asymptotic_mass(k3) == doctest::Approx(0.2).epsilon(1e-14));
  for (const char* name : {"k2", "k3"}) {
    const auto c = fixtures::config(name);
    const MassFit f = fit_asymptotic_mass(c);
    CHECK(std::abs(f.mass - f.expected) <= 0.01 * std::abs(f.expected));
  }
  SUBCASE("far-field remainder is O(|x|^-3)") {
    const auto c = fixtures::config("k3");
    const double m = asymptotic_mass(c);
    double worst = 0.0;
    for (double r : {1e2, 1e3, 1e4}) {
      for (const Vec3& d : fibonacci_sphere(12)) {
        worst = std::max(worst, std::abs(eval_h(c, r * d) - 1.0 - m / r) * r * r * r);
      }
    }
    CHECK(std::isfinite(worst));
    CHECK(worst < 1.0);
  }
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(fixtures::make(0.1, 0.3, {{1.5, 0, 0}}), ConfigError);   // eps >= delta^2
  CHECK_THROWS_AS(fixtures::make(0.05, 0.5, {{1.5, 0, 0}}), ConfigError);  // delta >= 1/2
  CHECK_THROWS_AS(fixtures::make(0.0, 0.3, {{1.5, 0, 0}}), ConfigError);
  CHECK_THROWS_AS(fixtures::make(0.05, 0.3, {{0.05, 0, 0}}), ConfigError);
  CHECK_THROWS_AS(fixtures::make(0.05, 0.3, {{1.5, 0, 0}, {1.5, 0, 0}}), ConfigError);
  CHECK_THROWS_AS(fixtures::make(0.05, 0.3, {{1.5, 0, 0}, {-1.5, 0, 0}}), ConfigError);
  MonopoleConfig::Params p;
  p.gauge.string_direction = {1, 1, 0};
  CHECK_THROWS_AS(MonopoleConfig::create(p), ConfigError);
}

TEST_CASE("singular set and defaults") {
  const auto c = fixtures::config("k2");
  CHECK(c.centers().size() == 5);
  CHECK(c.center_charge() == -c.epsilon());
  CHECK(c.pair_charge() == 0.5 * c.epsilon());
  CHECK(c.clearance() == doctest::Approx(0.1));
  const auto two = fixtures::config("two_tn");
  CHECK(two.centers().size() == 2);
  CHECK(two.admissible(Vec3::Zero()));
  const auto scaled = c.with_epsilon(0.02);
  CHECK(scaled.pair_charge() == doctest::Approx(0.01));
}

TEST_CASE("config JSON round trip") {
  const auto c = fixtures::config("k3");
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  nlohmann::json doc = config_to_json(c);
  doc["unrelated"] = 1;
  CHECK_NOTHROW(config_from_json(doc));
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"epsilon", 0.05}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"epsilon", "x"}, {"delta", 0.3}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"epsilon", 0.05}, {"delta", 0.3}, {"points", {{1, 2}}}}),
                  ConfigError);
}

TEST_CASE("gauge_avoiding keeps strings away from the point") {
  const auto c = fixtures::config("k2");
  for (const Vec3& x : random_points(c, 30, 4, 0.2, 4.0)) {
    const GaugeChart g = gauge_avoiding(c, x);
    for (const Center& ctr : c.centers()) CHECK_FALSE(g.excludes(ctr.position, x));
    CHECK_NOTHROW(total_connection(c, g, x));
  }
}
