#include <doctest.h>

#include <cmath>

#include "alf/ansatz.hpp"
#include "alf/errors.hpp"
#include "alf/quadrature.hpp"
#include "alf/report.hpp"
#include "fixtures.hpp"

using namespace alf;

namespace {

double max_rel(const Mat4& a, const Mat4& b) {
  return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff();
}

// Fiber circle length by Gauss-Legendre quadrature of sqrt(g(d/dt, d/dt)).
double quadrature_fiber_length(const std::function<Mat4(double)>& metric_at) {
  const QuadratureRule q = gauss_legendre(16, 0.0, kTwoPi);
  double len = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) len += q.weights[i] * std::sqrt(metric_at(q.nodes[i])(3, 3));
  return len;
}

std::vector<ChartPoint> samples(const char* name, int radial = 10, int angular = 10) {
  SampleSpec spec;
  spec.radial_count = radial;
  spec.angular_count = angular;
  return sample_points(spec, fixtures::config(name)).points;
}

ChartPoint center_point(const Vec3& x, double t) { return {x, t, Frame::center}; }

}  // namespace

TEST_CASE("flat Gibbons-Hawking data") {
  const auto flat = fixtures::make(1.0, 0.3, {{3, 0, 0}}, 0.0, 0.0, false);
  for (const Vec3& x : {Vec3(0.1, 0.2, 0.3), Vec3(-3, 1, 0.5)}) {
    const ChartPoint p{x, 1.0, Frame::outer};
    CHECK(gh_metric(flat, p) == Mat4::Identity());
    CHECK((metric_from_triple(gh_triple(flat, p)) - Mat4::Identity()).norm() <= 1e-15);
  }
}

TEST_CASE("gh_metric and gh_triple at sampled points") {
  for (const char* name : {"k1", "k2", "k3"}) {
    const auto c = fixtures::config(name);
    const auto pts = samples(name);
    CHECK(pts.size() >= 80);
    for (const ChartPoint& p : pts) {
      const GaugeChart chart = gauge_avoiding(c, p.base);
      const Mat4 g = gh_metric(c, p, chart);
      const CoTriple t = gh_triple(c, p, chart);
      CHECK(Eigen::SelfAdjointEigenSolver<Mat4>(g).eigenvalues().minCoeff() > 0.0);
      CHECK(q_defect(t) <= 1e-13);
      CHECK(max_rel(metric_from_triple(t), g) <= 1e-12);
      const double h = eval_h(c, p.base);
      CHECK(triple_volume(t) == doctest::Approx(h / std::pow(c.epsilon(), 3)).epsilon(1e-12));
    }
  }
}

TEST_CASE("gh_triple is closed") {
  const auto c = fixtures::config("k2");
  const FdStep step{1e-4 * c.clearance(), false};
  for (const ChartPoint& p : samples("k2", 6, 6)) {
    const GaugeChart chart = gauge_avoiding(c, p.base);
    const Mat4 g = gh_metric(c, p, chart);
    for (int i = 0; i < 3; ++i) {
      auto field = [&](const Vec4& y) {
        return gh_triple(c, ChartPoint{y.head<3>(), y[3], Frame::outer}, chart).omega[i];
      };
      CHECK(frame_norm(exterior_derivative(field, p.coords(), step), g) <= 1e-6);
    }
  }
}

TEST_CASE("base block scaling") {
  const auto c = fixtures::config("k2");
  const ChartPoint p{{0.7, -0.4, 0.9}, 0.3, Frame::outer};
  const Mat4 g = gh_metric(c, p);
  const double h = eval_h(c, p.base);
  const Vec3 A = total_connection(c, p.base);
  const Mat3 expect = h / (c.epsilon() * c.epsilon()) * Mat3::Identity() + A * A.transpose() / h;
  CHECK((g.topLeftCorner<3, 3>() - expect).norm() <= 1e-14 * expect.norm());
  CHECK(g(3, 3) == doctest::Approx(1.0 / h).epsilon(1e-15));
}

TEST_CASE("fiber length") {
  const auto c = fixtures::config("k2");
  for (const ChartPoint& p : samples("k2", 4, 4)) {
    const auto metric_at = [&](double t) { return gh_metric(c, ChartPoint{p.base, t, Frame::outer}, gauge_avoiding(c, p.base)); };
    CHECK(quadrature_fiber_length(metric_at) == doctest::Approx(fiber_length(c, p)).epsilon(1e-8));
  }
  const ChartPoint q = center_point({4, 1, -2}, 0.0);
  const auto metric_at = [&](double t) { return ah_model_metric(c, center_point(q.base, t)); };
  CHECK(quadrature_fiber_length(metric_at) == doctest::Approx(fiber_length(c, q)).epsilon(1e-8));
}

TEST_CASE("positivity and frame errors") {
  const auto neg = fixtures::make(0.05, 0.3, {}, -2.0, {}, false);
  CHECK_THROWS_AS(gh_metric(neg, ChartPoint{{0.5, 0.3, 0.1}, 0, Frame::outer}), PositivityError);
  const auto c = fixtures::config("k2");
  CHECK_THROWS_AS(gh_metric(c, center_point({5, 0, 0}, 0)), DomainError);
  CHECK_THROWS_AS(ah_model_metric(c, ChartPoint{{5, 0, 0}, 0, Frame::outer}), DomainError);
  CHECK_THROWS_AS(ah_model_metric(c, center_point({2, 0, 0}, 0)), DomainError);
}

TEST_CASE("center model") {
  SUBCASE("leading asymptotic at eps = 0") {
    const auto c = fixtures::make(0.0, 0.3, {{1.5, 0.4, 0.3}}, {}, {}, false);
    const Vec3 x(3.0, -2.0, 2.5);
    const double V = 1.0 - 1.0 / x.norm();
    const Vec3 A = center_connection(c.gauge(), x);
    Mat4 expect = Mat4::Zero();
    expect.topLeftCorner<3, 3>() = V * Mat3::Identity();
    const Vec4 alpha(A[0], A[1], A[2], 1.0);
    expect += alpha * alpha.transpose() / V;
    CHECK(max_rel(ah_model_metric(c, center_point(x, 0.0)), expect) <= 1e-15);
  }
  SUBCASE("exact triple and closedness") {
    const auto c = fixtures::config("k2");
    for (std::uint64_t i = 0; i < 60; ++i) {
      const Vec3 dir = counter_rotation(3, 0, i) * Vec3::UnitZ();
      const Vec3 x = (1.0 / c.delta()) * (1.1 + 3.0 * counter_uniform(3, 1, i)) * dir;
      const ChartPoint p = center_point(x, kTwoPi * counter_uniform(3, 2, i));
      GaugeChart chart;
      chart.string_direction = -dir.cross(Vec3(0.3, 0.5, 0.8)).normalized();
      const Mat4 g = ah_model_metric(c, p, chart);
      const CoTriple t = ah_model_triple(c, p, chart);
      CHECK(Eigen::SelfAdjointEigenSolver<Mat4>(g).eigenvalues().minCoeff() > 0.0);
      CHECK(q_defect(t) <= 1e-13);
      CHECK(max_rel(metric_from_triple(t), g) <= 1e-12);
      if (i % 6 == 0) {
        for (int k = 0; k < 3; ++k) {
          auto field = [&](const Vec4& y) {
            return ah_model_triple(c, center_point(y.head<3>(), y[3]), chart).omega[k];
          };
          CHECK(frame_norm(exterior_derivative(field, p.coords(), FdStep{1e-4, false}), g) <= 1e-6);
        }
      }
    }
  }
}

TEST_CASE("center and outer potentials agree at the neck to third order") {
  const auto base = fixtures::config("k2");
  const Vec3 dir = Vec3(0.2, 0.9, -0.4).normalized();
  std::vector<double> gaps;
  for (double eps : {0.04, 0.02, 0.01}) {
    const auto c = base.with_epsilon(eps);
    const Vec3 xp = (c.delta() / eps) * dir;
    gaps.push_back(std::abs(eval_h(c, eps * xp) - eval_h_center(c, xp)));
  }
  // At |x'| = delta/eps the gap is eps^3 |x'|^2 ~ eps delta^2.
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) CHECK(gaps[i] / gaps[i + 1] == doctest::Approx(2.0).epsilon(0.1));
  CHECK(gaps.back() <= 0.01 * base.delta() * base.delta());
}

TEST_CASE("involution") {
  const auto c = fixtures::config("k3");
  for (const ChartPoint& p : samples("k3", 8, 8)) {
    const ChartPoint q = involution_pullback(p);
    const ChartPoint back = involution_pullback(q);
    CHECK((back.base - p.base).norm() == 0.0);
    CHECK(back.fiber == doctest::Approx(p.fiber).epsilon(1e-15));
    CHECK(eval_h(c, q.base) == doctest::Approx(eval_h(c, p.base)).epsilon(1e-15));
    // Mirrored string directions make the two charts mirror images.
    const GaugeChart chart = gauge_avoiding(c, p.base);
    GaugeChart mirrored = chart;
    mirrored.string_direction = -chart.string_direction;
    const Mat4 gp = gh_metric(c, p, chart);
    const Mat4 gq = gh_metric(c, q, mirrored);
    CHECK(max_rel(gq, gp) <= 1e-14);
    const Vec4 ev_p = Eigen::SelfAdjointEigenSolver<Mat4>(gp).eigenvalues();
    const Vec4 ev_q = Eigen::SelfAdjointEigenSolver<Mat4>(gq).eigenvalues();
    CHECK((ev_p - ev_q).norm() <= 1e-13 * ev_p.norm());
  }
  CHECK(wrap_angle(-1.0) == doctest::Approx(kTwoPi - 1.0));
  CHECK(wrap_angle(kTwoPi) == 0.0);
}
