#pragma once

#include <array>
#include <type_traits>

#include "alf/types.hpp"

namespace alf {

// A 2-form is an antisymmetric 4x4 matrix W with w = sum_{a<b} W(a,b) dx^a ^ dx^b
// in the ordered chart coframe (dx1, dx2, dx3, dt).
using TwoForm = Mat4;

TwoForm basis_2form(int a, int b);

struct CoTriple {
  std::array<TwoForm, 3> omega;

  CoTriple operator*(double s) const;
  friend CoTriple operator+(const CoTriple& a, const CoTriple& b);
};

/// omega_i = dx_i ^ dt + dx_j ^ dx_k, (i, j, k) cyclic.
CoTriple flat_triple();

/// Index rotation omega'_i = R_ij omega_j.
CoTriple rotate_index(const CoTriple& t, const Mat3& R);

/// Totally antisymmetric 3-form stored densely.
class ThreeForm {
 public:
  double operator()(int a, int b, int c) const { return c_[index(a, b, c)]; }
  double& operator()(int a, int b, int c) { return c_[index(a, b, c)]; }

  /// Largest |coefficient|.
  double max_abs() const;

 private:
  static constexpr int index(int a, int b, int c) { return 16 * a + 4 * b + c; }
  std::array<double, 64> c_{};
};

/// Symmetric traceless Q(omega)_jk = w_j ^ w_k - (1/3)(sum_i w_i^2) delta_jk,
/// as coefficients of dx1^dx2^dx3^dt.
struct QMatrix {
  Mat3 entries = Mat3::Zero();
  double frobenius() const { return entries.norm(); }
};

/// Coefficient of a ^ b relative to dx1^dx2^dx3^dt.
double wedge_2_2(const TwoForm& a, const TwoForm& b);
QMatrix q_operator(const CoTriple& t);
/// mu = (1/6) sum_i w_i^2.
double triple_volume(const CoTriple& t);
/// |Q|_F / mu: dimensionless and invariant under coframe changes.
double q_defect(const CoTriple& t);

struct RecoveryTolerance {
  double q_defect = 1e-10;
  double asymmetry = 1e-8;  // relative to max |g_ij|
};

/// The metric for which the triple is an orthogonal self-dual frame:
/// J = -(w2)^-1 w3, g(u, v) = w1(u, J v), symmetrized.
Mat4 metric_from_triple(const CoTriple& t, const RecoveryTolerance& tol = {});

/// Central-difference step; with richardson the h and h/2 quotients are
/// combined as (4 D(h/2) - D(h)) / 3.
struct FdStep {
  double h = 1e-4;
  bool richardson = false;
};

namespace detail {

template <class F>
auto partial(const F& f, const Vec4& x, int axis, const FdStep& step) {
  using R = std::decay_t<decltype(f(x))>;
  auto quotient = [&](double h) -> R {
    Vec4 xp = x;
    Vec4 xm = x;
    xp[axis] += h;
    xm[axis] -= h;
    R fp = f(xp);
    R fm = f(xm);
    return R((fp - fm) / (2.0 * h));
  };
  if (!step.richardson) return quotient(step.h);
  R coarse = quotient(step.h);
  R fine = quotient(0.5 * step.h);
  return R((4.0 * fine - coarse) / 3.0);
}

}  // namespace detail

/// Finite-difference exterior derivative of a 0-, 1- or 2-form field on the
/// 4-dimensional chart. The field is a callable taking the chart point (x, t)
/// and returning double, Vec4 or TwoForm. Exceptions thrown by the field on
/// stencil points propagate.
template <class F>
auto exterior_derivative(const F& field, const Vec4& x, const FdStep& step) {
  using R = std::decay_t<decltype(field(x))>;
  if constexpr (std::is_same_v<R, double>) {
    Vec4 d;
    for (int a = 0; a < 4; ++a) d[a] = detail::partial(field, x, a, step);
    return d;
  } else if constexpr (std::is_same_v<R, Vec4>) {
    std::array<Vec4, 4> dA;
    for (int a = 0; a < 4; ++a) dA[a] = detail::partial(field, x, a, step);
    TwoForm out = TwoForm::Zero();
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        out(a, b) = dA[a][b] - dA[b][a];
        out(b, a) = -out(a, b);
      }
    return out;
  } else {
    static_assert(std::is_same_v<R, TwoForm>, "field must return double, Vec4 or TwoForm");
    std::array<TwoForm, 4> dW;
    for (int a = 0; a < 4; ++a) dW[a] = detail::partial(field, x, a, step);
    ThreeForm out;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c) {
          if (a == b || b == c || a == c) continue;
          out(a, b, c) = dW[a](b, c) - dW[b](a, c) + dW[c](a, b);
        }
    return out;
  }
}

/// Norm of a 3-form in a g-orthonormal coframe, sqrt(sum_{p<q<r} c'_pqr^2).
double frame_norm(const ThreeForm& form, const Mat4& metric);

}  // namespace alf
