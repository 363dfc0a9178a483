#include "alf/forms.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "alf/errors.hpp"

namespace alf {

TwoForm basis_2form(int a, int b) {
  TwoForm w = TwoForm::Zero();
  w(a, b) = 1.0;
  w(b, a) = -1.0;
  return w;
}

CoTriple CoTriple::operator*(double s) const {
  return {{omega[0] * s, omega[1] * s, omega[2] * s}};
}

CoTriple operator+(const CoTriple& a, const CoTriple& b) {
  return {{a.omega[0] + b.omega[0], a.omega[1] + b.omega[1], a.omega[2] + b.omega[2]}};
}

CoTriple flat_triple() {
  CoTriple t;
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    const int k = (i + 2) % 3;
    t.omega[i] = basis_2form(i, kFiber) + basis_2form(j, k);
  }
  return t;
}

CoTriple rotate_index(const CoTriple& t, const Mat3& R) {
  CoTriple out;
  for (int i = 0; i < 3; ++i) {
    out.omega[i] = R(i, 0) * t.omega[0] + R(i, 1) * t.omega[1] + R(i, 2) * t.omega[2];
  }
  return out;
}

double ThreeForm::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

namespace {

void require_antisymmetric(const TwoForm& a) {
  for (int i = 0; i < 4; ++i) {
    if (a(i, i) != 0.0) throw ShapeError("2-form has a nonzero diagonal entry");
    for (int j = i + 1; j < 4; ++j) {
      if (a(i, j) != -a(j, i)) throw ShapeError("2-form matrix is not antisymmetric");
    }
  }
}

double wedge_unchecked(const TwoForm& a, const TwoForm& b) {
  return a(0, 1) * b(2, 3) - a(0, 2) * b(1, 3) + a(0, 3) * b(1, 2) + a(1, 2) * b(0, 3) -
         a(1, 3) * b(0, 2) + a(2, 3) * b(0, 1);
}

void require_triple(const CoTriple& t) {
  for (const TwoForm& w : t.omega) require_antisymmetric(w);
}

// Inverse of an antisymmetric 4x4 matrix: W^-1 = -(*W) / Pf(W).
TwoForm antisymmetric_inverse(const TwoForm& w) {
  const double pf = w(0, 1) * w(2, 3) - w(0, 2) * w(1, 3) + w(0, 3) * w(1, 2);
  if (pf == 0.0) throw DefiniteError("degenerate 2-form (zero Pfaffian)");
  TwoForm dual = TwoForm::Zero();
  dual(0, 1) = w(2, 3);
  dual(0, 2) = -w(1, 3);
  dual(0, 3) = w(1, 2);
  dual(1, 2) = w(0, 3);
  dual(1, 3) = -w(0, 2);
  dual(2, 3) = w(0, 1);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) dual(j, i) = -dual(i, j);
  return -dual / pf;
}

}  // namespace

double wedge_2_2(const TwoForm& a, const TwoForm& b) {
  require_antisymmetric(a);
  require_antisymmetric(b);
  return wedge_unchecked(a, b);
}

QMatrix q_operator(const CoTriple& t) {
  require_triple(t);
  QMatrix q;
  for (int j = 0; j < 3; ++j)
    for (int k = j; k < 3; ++k) {
      q.entries(j, k) = wedge_unchecked(t.omega[j], t.omega[k]);
      q.entries(k, j) = q.entries(j, k);
    }
  const double third = q.entries.trace() / 3.0;
  for (int j = 0; j < 3; ++j) q.entries(j, j) -= third;
  return q;
}

double triple_volume(const CoTriple& t) {
  require_triple(t);
  double s = 0.0;
  for (const TwoForm& w : t.omega) s += wedge_unchecked(w, w);
  return s / 6.0;
}

double q_defect(const CoTriple& t) {
  const double mu = triple_volume(t);
  if (mu == 0.0) throw DefiniteError("triple volume is zero");
  return q_operator(t).frobenius() / std::abs(mu);
}

Mat4 metric_from_triple(const CoTriple& t, const RecoveryTolerance& tol) {
  const double mu = triple_volume(t);
  if (!(mu > 0.0)) throw DefiniteError(fmt::format("triple volume {} is not positive", mu));
  const double defect = q_operator(t).frobenius() / mu;
  if (defect > tol.q_defect) {
    throw DefiniteError(fmt::format("triple Q-defect {:.3e} exceeds {:.3e}", defect, tol.q_defect));
  }
  const Mat4 J = -antisymmetric_inverse(t.omega[1]) * t.omega[2];
  const Mat4 g = t.omega[0] * J;
  const double scale = g.cwiseAbs().maxCoeff();
  const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol.asymmetry * scale) {
    throw DefiniteError(fmt::format("recovered metric asymmetry {:.3e} exceeds tolerance", asym / scale));
  }
  const Mat4 sym = 0.5 * (g + g.transpose());
  Eigen::LLT<Mat4> llt(sym);
  if (llt.info() != Eigen::Success) throw DefiniteError("recovered metric is not positive definite");
  return sym;
}

double frame_norm(const ThreeForm& form, const Mat4& metric) {
  Eigen::LLT<Mat4> llt(metric);
  if (llt.info() != Eigen::Success) throw DefiniteError("frame_norm needs a positive definite metric");
  // g = L L^T; orthonormal coframe theta = L^T dx, so dx = L^-T theta.
  const Mat4 L = llt.matrixL();
  const Mat4 M = L.transpose().inverse();
  double sum = 0.0;
  for (int p = 0; p < 4; ++p)
    for (int q = p + 1; q < 4; ++q)
      for (int r = q + 1; r < 4; ++r) {
        double c = 0.0;
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b)
            for (int d = 0; d < 4; ++d) {
              const double v = form(a, b, d);
              if (v != 0.0) c += v * M(a, p) * M(b, q) * M(d, r);
            }
        sum += c * c;
      }
  return std::sqrt(sum);
}

}  // namespace alf
