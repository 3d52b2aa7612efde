#pragma once

// The double: two copies of the model glued along the boundary.
//
// On H + H with grading gamma + (-gamma), the operator D + D restricted to
//   S = {(xi, eta) in Dom(n) + Dom(n) : R(eta - n gamma xi) = 0}
// is self-adjoint.  The mechanism is visible in trace coordinates: S traces
// out the graph {(x, m x)} of m = (n gamma)_b, and
//   omega~((x, m x), (y, m y)) = x^dag (Omega + m^dag Omega m) y,
// so the graph is lagrangian exactly when m^dag Omega m = -Omega.  That
// identity follows from skewness, the unit square and oddness of n, which is
// why build_double insists on a verified Clifford normal.
//
// Ungraded models are doubled after tensoring with the one-generator
// Clifford algebra: D -> [[0, D], [D, 0]] graded by [[1, 0], [0, -1]], the
// generator acting as the first Pauli symmetry.

#include <string>
#include <utility>
#include <vector>

#include "gex/green_model.hpp"
#include "gex/normal.hpp"

namespace gex {

struct DoubledOperator {
  GradedSpace ambient;  // H + H with grading gamma + (-gamma)
  Matrix action;        // D + D on the ambient space
  Matrix constraint;    // G-orthonormal basis of S
  Matrix compressed;    // action in S coordinates, Hermitian to round-off
  Matrix trace;         // stacked trace map (R, R): ambient -> C^{2b}
  Matrix gluing;        // m = (n gamma)_b; the S-trace is the graph of m
  Matrix omega2;        // doubled boundary form matrix Omega + Omega
  AlgebraModel algebra; // pairs (a, b) with a - b in the ideal

  Eigen::Index dim() const { return ambient.inner.dim(); }
  Eigen::Index sdim() const { return constraint.cols(); }
};

// Lift an ungraded model through the one-generator Clifford algebra: the
// lifted operator is odd for the block grading and the lifted normal
// satisfies the same seven conditions.
inline std::pair<GreenOperatorModel, CliffordNormal> clifford_lift(
    const GreenOperatorModel& m, const CliffordNormal& cn) {
  const Eigen::Index N = m.dim();
  const Eigen::Index b = m.bdim();
  const Matrix& G = m.inner().gram;

  GreenOperatorModel out;
  Matrix G2 = Matrix::Zero(2 * N, 2 * N);
  G2.topLeftCorner(N, N) = G;
  G2.bottomRightCorner(N, N) = G;
  Matrix gamma = Matrix::Zero(2 * N, 2 * N);
  gamma.topLeftCorner(N, N) = Matrix::Identity(N, N);
  gamma.bottomRightCorner(N, N) = -Matrix::Identity(N, N);
  out.space = GradedSpace(InnerProduct(G2), gamma);

  out.D = Matrix::Zero(2 * N, 2 * N);
  out.D.topRightCorner(N, N) = m.D;
  out.D.bottomLeftCorner(N, N) = m.D;
  out.oddness = true;

  out.R = Matrix::Zero(2 * b, 2 * N);
  out.R.topLeftCorner(b, N) = m.R;
  out.R.bottomRightCorner(b, N) = m.R;
  Matrix Gb2 = Matrix::Zero(2 * b, 2 * b);
  Gb2.topLeftCorner(b, b) = m.bmetric.gram;
  Gb2.bottomRightCorner(b, b) = m.bmetric.gram;
  out.bmetric = InnerProduct(Gb2);
  out.nu = Matrix::Zero(2 * b, 2 * b);
  out.nu.topRightCorner(b, b) = m.nu;
  out.nu.bottomLeftCorner(b, b) = m.nu;

  for (const auto& e : m.algebra.elements) {
    Matrix a = Matrix::Zero(2 * N, 2 * N);
    a.topLeftCorner(N, N) = e.matrix;
    a.bottomRightCorner(N, N) = e.matrix;
    out.algebra.elements.push_back({e.name, std::move(a), e.ideal});
  }

  CliffordNormal lifted;
  lifted.n = Matrix::Zero(2 * N, 2 * N);
  lifted.n.topRightCorner(N, N) = cn.n;
  lifted.n.bottomLeftCorner(N, N) = cn.n;
  lifted.ndom = Matrix::Zero(2 * N, 2 * cn.ndom.cols());
  lifted.ndom.topLeftCorner(N, cn.ndom.cols()) = cn.ndom;
  lifted.ndom.bottomRightCorner(N, cn.ndom.cols()) = cn.ndom;
  return {std::move(out), std::move(lifted)};
}

inline DoubledOperator build_double(const GreenOperatorModel& m, const CliffordNormal& cn) {
  if (!m.oddness)
    throw std::invalid_argument(
        "build_double: model is ungraded; apply clifford_lift first");

  // A verified normal is what makes the gluing self-adjoint.  If any
  // condition fails, S cannot be lagrangian; cite the worst offender.
  const auto reports = check_normal(m, cn);
  for (const auto& r : reports)
    if (!r.passed)
      throw std::domain_error("build_double: S is not lagrangian because normal condition '" +
                              r.name + "' fails (measured " + format_scalar(r.measured) + ")");

  const Eigen::Index N = m.dim();
  const Eigen::Index b = m.bdim();
  const Matrix& G = m.inner().gram;
  const Matrix& B = cn.ndom;
  const Eigen::Index d = B.cols();

  DoubledOperator dbl;
  Matrix G2 = Matrix::Zero(2 * N, 2 * N);
  G2.topLeftCorner(N, N) = G;
  G2.bottomRightCorner(N, N) = G;
  Matrix gamma2 = Matrix::Zero(2 * N, 2 * N);
  gamma2.topLeftCorner(N, N) = m.space.grading;
  gamma2.bottomRightCorner(N, N) = -m.space.grading;
  dbl.ambient = GradedSpace(InnerProduct(G2), gamma2);

  dbl.action = Matrix::Zero(2 * N, 2 * N);
  dbl.action.topLeftCorner(N, N) = m.D;
  dbl.action.bottomRightCorner(N, N) = m.D;

  dbl.trace = Matrix::Zero(2 * b, 2 * N);
  dbl.trace.topLeftCorner(b, N) = m.R;
  dbl.trace.bottomRightCorner(b, N) = m.R;

  const Matrix ngamma = cn.n * m.space.grading;
  dbl.gluing = boundary_descent(m, ngamma, B);
  const Matrix omega = m.omega_matrix();
  dbl.omega2 = Matrix::Zero(2 * b, 2 * b);
  dbl.omega2.topLeftCorner(b, b) = omega;
  dbl.omega2.bottomRightCorner(b, b) = omega;

  // S in Dom(n) + Dom(n) coefficients: R B c2 - R (n gamma) B c1 = 0.
  Matrix C(b, 2 * d);
  C.leftCols(d) = -(m.R * ngamma * B);
  C.rightCols(d) = m.R * B;
  const Matrix K = nullspace(C);
  Matrix lift = Matrix::Zero(2 * N, K.cols());
  lift.topRows(N) = B * K.topRows(d);
  lift.bottomRows(N) = B * K.bottomRows(d);
  dbl.constraint = orthonormalize(lift, dbl.ambient.inner);
  dbl.compressed = dbl.constraint.adjoint() * G2 * dbl.action * dbl.constraint;

  // The graph identity m^dag Omega m = -Omega is the lagrangian condition;
  // guarded here so a defective gluing cannot produce a silent non-self-
  // adjoint double.
  const Matrix defect = dbl.gluing.adjoint() * omega * dbl.gluing + omega;
  if (defect.norm() > 1e-8 * std::max(omega.norm(), 1.0)) {
    std::string worst = reports.front().name;
    double margin = -1e300;
    for (const auto& r : reports)
      if (r.measured - r.bound > margin) {
        margin = r.measured - r.bound;
        worst = r.name;
      }
    throw std::domain_error("build_double: S is not lagrangian; closest normal condition '" +
                            worst + "' (graph defect " + format_scalar(defect.norm()) + ")");
  }

  for (const auto& e : m.algebra.elements) {
    Matrix both = Matrix::Zero(2 * N, 2 * N);
    both.topLeftCorner(N, N) = e.matrix;
    both.bottomRightCorner(N, N) = e.matrix;
    dbl.algebra.elements.push_back({e.name, std::move(both), e.ideal});
    if (e.ideal) {
      Matrix first = Matrix::Zero(2 * N, 2 * N);
      first.topLeftCorner(N, N) = e.matrix;
      dbl.algebra.elements.push_back({e.name + "-first-copy", std::move(first), true});
      Matrix second = Matrix::Zero(2 * N, 2 * N);
      second.bottomRightCorner(N, N) = e.matrix;
      dbl.algebra.elements.push_back({e.name + "-second-copy", std::move(second), true});
    }
  }
  return dbl;
}

// Kernel basis of the minimal operator: D xi = 0 with vanishing traces.
inline Matrix minimal_kernel(const GreenOperatorModel& m) {
  Matrix stack(m.bdim() + m.dim(), m.dim());
  stack.topRows(m.bdim()) = m.R;
  stack.bottomRows(m.dim()) = m.D;
  return orthonormalize(nullspace(stack), m.inner());
}

inline std::vector<CheckReport> check_double(const GreenOperatorModel& m,
                                             const DoubledOperator& dbl) {
  std::vector<CheckReport> out;
  const Matrix& G2 = dbl.ambient.inner.gram;
  const Eigen::Index b = m.bdim();

  {
    const double scale = std::max(dbl.compressed.norm(), 1.0);
    out.push_back(make_report("double-symmetric-on-s",
                              (dbl.compressed - dbl.compressed.adjoint()).norm() / scale,
                              0.0, 1e-12));
  }
  {
    // Trace space of S: isotropic for the doubled form and of half dimension.
    const Matrix T = dbl.trace * dbl.constraint;
    const Matrix iso = T.adjoint() * dbl.omega2 * T;
    out.push_back(make_report("double-trace-isotropic",
                              iso.norm() / std::max(1.0, (T.adjoint() * T).norm()), 0.0, 1e-10));
    Eigen::JacobiSVD<Matrix> svd(T);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > 1e-8 * svd.singularValues()(0)) ++rank;
    out.push_back(make_report("double-trace-half-dimensional",
                              double(std::abs(rank - b)), 0.0, 0.0,
                              {{"rank", std::to_string(rank)},
                               {"boundary_dim", std::to_string(b)}}));
  }
  {
    const Matrix omega = m.omega_matrix();
    const Matrix defect = dbl.gluing.adjoint() * omega * dbl.gluing + omega;
    out.push_back(make_report("double-gluing-involution",
                              defect.norm() / std::max(omega.norm(), 1.0), 0.0, 1e-10));
  }
  {
    const Matrix anti = dbl.action * dbl.ambient.grading + dbl.ambient.grading * dbl.action;
    out.push_back(make_report("double-grading-odd",
                              anti.norm() / std::max(dbl.action.norm(), 1.0), 0.0, 1e-12));
  }
  {
    // Every doubled-algebra element maps S into S.
    const Matrix PS = dbl.constraint * dbl.constraint.adjoint() * G2;
    const Matrix id = Matrix::Identity(dbl.dim(), dbl.dim());
    double worst = 0.0;
    for (const auto& e : dbl.algebra.elements) {
      const Matrix img = e.matrix * dbl.constraint;
      worst = std::max(worst, ((id - PS) * img).norm() / std::max(e.matrix.norm(), 1.0));
    }
    out.push_back(make_report("double-algebra-preserves-s", worst, 0.0, 1e-10));
  }
  {
    // ker(double) = ker(D_min) + ker(D_min), as projectors.
    const Matrix kmin = minimal_kernel(m);
    Matrix kk = Matrix::Zero(dbl.dim(), 2 * kmin.cols());
    kk.topLeftCorner(m.dim(), kmin.cols()) = kmin;
    kk.bottomRightCorner(m.dim(), kmin.cols()) = kmin;

    Eigensystem es = hermitian_eigensystem(dbl.compressed,
                                           InnerProduct::euclidean(dbl.sdim()));
    double top = 0.0;
    for (Eigen::Index i = 0; i < es.values.size(); ++i)
      top = std::max(top, std::abs(es.values(i)));
    std::vector<Eigen::Index> zero;
    double minabs = top;
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
      const double a = std::abs(es.values(i));
      if (a <= kKernelCutoffRel * std::max(top, 1.0)) zero.push_back(i);
      else minabs = std::min(minabs, a);
    }
    Matrix kd(dbl.dim(), static_cast<Eigen::Index>(zero.size()));
    for (std::size_t j = 0; j < zero.size(); ++j)
      kd.col(static_cast<Eigen::Index>(j)) = dbl.constraint * es.vectors.col(zero[j]);

    const Matrix pk = kd.cols() ? Matrix(kd * kd.adjoint() * G2)
                                : Matrix(Matrix::Zero(dbl.dim(), dbl.dim()));
    const Matrix pm = kk.cols() ? Matrix(kk * kk.adjoint() * G2)
                                : Matrix(Matrix::Zero(dbl.dim(), dbl.dim()));
    out.push_back(make_report(
        "double-kernel-splits", (pk - pm).norm(), 0.0, 1e-10,
        {{"kernel_dim", std::to_string(kd.cols())},
         {"minimal_kernel_dim", std::to_string(kmin.cols())},
         {"smallest_nonzero_abs_eigenvalue", format_scalar(minabs)}}));
  }
  return out;
}

// Eigenvalues of the self-adjoint double, ascending.
inline RealVector double_spectrum(const DoubledOperator& dbl) {
  Eigensystem es = hermitian_eigensystem(dbl.compressed,
                                         InnerProduct::euclidean(dbl.sdim()));
  return es.values;
}

// Restriction of the double to a transverse half, inverting the gluing.
// Z must be an odd involution commuting with the action; H1 columns select a
// half with H1 perpendicular to Z H1 and H1 + Z H1 = ambient.  The returned
// model carries trace data re-extracted from its own Green defect, so it is
// Green-exact by construction.
inline GreenOperatorModel undouble(const DoubledOperator& dbl, const Matrix& Z,
                                   const Matrix& h1cols) {
  const Eigen::Index n2 = dbl.dim();
  const Matrix& G2 = dbl.ambient.inner.gram;
  const Matrix id = Matrix::Identity(n2, n2);

  if ((Z * Z - id).norm() > kStructTol * std::max(1.0, Z.norm() * Z.norm()))
    throw std::invalid_argument("undouble: Z is not an involution");
  if ((Z * dbl.ambient.grading + dbl.ambient.grading * Z).norm() >
      kStructTol * std::max(1.0, Z.norm()))
    throw std::invalid_argument("undouble: Z is not odd for the doubled grading");
  if ((Z * dbl.action - dbl.action * Z).norm() >
      kStructTol * std::max(1.0, dbl.action.norm()))
    throw std::invalid_argument("undouble: Z does not commute with the doubled action");

  const Matrix B1 = orthonormalize(h1cols, dbl.ambient.inner);
  const Matrix ZB1 = Z * B1;
  if ((B1.adjoint() * G2 * ZB1).norm() > 1e-10)
    throw std::invalid_argument("undouble: H1 is not perpendicular to Z H1");
  Matrix both(n2, B1.cols() + ZB1.cols());
  both.leftCols(B1.cols()) = B1;
  both.rightCols(ZB1.cols()) = ZB1;
  if (orthonormalize(both, dbl.ambient.inner).cols() != n2)
    throw std::invalid_argument("undouble: H1 + Z H1 does not span the double");

  const Matrix gamma1 = B1.adjoint() * G2 * dbl.ambient.grading * B1;
  if ((gamma1 * gamma1 - Matrix::Identity(B1.cols(), B1.cols())).norm() > 1e-10)
    throw std::invalid_argument("undouble: H1 is not invariant under the grading");

  GreenOperatorModel out;
  out.space = GradedSpace(InnerProduct::euclidean(B1.cols()), gamma1);
  out.D = B1.adjoint() * G2 * dbl.action * B1;

  // Re-extract trace data from the Green defect of the restriction:
  // W = D^dag - D is anti-Hermitian; i W is diagonalized and each nonzero
  // eigenvalue contributes one trace row with unit-modulus pairing.
  const Matrix W = out.D.adjoint() - out.D;
  Eigensystem es = hermitian_eigensystem(Matrix(Complex(0, 1) * W),
                                         InnerProduct::euclidean(B1.cols()));
  double top = 0.0;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    top = std::max(top, std::abs(es.values(i)));
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (std::abs(es.values(i)) > kKernelCutoffRel * std::max(top, 1.0)) keep.push_back(i);

  const Eigen::Index b = static_cast<Eigen::Index>(keep.size());
  out.R = Matrix::Zero(b, B1.cols());
  out.nu = Matrix::Zero(b, b);
  for (Eigen::Index j = 0; j < b; ++j) {
    const double lam = es.values(keep[static_cast<std::size_t>(j)]);
    out.R.row(j) = std::sqrt(std::abs(lam)) *
                   es.vectors.col(keep[static_cast<std::size_t>(j)]).adjoint();
    out.nu(j, j) = Complex(0, lam > 0 ? -1.0 : 1.0);
  }
  out.bmetric = InnerProduct::euclidean(b);

  const Matrix anti = out.D * gamma1 + gamma1 * out.D;
  out.oddness = anti.norm() <= kStructTol * std::max(out.D.norm(), 1.0);

  for (const auto& e : dbl.algebra.elements)
    out.algebra.elements.push_back({e.name, Matrix(B1.adjoint() * G2 * e.matrix * B1), e.ideal});
  return out;
}

}  // namespace gex
