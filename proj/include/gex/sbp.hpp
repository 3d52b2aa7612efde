#pragma once

// Summation-by-parts first-derivative operators on uniform grids.
//
// D1 = H^{-1} Q with H diagonal positive and  Q + Q^T = B = diag(-1,0,...,0,1).
// The identity holds bitwise, not just to round-off: the strictly upper
// triangle of the skew part is filled from the coefficient tables, the lower
// triangle is written as the exact negation of the same doubles, and the
// corners contribute exactly -1/2 and +1/2.  Every discrete integration by
// parts downstream is then exact in floating point.
//
// Tables are the standard diagonal-norm blocks:
//   order 2: H = h diag(1/2, 1, ..., 1, 1/2), interior stencil (-1/2, 0, 1/2).
//   order 4: H = h diag(17/48, 59/48, 43/48, 49/48, 1, ...),
//            interior stencil (1/12, -2/3, 0, 2/3, -1/12).
// Boundary closures are order 1 resp. 2, so D1 differentiates polynomials of
// degree <= 1 resp. <= 2 exactly at every node (higher in the interior).

#include <Eigen/Dense>
#include <stdexcept>

#include "gex/numkernel.hpp"

namespace gex {

struct SbpOperator {
  int order = 0;
  double h = 0.0;
  RealVector grid;      // nodes, ascending
  RealVector hdiag;     // H diagonal, includes the factor h
  Eigen::MatrixXd q;    // skew part plus corners; Q + Q^T = B bitwise

  Eigen::Index size() const { return grid.size(); }

  Eigen::MatrixXd d1() const { return hdiag.cwiseInverse().asDiagonal() * q; }

  Eigen::MatrixXd boundary() const {
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(size(), size());
    b(0, 0) = -1.0;
    b(size() - 1, size() - 1) = 1.0;
    return b;
  }

  InnerProduct inner() const { return InnerProduct(hdiag.cast<Complex>().asDiagonal()); }
};

inline SbpOperator build_sbp(int order, Eigen::Index n, double a, double b) {
  if (b <= a) throw std::invalid_argument("build_sbp: empty interval");
  if (order != 2 && order != 4) throw std::invalid_argument("build_sbp: unsupported order");
  if ((order == 2 && n < 4) || (order == 4 && n < 12))
    throw std::invalid_argument("build_sbp: grid too small for the boundary closures");

  SbpOperator op;
  op.order = order;
  op.h = (b - a) / static_cast<double>(n - 1);
  op.grid.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) op.grid(i) = a + op.h * static_cast<double>(i);

  op.hdiag = RealVector::Constant(n, op.h);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);  // strictly upper first

  if (order == 2) {
    op.hdiag(0) *= 0.5;
    op.hdiag(n - 1) *= 0.5;
    for (Eigen::Index i = 0; i + 1 < n; ++i) s(i, i + 1) = 0.5;
  } else {
    const double hw[4] = {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0};
    for (int i = 0; i < 4; ++i) {
      op.hdiag(i) *= hw[i];
      op.hdiag(n - 1 - i) *= hw[i];
    }
    // Strictly upper entries of the left closure block.
    const double q01 = 59.0 / 96.0, q02 = -1.0 / 12.0, q03 = -1.0 / 32.0;
    const double c1 = 2.0 / 3.0, c2 = -1.0 / 12.0;
    s(0, 1) = q01;
    s(0, 2) = q02;
    s(0, 3) = q03;
    s(1, 2) = q01;
    s(2, 3) = q01;
    s(2, 4) = c2;
    s(3, 4) = c1;
    s(3, 5) = c2;
    // Mirrored right closure: upper entry (i,j) equals the left-block entry
    // (n-1-j, n-1-i), written with the same table doubles, so the reversal
    // antisymmetry P Q P = -Q holds exactly.
    s(n - 2, n - 1) = q01;
    s(n - 3, n - 2) = q01;
    s(n - 3, n - 1) = q02;
    s(n - 4, n - 3) = q01;
    s(n - 4, n - 1) = q03;
    // Rows 4..n-5 carry the full interior stencil; rows n-5, n-6 reproduce
    // the mirrors of (2,4) and (3,5) with the same values.
    for (Eigen::Index i = 4; i + 4 < n; ++i) {
      s(i, i + 1) = c1;
      s(i, i + 2) = c2;
    }
  }

  // Reflect: exact negation makes s + s^T vanish bitwise.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) s(j, i) = -s(i, j);

  op.q = s;
  op.q(0, 0) = -0.5;
  op.q(n - 1, n - 1) = 0.5;
  return op;
}

}  // namespace gex
