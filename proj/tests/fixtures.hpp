#pragma once

// Shared test fixtures: small Green-exact models with known boundary forms.

#include "gex/green_model.hpp"
#include "gex/sbp.hpp"

namespace gexfix {

using namespace gex;

// One-component model of -i d/dx on [0,1]: b = 2 endpoint traces,
// boundary form omega(x,y) = i x0bar y0 - i x1bar y1 in trace order (0, 1).
inline GreenOperatorModel scalar_interval(Eigen::Index N, int order = 2) {
  const SbpOperator op = build_sbp(order, N, 0.0, 1.0);
  GreenOperatorModel m;
  m.space = GradedSpace::trivial(op.inner());
  m.D = Complex(0, -1) * op.d1().cast<Complex>();
  m.R = Matrix::Zero(2, N);
  m.R(0, 0) = 1.0;
  m.R(1, N - 1) = 1.0;
  m.bmetric = InnerProduct::euclidean(2);
  m.nu = Matrix::Zero(2, 2);
  m.nu(0, 0) = Complex(0, -1);
  m.nu(1, 1) = Complex(0, 1);
  m.algebra.elements.push_back({"one", Matrix::Identity(N, N), false});
  return m;
}

// All-boundary 2-dimensional model whose boundary form has signature (0,2):
// no lagrangian subspace exists.
inline GreenOperatorModel definite_form_model() {
  GreenOperatorModel m;
  m.space = GradedSpace::trivial(InnerProduct::euclidean(2));
  m.D = Complex(0, 0.5) * Matrix::Identity(2, 2);
  m.R = Matrix::Identity(2, 2);
  m.bmetric = InnerProduct::euclidean(2);
  m.nu = Complex(0, -1) * Matrix::Identity(2, 2);
  return m;
}

}  // namespace gexfix
