#pragma once

// Clifford normals and the boundary Hilbert space they induce.
//
// A normal is an odd, G-skew matrix n modelling Clifford multiplication by
// the inward unit normal, tapered into the interior.  Its domain Dom(n) is a
// declared subspace (the whole space for Green-exact scenarios).  The seven
// verification reports follow the definition of a Clifford normal:
//   1  n preserves the minimal domain and Dom(n) reaches the boundary
//   2  n star = -n
//   3  [D, n] symmetric on Dom(n)
//   4  [n, a] maps Dom(n) into the minimal domain for every algebra element
//   5  n^2 + 1 maps Dom(n) into the minimal domain
//   6  the form <xi, D n xi> - <D xi, n xi> is nonnegative on Dom(n)
//   7  the induced boundary pairing is nondegenerate
// The boundary inner product is  <[xi],[eta]>_n = omega(xi, n eta), with
// matrix  gram_n = Omega * nd  in trace coordinates, where nd is the descent
// of n to the quotient.

#include <map>
#include <string>
#include <vector>

#include "gex/green_model.hpp"
#include "gex/report.hpp"

namespace gex {

struct CliffordNormal {
  Matrix n;
  Matrix ndom;  // G-orthonormal columns spanning Dom(n)

  static CliffordNormal full_domain(const GreenOperatorModel& m, Matrix n) {
    CliffordNormal cn;
    cn.n = std::move(n);
    cn.ndom = orthonormalize(Matrix::Identity(m.dim(), m.dim()), m.inner());
    return cn;
  }
};

// Descent of an operator to trace coordinates on Dom(n): the matrix nd with
// R(n xi) = nd R(xi) for xi in Dom(n), least-squares when R(Dom(n)) is thin.
inline Matrix boundary_descent(const GreenOperatorModel& m, const Matrix& op,
                               const Matrix& ndom) {
  const Matrix X = m.R * ndom;
  const Matrix Y = m.R * op * ndom;
  const InnerProduct dom = InnerProduct::euclidean(ndom.cols());
  return Y * pseudoinverse_rect(X, dom, m.bmetric);
}

inline std::vector<CheckReport> check_normal(const GreenOperatorModel& m,
                                             const CliffordNormal& cn) {
  std::vector<CheckReport> out;
  const InnerProduct& ip = m.inner();
  const Matrix& G = ip.gram;
  const Matrix& B = cn.ndom;
  const double nscale = std::max(cn.n.norm(), 1.0);

  const Matrix Bmin = nullspace(m.R);

  {
    // 1: minimal domain preserved; the trace image of Dom(n) fills C^b.
    const double preserve = (m.R * cn.n * Bmin).norm() / nscale;
    Eigen::JacobiSVD<Matrix> svd(m.R * B);
    const RealVector& sv = svd.singularValues();
    const double span = sv.size() >= m.bdim() ? sv(m.bdim() - 1) : 0.0;
    const double span_defect = span >= 1e-8 ? 0.0 : 1e-8 - span;
    out.push_back(make_report("normal-1-domain", std::max(preserve, span_defect), 0.0, 1e-10,
                              {{"minimal_domain_residual", format_scalar(preserve)},
                               {"trace_span_sigma_min", format_scalar(span)}}));
  }
  {
    const Matrix nstar = adjoint_wrt(cn.n, ip, ip);
    out.push_back(
        make_report("normal-2-skew", (nstar + cn.n).norm() / nscale, 0.0, 1e-12));
  }
  {
    const Matrix K = m.D * cn.n - cn.n * m.D;
    const Matrix sym = B.adjoint() * (G * K - K.adjoint() * G) * B;
    const double scale = std::max((G * K).norm(), 1.0);
    out.push_back(make_report("normal-3-bracket-symmetric",
                              sym.cwiseAbs().maxCoeff() / scale, 0.0, 1e-10));
  }
  {
    double worst = 0.0;
    std::map<std::string, std::string> ctx;
    for (const auto& e : m.algebra.elements) {
      const Matrix bracket = cn.n * e.matrix - e.matrix * cn.n;
      const double r = (m.R * bracket * B).norm() / std::max(e.matrix.norm(), 1.0);
      ctx[e.name] = format_scalar(r);
      worst = std::max(worst, r);
    }
    out.push_back(make_report("normal-4-algebra-brackets", worst, 0.0, 1e-10, std::move(ctx)));
  }
  {
    const Matrix sq = cn.n * cn.n + Matrix::Identity(m.dim(), m.dim());
    out.push_back(make_report("normal-5-squares-to-minus-one",
                              (m.R * sq * B).norm() / nscale, 0.0, 1e-10));
  }
  {
    // 6: Hermitian part of the boundary-positivity form on Dom(n).
    const Matrix F = B.adjoint() * (G * m.D * cn.n - m.D.adjoint() * G * cn.n) * B;
    const Matrix H = 0.5 * (F + F.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(H);
    const double lmin = es.eigenvalues()(0);
    const double scale = std::max(H.norm(), 1.0);
    out.push_back(make_lower_bound_report("normal-6-positive", lmin / scale, -1e-10, 0.0));
  }
  {
    // 7: nondegenerate pairing; gram_n = Omega * nd must have no kernel.
    const Matrix nd = boundary_descent(m, cn.n, B);
    const Matrix gram_n = m.omega_matrix() * nd;
    Eigen::JacobiSVD<Matrix> svd(gram_n);
    const RealVector& sv = svd.singularValues();
    const double smin = sv.size() ? sv(sv.size() - 1) : 0.0;
    out.push_back(make_lower_bound_report("normal-7-pairing-injective", smin, 1e-8, 0.0));
  }
  return out;
}

struct BoundarySpace {
  Eigen::Index dim = 0;
  InnerProduct metric;   // gram_n as an inner product on trace coordinates
  Matrix nd;             // descent of n; nd^2 = -1, isometric for gram_n
  Matrix grading_b;      // boundary grading (even case) or -i nd (odd case)
  std::map<std::string, Matrix> rep;           // boundary representation
  std::map<std::string, double> rep_lip_ratio; // ||rep(a)||_n / lip_norm(a)
};

inline Matrix boundary_rep(const GreenOperatorModel& m, const CliffordNormal& cn,
                           const AlgebraElement& a) {
  if (a.ideal) return Matrix::Zero(m.bdim(), m.bdim());
  return boundary_descent(m, a.matrix, cn.ndom);
}

inline BoundarySpace boundary_gram(const GreenOperatorModel& m, const CliffordNormal& cn) {
  BoundarySpace bs;
  bs.dim = m.bdim();
  bs.nd = boundary_descent(m, cn.n, cn.ndom);
  const Matrix gram_n = m.omega_matrix() * bs.nd;
  if ((gram_n - gram_n.adjoint()).norm() > 1e-12 * std::max(gram_n.norm(), 1.0))
    throw std::domain_error("boundary_gram: pairing is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (gram_n + gram_n.adjoint()));
  if (es.eigenvalues()(0) <= 1e-10 * std::max(gram_n.norm(), 1.0))
    throw std::domain_error(
        "boundary_gram: pairing is not positive-definite (boundary positivity fails)");
  bs.metric = InnerProduct(0.5 * (gram_n + gram_n.adjoint()));

  if (m.oddness) {
    const Matrix gb = boundary_descent(m, m.space.grading, cn.ndom);
    bs.grading_b = gb;
  } else {
    bs.grading_b = Complex(0, -1) * bs.nd;
  }

  for (const auto& e : m.algebra.elements) {
    Matrix r = boundary_rep(m, cn, e);
    const double lip = lip_norm(m, e.matrix);
    bs.rep_lip_ratio[e.name] =
        lip > 0 ? operator_norm(r, bs.metric, bs.metric) / lip : 0.0;
    bs.rep[e.name] = std::move(r);
  }
  return bs;
}

}  // namespace gex
