#pragma once

// Finite-dimensional model of a symmetric operator with boundary.
//
// The whole space C^N models the maximal domain; D is the maximal operator;
// the minimal domain is ker R for a surjective trace map R: C^N -> C^b.  The
// defining identity is the exact discrete Green formula
//
//     <D xi, eta> - <xi, D eta> = <R xi, nu R eta>_bmetric
//
// equivalently  D^dag G - G D = R^dag G_b nu R  as matrices.  The boundary
// form  omega(xi,eta) = <xi, D eta> - <D xi, eta>  therefore descends to the
// trace coordinates with matrix  Omega = -G_b nu,  which is anti-Hermitian
// and nondegenerate when nu is skew and invertible.

#include <string>
#include <vector>

#include "gex/numkernel.hpp"
#include "gex/report.hpp"

namespace gex {

struct AlgebraElement {
  std::string name;
  Matrix matrix;
  bool ideal = false;  // flagged elements must kill the trace: R a = 0
};

struct AlgebraModel {
  std::vector<AlgebraElement> elements;

  const AlgebraElement& by_name(const std::string& name) const {
    for (const auto& e : elements)
      if (e.name == name) return e;
    throw std::out_of_range("algebra element not found: " + name);
  }
};

struct GreenOperatorModel {
  GradedSpace space;
  Matrix D;             // maximal operator
  Matrix R;             // b x N trace map
  InnerProduct bmetric; // metric on trace coordinates
  Matrix nu;            // b x b boundary pairing, skew, nu^2 = -1
  bool oddness = false; // D gamma + gamma D = 0
  AlgebraModel algebra;

  Eigen::Index dim() const { return space.inner.dim(); }
  Eigen::Index bdim() const { return R.rows(); }
  const InnerProduct& inner() const { return space.inner; }

  // Matrix of the boundary form in trace coordinates:
  // omega(xi, eta) = (R xi)^dag Omega (R eta).
  Matrix omega_matrix() const { return -bmetric.gram * nu; }
};

inline Complex boundary_form(const GreenOperatorModel& m, const Vector& xi, const Vector& eta) {
  return m.inner().pair(xi, m.D * eta) - m.inner().pair(m.D * xi, eta);
}

struct MinimalOperator {
  Matrix basis;   // G-orthonormal columns spanning ker R
  Matrix action;  // D restricted to the basis columns
};

inline MinimalOperator minimal_operator(const GreenOperatorModel& m) {
  const Matrix basis = orthonormalize(nullspace(m.R), m.inner());
  return MinimalOperator{basis, m.D * basis};
}

// Lip-norm of an algebra element: ||a|| + ||[D, a]||, both in operator norm.
inline double lip_norm(const GreenOperatorModel& m, const Matrix& a) {
  const InnerProduct& ip = m.inner();
  return operator_norm(a, ip, ip) + operator_norm(m.D * a - a * m.D, ip, ip);
}

inline std::vector<CheckReport> validate_model(const GreenOperatorModel& m) {
  std::vector<CheckReport> out;
  const InnerProduct& ip = m.inner();
  const Matrix& G = ip.gram;
  const Eigen::Index b = m.bdim();

  {
    const Matrix lhs = m.D.adjoint() * G - G * m.D;
    const Matrix rhs = m.R.adjoint() * m.bmetric.gram * m.nu * m.R;
    const double scale = std::max({(G * m.D).norm(), rhs.norm(), 1.0});
    out.push_back(make_report("green-identity", (lhs - rhs).norm() / scale, 0.0, 1e-12));
  }
  {
    Eigen::JacobiSVD<Matrix> svd(m.R);
    const RealVector& sv = svd.singularValues();
    const double smin = sv.size() == b ? sv(b - 1) : 0.0;
    out.push_back(make_lower_bound_report("trace-surjective", smin, 1e-10, 0.0,
                                          {{"rows", std::to_string(b)}}));
  }
  if (m.oddness) {
    const Matrix anti = m.D * m.space.grading + m.space.grading * m.D;
    out.push_back(make_report("odd-anticommute",
                              anti.norm() / std::max(m.D.norm(), 1.0), 0.0, 1e-12));
  }
  {
    const Matrix nustar = adjoint_wrt(m.nu, m.bmetric, m.bmetric);
    out.push_back(make_report("pairing-skew",
                              (nustar + m.nu).norm() / std::max(m.nu.norm(), 1.0), 0.0, 1e-12));
    out.push_back(make_report("pairing-squares-to-minus-one",
                              (m.nu * m.nu + Matrix::Identity(b, b)).norm(), 0.0, 1e-12));
  }
  {
    // Nondegeneracy of omega on trace coordinates, measured in the bmetric.
    const double smin_rel =
        1.0 / operator_norm(m.omega_matrix().inverse(), m.bmetric, m.bmetric);
    out.push_back(make_lower_bound_report("boundary-form-nondegenerate", smin_rel, 1e-8, 0.0));
  }
  {
    // Symmetry of the minimal operator: implied by the Green identity since
    // R vanishes on ker R, but checked directly as its own report.
    const Matrix B0 = minimal_operator(m).basis;
    const Matrix sym = B0.adjoint() * (G * m.D - m.D.adjoint() * G) * B0;
    const double scale = std::max((G * m.D).norm(), 1.0);
    out.push_back(make_report("minimal-symmetric", sym.norm() / scale, 0.0, 1e-12));
  }

  const Matrix Bmin = nullspace(m.R);

  // Euclidean span of the flattened algebra elements, for star-closure.
  Matrix span;
  if (!m.algebra.elements.empty()) {
    Matrix flat(m.dim() * m.dim(), static_cast<Eigen::Index>(m.algebra.elements.size()));
    for (Eigen::Index j = 0; j < flat.cols(); ++j) {
      const Matrix& fj = m.algebra.elements[static_cast<std::size_t>(j)].matrix;
      flat.col(j) = Eigen::Map<const Vector>(fj.data(), fj.size());
    }
    Eigen::JacobiSVD<Matrix> svd(flat, Eigen::ComputeThinU);
    Eigen::Index rank = 0;
    const RealVector& sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > kRankTol * sv(0)) ++rank;
    span = svd.matrixU().leftCols(rank);
  }

  for (const auto& e : m.algebra.elements) {
    const double scale = std::max(e.matrix.norm(), 1.0);
    out.push_back(make_report("algebra-" + e.name + "-preserves-minimal-domain",
                              (m.R * e.matrix * Bmin).norm() / scale, 0.0, 1e-10));
    if (e.ideal)
      out.push_back(make_report("algebra-" + e.name + "-maps-into-minimal-domain",
                                (m.R * e.matrix).norm() / scale, 0.0, 1e-10));
    // Star-closure: the adjoint must lie in the span of the listed elements.
    const Matrix astar = adjoint_wrt(e.matrix, ip, ip);
    const Vector av = Eigen::Map<const Vector>(astar.data(), astar.size());
    const Vector residual = av - span * (span.adjoint() * av);
    out.push_back(make_report("algebra-" + e.name + "-star-closed",
                              residual.norm() / scale, 0.0, 1e-10));
  }
  return out;
}

}  // namespace gex
