#pragma once

// Dense complex linear algebra over weighted inner-product spaces.
//
// Every Hilbert space here is C^n equipped with an explicit Hermitian
// positive-definite Gram matrix G, never the implicit Euclidean pairing:
// discretized L^2 spaces carry quadrature weights and all adjoints are
// weighted adjoints,  <Mx,y>_c = <x, M* y>_d  with  M* = G_d^{-1} M^dag G_c.
// Functions of G-self-adjoint matrices go through the generalized
// eigenproblem (G A) v = lambda G v, whose eigenvectors are G-orthonormal.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gex {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Structural tolerance for symmetry/idempotency preconditions (relative).
inline constexpr double kStructTol = 1e-10;
// Default kernel cutoff for pseudoinverses, relative to the top singular value.
inline constexpr double kKernelCutoffRel = 1e-8;
// Relative eigenvalue clustering width before applying scalar functions.
inline constexpr double kClusterTol = 1e-10;
// Rank tolerance for pivoted orthonormalization (relative to largest pivot).
inline constexpr double kRankTol = 1e-10;

struct InnerProduct {
  Matrix gram;

  InnerProduct() = default;

  explicit InnerProduct(Matrix g) : gram(std::move(g)) {
    if (gram.rows() != gram.cols() || gram.rows() == 0)
      throw std::invalid_argument("inner product: gram must be square and nonempty");
    const double scale = gram.norm();
    if ((gram - gram.adjoint()).norm() > kStructTol * std::max(scale, 1.0))
      throw std::domain_error("inner product: gram is not Hermitian");
    llt_.compute(gram);
    if (llt_.info() != Eigen::Success)
      throw std::domain_error("inner product: gram is not positive-definite");
  }

  static InnerProduct euclidean(Eigen::Index n) {
    return InnerProduct(Matrix::Identity(n, n));
  }

  Eigen::Index dim() const { return gram.rows(); }

  Complex pair(const Vector& x, const Vector& y) const { return x.dot(gram * y); }

  double norm(const Vector& x) const {
    return std::sqrt(std::max(0.0, std::real(pair(x, x))));
  }

  // L^dag with G = L L^dag; an isometry (C^n, G) -> (C^n, euclidean).
  Matrix half() const { return Matrix(llt_.matrixL()).adjoint(); }

  // Inverse of half(): euclidean coordinates back to the weighted space.
  Matrix half_inverse() const {
    return Matrix(llt_.matrixL())
        .adjoint()
        .triangularView<Eigen::Upper>()
        .solve(Matrix::Identity(dim(), dim()));
  }

  Matrix solve(const Matrix& rhs) const { return llt_.solve(rhs); }

 private:
  Eigen::LLT<Matrix> llt_;
};

// Weighted adjoint: <Mx,y>_codomain = <x, adjoint_wrt(M) y>_domain.
inline Matrix adjoint_wrt(const Matrix& M, const InnerProduct& domain,
                          const InnerProduct& codomain) {
  if (M.rows() != codomain.dim() || M.cols() != domain.dim())
    throw std::invalid_argument("adjoint_wrt: shape mismatch with inner products");
  return domain.solve(M.adjoint() * codomain.gram);
}

inline double operator_norm(const Matrix& M, const InnerProduct& domain,
                            const InnerProduct& codomain) {
  const Matrix euclid = codomain.half() * M * domain.half_inverse();
  if (euclid.size() == 0) return 0.0;
  return euclid.jacobiSvd().singularValues()(0);
}

struct GradedSpace {
  InnerProduct inner;
  Matrix grading;  // gamma^2 = 1, gamma G-self-adjoint

  GradedSpace() = default;

  GradedSpace(InnerProduct ip, Matrix gamma) : inner(std::move(ip)), grading(std::move(gamma)) {
    const Eigen::Index n = inner.dim();
    if (grading.rows() != n || grading.cols() != n)
      throw std::invalid_argument("graded space: grading shape mismatch");
    const double scale = std::max(1.0, grading.norm());
    if ((grading * grading - Matrix::Identity(n, n)).norm() > kStructTol * scale * scale)
      throw std::domain_error("graded space: grading does not square to the identity");
    if ((inner.gram * grading - (inner.gram * grading).adjoint()).norm() >
        kStructTol * scale * inner.gram.norm())
      throw std::domain_error("graded space: grading is not self-adjoint for the inner product");
  }

  static GradedSpace trivial(InnerProduct ip) {
    const Eigen::Index n = ip.dim();
    return GradedSpace(std::move(ip), Matrix::Identity(n, n));
  }
};

struct Eigensystem {
  RealVector values;  // ascending
  Matrix vectors;     // columns G-orthonormal
};

// Eigendecomposition of a G-self-adjoint matrix.  Throws if the symmetry
// residual exceeds kStructTol relative to the scale of G A.
inline Eigensystem hermitian_eigensystem(const Matrix& A, const InnerProduct& inner) {
  if (A.rows() != A.cols() || A.rows() != inner.dim())
    throw std::invalid_argument("hermitian_eigensystem: shape mismatch");
  const Matrix GA = inner.gram * A;
  const double scale = std::max(GA.norm(), 1e-300);
  const double residual = (GA - GA.adjoint()).norm();
  if (residual > kStructTol * std::max(scale, inner.gram.norm()))
    throw std::domain_error("hermitian_eigensystem: matrix is not self-adjoint, residual " +
                            std::to_string(residual / scale));
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver;
  solver.compute(0.5 * (GA + GA.adjoint()), inner.gram, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("hermitian_eigensystem: eigensolver failed to converge");
  return Eigensystem{solver.eigenvalues(), solver.eigenvectors()};
}

// f(A) for A G-self-adjoint.  Eigenvalues within kClusterTol * max|lambda| are
// grouped and f is applied to the group mean, so spectral projections of
// degenerate clusters do not pick up sign noise.
inline Matrix hermitian_funcalc(const Matrix& A, const InnerProduct& inner,
                                const std::function<double(double)>& f) {
  Eigensystem es = hermitian_eigensystem(A, inner);
  const Eigen::Index n = es.values.size();
  const double scale = std::max(std::abs(es.values(0)), std::abs(es.values(n - 1)));
  const double width = kClusterTol * std::max(scale, 1e-300);
  RealVector fval(n);
  Eigen::Index i = 0;
  while (i < n) {
    Eigen::Index j = i;
    double sum = 0.0;
    while (j < n && es.values(j) - es.values(i) <= width) sum += es.values(j++);
    const double v = f(sum / static_cast<double>(j - i));
    for (Eigen::Index k = i; k < j; ++k) fval(k) = v;
    i = j;
  }
  // A = V diag(lambda) V^{-1} with V^{-1} = V^dag G.
  return es.vectors * fval.asDiagonal() * es.vectors.adjoint() * inner.gram;
}

// Pseudoinverse of a G-self-adjoint matrix: inverse away from the numerical
// kernel, zero on it.  cutoff < 0 selects the default relative cutoff,
// cutoff = 0 zeroes exact-zero eigenvalues only.
inline Matrix pseudoinverse(const Matrix& A, const InnerProduct& inner, double cutoff = -1.0) {
  Eigensystem es = hermitian_eigensystem(A, inner);
  const Eigen::Index n = es.values.size();
  double top = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) top = std::max(top, std::abs(es.values(i)));
  double cut = cutoff;
  if (cutoff < 0.0) cut = kKernelCutoffRel * top;
  if (cutoff == 0.0) cut = 64.0 * std::numeric_limits<double>::epsilon() * top;
  RealVector inv(n);
  for (Eigen::Index i = 0; i < n; ++i)
    inv(i) = std::abs(es.values(i)) <= cut ? 0.0 : 1.0 / es.values(i);
  return es.vectors * inv.asDiagonal() * es.vectors.adjoint() * inner.gram;
}

// Minimal-norm least-squares pseudoinverse of a rectangular map
// (C^d, domain) -> (C^c, codomain), singular values <= cutoff dropped.
inline Matrix pseudoinverse_rect(const Matrix& M, const InnerProduct& domain,
                                 const InnerProduct& codomain, double cutoff = -1.0) {
  const Matrix euclid = codomain.half() * M * domain.half_inverse();
  Eigen::JacobiSVD<Matrix> svd(euclid, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  double cut = cutoff;
  if (cutoff < 0.0) cut = kKernelCutoffRel * top;
  if (cutoff == 0.0) cut = 64.0 * std::numeric_limits<double>::epsilon() * top;
  RealVector inv(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) inv(i) = sv(i) <= cut ? 0.0 : 1.0 / sv(i);
  const Matrix pinv_euclid = svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
  return domain.half_inverse() * pinv_euclid * codomain.half();
}

// G-orthonormal basis for the span of the given columns.  Works in the
// euclidean coordinates of half(), where one SVD both orthonormalizes and
// decides rank: singular directions below kRankTol * (top singular value)
// are dropped.  Deterministic for identical inputs.
inline Matrix orthonormalize(const Matrix& columns, const InnerProduct& inner) {
  const Eigen::Index n = inner.dim();
  if (columns.rows() != n) throw std::invalid_argument("orthonormalize: dimension mismatch");
  if (columns.cols() == 0) return Matrix(n, 0);
  const Matrix euclid = inner.half() * columns;
  Eigen::JacobiSVD<Matrix> svd(euclid, Eigen::ComputeThinU);
  const RealVector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return Matrix(n, 0);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankTol * sv(0)) ++rank;
  return inner.half_inverse() * svd.matrixU().leftCols(rank);
}

inline Matrix orthonormalize(const std::vector<Vector>& vectors, const InnerProduct& inner) {
  const Eigen::Index n = inner.dim();
  Matrix cols(n, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    if (vectors[j].size() != n)
      throw std::invalid_argument("orthonormalize: vector dimension mismatch");
    cols.col(static_cast<Eigen::Index>(j)) = vectors[j];
  }
  return orthonormalize(cols, inner);
}

// G-orthogonal projector onto the span of the given vectors.
inline Matrix orth_projector(const std::vector<Vector>& basis, const InnerProduct& inner) {
  const Matrix B = orthonormalize(basis, inner);
  if (B.cols() == 0) return Matrix::Zero(inner.dim(), inner.dim());
  return B * B.adjoint() * inner.gram;
}

inline Matrix orth_projector(const Matrix& basis, const InnerProduct& inner) {
  const Matrix B = orthonormalize(basis, inner);
  if (B.cols() == 0) return Matrix::Zero(inner.dim(), inner.dim());
  return B * B.adjoint() * inner.gram;
}

// Euclidean null space of a rectangular matrix, columns orthonormal.
// tol < 0 selects a default relative to the leading singular value.
inline Matrix nullspace(const Matrix& M, double tol = -1.0) {
  if (M.rows() == 0) {
    return Matrix::Identity(M.cols(), M.cols());
  }
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  const RealVector& sv = svd.singularValues();
  const double top = sv.size() ? sv(0) : 0.0;
  double cut = tol;
  if (tol < 0.0)
    cut = std::max(kRankTol * top,
                   64.0 * std::numeric_limits<double>::epsilon() * top);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) ++rank;
  return svd.matrixV().rightCols(M.cols() - rank);
}

// Columns spanning the G-orthogonal complement of span(B) inside C^n.
inline Matrix orth_complement(const Matrix& B, const InnerProduct& inner) {
  if (B.cols() == 0) {
    Matrix id = Matrix::Identity(inner.dim(), inner.dim());
    return orthonormalize(id, inner);
  }
  // x in complement iff B^dag G x = 0.
  const Matrix constraints = B.adjoint() * inner.gram;
  return orthonormalize(nullspace(constraints), inner);
}

inline Matrix matrix_sqrt(const Matrix& A, const InnerProduct& inner) {
  return hermitian_funcalc(A, inner, [](double x) {
    if (x < -kStructTol) throw std::domain_error("matrix_sqrt: negative eigenvalue");
    return std::sqrt(std::max(0.0, x));
  });
}

}  // namespace gex
