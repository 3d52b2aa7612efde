#pragma once

// Closed extensions between the minimal and maximal operator, parameterized
// by subspaces L of the boundary coordinates:  Dom(D_L) = R^{-1}(L).
//
// The boundary form omega(x,y) = x^dag Omega y (Omega = -G_b nu) is
// anti-Hermitian; L classifies as isotropic / lagrangian / coisotropic by
// comparison with its omega-annihilator.  Lagrangian L gives the symmetric
// extensions that are self-adjoint in the model metric.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gex/green_model.hpp"

namespace gex {

struct ExtensionSubspace {
  Matrix basis;             // bmetric-orthonormal columns in C^b
  std::vector<int> labels;  // block tag per column, -1 if unassigned
  std::vector<std::string> warnings;

  Eigen::Index dim() const { return basis.cols(); }
};

enum class ExtensionClass { isotropic, lagrangian, coisotropic, generic };

inline const char* to_string(ExtensionClass c) {
  switch (c) {
    case ExtensionClass::isotropic: return "isotropic";
    case ExtensionClass::lagrangian: return "lagrangian";
    case ExtensionClass::coisotropic: return "coisotropic";
    case ExtensionClass::generic: return "generic";
  }
  return "generic";
}

inline ExtensionSubspace make_subspace(const GreenOperatorModel& m, const Matrix& raw) {
  ExtensionSubspace s;
  s.basis = orthonormalize(raw, m.bmetric);
  s.labels.assign(static_cast<std::size_t>(s.basis.cols()), -1);
  return s;
}

inline ExtensionSubspace annihilator(const GreenOperatorModel& m, const ExtensionSubspace& L) {
  const Matrix omega = m.omega_matrix();
  ExtensionSubspace out;
  if (L.dim() == 0) {
    out.basis = orthonormalize(Matrix::Identity(m.bdim(), m.bdim()), m.bmetric);
  } else {
    const Matrix constraints = L.basis.adjoint() * omega.adjoint();
    out.basis = orthonormalize(nullspace(constraints), m.bmetric);
  }
  out.labels.assign(static_cast<std::size_t>(out.basis.cols()), -1);
  const double smin = 1.0 / operator_norm(omega.inverse(), m.bmetric, m.bmetric);
  if (!(smin >= 1e-8))
    out.warnings.push_back("boundary form nearly degenerate: smallest singular value " +
                           format_scalar(smin));
  return out;
}

inline ExtensionClass classify(const GreenOperatorModel& m, const ExtensionSubspace& L) {
  const ExtensionSubspace Lp = annihilator(m, L);
  const Matrix PL = L.dim() == 0 ? Matrix::Zero(m.bdim(), m.bdim())
                                 : Matrix(L.basis * L.basis.adjoint() * m.bmetric.gram);
  const Matrix PLp = Lp.dim() == 0 ? Matrix::Zero(m.bdim(), m.bdim())
                                   : Matrix(Lp.basis * Lp.basis.adjoint() * m.bmetric.gram);
  const Matrix id = Matrix::Identity(m.bdim(), m.bdim());
  const bool iso = ((id - PLp) * PL).norm() <= 1e-10;
  const bool co = ((id - PL) * PLp).norm() <= 1e-10;
  if (iso && co) return ExtensionClass::lagrangian;
  if (iso) return ExtensionClass::isotropic;
  if (co) return ExtensionClass::coisotropic;
  return ExtensionClass::generic;
}

struct ExtensionOperator {
  Matrix domain;      // G-orthonormal basis of R^{-1}(L)
  Matrix action;      // D applied to the basis columns
  Matrix compressed;  // basis^star D basis, the operator in domain coordinates
};

inline ExtensionOperator extension_operator(const GreenOperatorModel& m,
                                            const ExtensionSubspace& L) {
  const Eigen::Index b = m.bdim();
  const Matrix PL = L.dim() == 0 ? Matrix::Zero(b, b)
                                 : Matrix(L.basis * L.basis.adjoint() * m.bmetric.gram);
  const Matrix constraints = (Matrix::Identity(b, b) - PL) * m.R;
  ExtensionOperator ext;
  ext.domain = orthonormalize(nullspace(constraints), m.inner());
  ext.action = m.D * ext.domain;
  ext.compressed = ext.domain.adjoint() * m.inner().gram * ext.action;
  return ext;
}

// Eigenvalues of the compressed extension (complex in general; real to
// round-off when L is lagrangian).
inline Vector extension_eigenvalues(const ExtensionOperator& ext) {
  if (ext.compressed.rows() == 0) return Vector(0);
  Eigen::ComplexEigenSolver<Matrix> solver(ext.compressed);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("extension_eigenvalues: eigensolver failed");
  return solver.eigenvalues();
}

struct LagrangianConstraints {
  std::vector<int> blocks;  // block tag per boundary coordinate; empty = one block
  bool graded = false;      // require invariance under the boundary grading
  Matrix grading_b;         // boundary grading, used when graded is set
};

struct LagrangianSearchResult {
  std::optional<ExtensionSubspace> found;
  std::string obstruction;
};

// Constructs a lagrangian subspace for the boundary form, block by block.
// Within a block, the Hermitian operator i*Omega is diagonalized; positive
// and negative eigenvectors are paired with a seed-chosen phase (ungraded),
// or the +1 grading eigenspace is taken whole (graded).  Returns none with
// the counting obstruction when signatures or graded dimensions mismatch.
inline LagrangianSearchResult lagrangian_search(const GreenOperatorModel& m,
                                                const LagrangianConstraints& constraints,
                                                std::uint64_t seed) {
  const Eigen::Index b = m.bdim();
  std::vector<int> blocks = constraints.blocks;
  if (blocks.empty()) blocks.assign(static_cast<std::size_t>(b), 0);
  if (static_cast<Eigen::Index>(blocks.size()) != b)
    throw std::invalid_argument("lagrangian_search: block labels must cover the boundary");

  int nblocks = 0;
  for (int t : blocks) nblocks = std::max(nblocks, t + 1);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * 3.14159265358979323846);

  const Matrix omega = m.omega_matrix();
  std::vector<Vector> basis_cols;
  std::vector<int> labels;

  for (int t = 0; t < nblocks; ++t) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < b; ++i)
      if (blocks[static_cast<std::size_t>(i)] == t) idx.push_back(i);
    if (idx.empty()) continue;
    const Eigen::Index nb = static_cast<Eigen::Index>(idx.size());

    Matrix gb(nb, nb), ob(nb, nb);
    for (Eigen::Index i = 0; i < nb; ++i)
      for (Eigen::Index j = 0; j < nb; ++j) {
        gb(i, j) = m.bmetric.gram(idx[i], idx[j]);
        ob(i, j) = omega(idx[i], idx[j]);
      }
    const InnerProduct bip{gb};
    auto lift = [&](const Vector& v) {
      Vector full = Vector::Zero(b);
      for (Eigen::Index i = 0; i < nb; ++i) full(idx[i]) = v(i);
      return full;
    };

    if (constraints.graded) {
      if (constraints.grading_b.rows() != b)
        throw std::invalid_argument("lagrangian_search: graded constraint needs grading_b");
      Matrix gblk(nb, nb);
      for (Eigen::Index i = 0; i < nb; ++i)
        for (Eigen::Index j = 0; j < nb; ++j) gblk(i, j) = constraints.grading_b(idx[i], idx[j]);
      // Eigenspaces of the block grading; omega vanishes on each, so the
      // whole +1 space is isotropic; lagrangian iff the dimensions match.
      Eigensystem ges = hermitian_eigensystem(gblk, bip);
      Eigen::Index nplus = 0, nminus = 0;
      for (Eigen::Index i = 0; i < nb; ++i) (ges.values(i) > 0 ? nplus : nminus)++;
      if (nplus != nminus)
        return {std::nullopt,
                "block " + std::to_string(t) + ": grading eigenspace dimensions " +
                    std::to_string(nplus) + " vs " + std::to_string(nminus)};
      for (Eigen::Index i = 0; i < nb; ++i)
        if (ges.values(i) > 0) {
          basis_cols.push_back(lift(ges.vectors.col(i)));
          labels.push_back(t);
        }
    } else {
      const Matrix herm = Complex(0, 1) * bip.solve(ob);  // i * Omega as a G_b-self-adjoint map
      Eigensystem hes = hermitian_eigensystem(herm, bip);
      std::vector<Eigen::Index> pos, neg;
      const double tol = 1e-12 * std::max(1.0, std::abs(hes.values.cwiseAbs().maxCoeff()));
      for (Eigen::Index i = 0; i < nb; ++i) {
        if (hes.values(i) > tol) pos.push_back(i);
        else if (hes.values(i) < -tol) neg.push_back(i);
      }
      if (pos.size() + neg.size() != static_cast<std::size_t>(nb))
        return {std::nullopt,
                "block " + std::to_string(t) + ": boundary form degenerate on the block"};
      if (pos.size() != neg.size())
        return {std::nullopt, "block " + std::to_string(t) + ": signature (" +
                                  std::to_string(pos.size()) + "," + std::to_string(neg.size()) +
                                  ") of the boundary form admits no lagrangian"};
      // x = v+/sqrt(l+) + phase * v-/sqrt(-l-) has omega(x,x) = -i(1 - 1) = 0
      // whatever the eigenvalue magnitudes; the pairs stay isotropic exactly.
      for (std::size_t i = 0; i < pos.size(); ++i) {
        const Complex ph = std::exp(Complex(0, phase_dist(rng)));
        basis_cols.push_back(lift(hes.vectors.col(pos[i]) / std::sqrt(hes.values(pos[i])) +
                                  ph * hes.vectors.col(neg[i]) / std::sqrt(-hes.values(neg[i]))));
        labels.push_back(t);
      }
    }
  }

  ExtensionSubspace s;
  Matrix cols(b, static_cast<Eigen::Index>(basis_cols.size()));
  for (std::size_t j = 0; j < basis_cols.size(); ++j)
    cols.col(static_cast<Eigen::Index>(j)) = basis_cols[j];
  s.basis = orthonormalize(cols, m.bmetric);
  s.labels = labels;
  return {s, ""};
}

}  // namespace gex
