#pragma once

// Scenario builders: concrete Green-exact models with Clifford normals.
//
// interval_dirac: 2-component spinor on [0,1], D = diag(-i d/dx, +i d/dx),
// traces at both endpoints (b = 4).  The Green identity holds to round-off
// because D is assembled from a summation-by-parts pair.
//
// disc_dirac: the disc Dirac operator decomposed over angular modes
// k 7-> kappa = k + 1/2.  Each mode is a radial 2-slot model on (0, 1]
// whose kappa/r coupling is a diagonal discrete logarithmic derivative, so
// the regular solution r^|kappa| is an exact matrix kernel and commutators
// with diagonal multipliers keep their zeroth-order part diagonal.  The
// origin is closed one-sidedly per slot (ghost zero on the irregular
// chirality, power-law extrapolation on the regular one); only the outer
// circle contributes boundary coordinates (b = 2 per mode).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gex/green_model.hpp"
#include "gex/normal.hpp"
#include "gex/sbp.hpp"

namespace gex {

struct ScenarioConfig {
  std::string name = "interval";
  Eigen::Index N = 64;          // grid size per 1-D factor
  int modes = 8;                // angular cutoff K (disc)
  int order = 2;                // SBP accuracy order, 2 or 4
  Eigen::Index matrix_size = 2; // fiber size (dimension drop)
  std::string B_subalgebra = "diagonal";
  Eigen::MatrixXd theta;        // deformation parameter, antisymmetric
  std::uint64_t seed = 0;

  void validate() const {
    if (N < 8) throw std::invalid_argument("config: N must be at least 8");
    if (modes < 1) throw std::invalid_argument("config: modes must be at least 1");
    if (order != 2 && order != 4) throw std::invalid_argument("config: order must be 2 or 4");
    if (matrix_size < 1) throw std::invalid_argument("config: matrix_size must be at least 1");
    if (theta.size() > 0 && (theta + theta.transpose()).norm() > 1e-12)
      throw std::invalid_argument("config: theta must be antisymmetric");
  }
};

// Taper profile: 1 on the outer 10% of nodes (never thinner than the SBP
// closure rows), cosine down to 0 by 30%.  Argument is the node distance
// from the boundary in grid steps.
inline double taper_profile(Eigen::Index dist, Eigen::Index n, int order) {
  const Eigen::Index closure = order == 2 ? 1 : 4;
  const Eigen::Index flat =
      std::max<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(0.1 * double(n - 1))),
                             closure + 2);
  const double t = double(dist) / double(n - 1);
  if (dist <= flat || t <= 0.1) return 1.0;
  if (t >= 0.3) return 0.0;
  return 0.5 * (1.0 + std::cos(3.14159265358979323846 * (t - 0.1) / 0.2));
}

struct IntervalScenario {
  ScenarioConfig config;
  GreenOperatorModel model;
  CliffordNormal normal;
};

inline IntervalScenario interval_dirac(const ScenarioConfig& cfg) {
  cfg.validate();
  const Eigen::Index N = cfg.N;
  const SbpOperator op = build_sbp(cfg.order, N, 0.0, 1.0);
  const Matrix d1 = op.d1().cast<Complex>();
  const Eigen::Index n = 2 * N;

  GreenOperatorModel m;
  Matrix G = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < N; ++i) {
    G(i, i) = op.hdiag(i);
    G(N + i, N + i) = op.hdiag(i);
  }
  Matrix gamma = Matrix::Zero(n, n);
  gamma.topRightCorner(N, N) = Matrix::Identity(N, N);
  gamma.bottomLeftCorner(N, N) = Matrix::Identity(N, N);
  m.space = GradedSpace(InnerProduct(G), gamma);

  m.D = Matrix::Zero(n, n);
  m.D.topLeftCorner(N, N) = Complex(0, -1) * d1;
  m.D.bottomRightCorner(N, N) = Complex(0, 1) * d1;
  m.oddness = true;

  m.R = Matrix::Zero(4, n);
  m.R(0, 0) = 1.0;          // u(0)
  m.R(1, N) = 1.0;          // v(0)
  m.R(2, N - 1) = 1.0;      // u(1)
  m.R(3, n - 1) = 1.0;      // v(1)
  m.bmetric = InnerProduct::euclidean(4);
  m.nu = Matrix::Zero(4, 4);
  m.nu(0, 0) = Complex(0, -1);
  m.nu(1, 1) = Complex(0, 1);
  m.nu(2, 2) = Complex(0, 1);
  m.nu(3, 3) = Complex(0, -1);

  auto mult = [&](auto f) {
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < N; ++i) {
      const Complex v = f(op.grid(i));
      a(i, i) = v;
      a(N + i, N + i) = v;
    }
    return a;
  };
  auto bump = [](double x, double c, double w) {
    const double s = (x - c) / w;
    const double q = std::max(0.0, 1.0 - s * s);
    return q * q;
  };
  m.algebra.elements.push_back({"one", Matrix::Identity(n, n), false});
  m.algebra.elements.push_back({"coordinate", mult([](double x) { return x; }), false});
  m.algebra.elements.push_back(
      {"bump-left", mult([&](double x) { return bump(x, 0.35, 0.25); }), true});
  m.algebra.elements.push_back(
      {"bump-right", mult([&](double x) { return bump(x, 0.65, 0.25); }), true});

  // n = -i sigma_3 phi with phi = +1 near x=0, -1 near x=1, 0 in the middle.
  Matrix nmat = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double phi = taper_profile(i, N, cfg.order) - taper_profile(N - 1 - i, N, cfg.order);
    nmat(i, i) = Complex(0, -1) * phi;
    nmat(N + i, N + i) = Complex(0, 1) * phi;
  }

  IntervalScenario sc;
  sc.config = cfg;
  sc.normal = CliffordNormal::full_domain(m, nmat);
  sc.model = std::move(m);
  return sc;
}

struct DiscMode {
  int k = 0;          // angular mode number
  double kappa = 0.5; // k + 1/2
  GreenOperatorModel model;
  CliffordNormal normal;
  Eigen::Index gdim = 0;  // size of the first (chirality +) slot
  Eigen::Index fdim = 0;  // size of the second (chirality -) slot
};

struct DiscScenario {
  ScenarioConfig config;
  std::vector<DiscMode> modes;  // k = -K .. K in order

  const DiscMode& mode(int k) const {
    for (const auto& md : modes)
      if (md.k == k) return md;
    throw std::out_of_range("disc scenario has no mode " + std::to_string(k));
  }
};

inline DiscMode disc_mode(const ScenarioConfig& cfg, int k) {
  const Eigen::Index N = cfg.N;
  const double kappa = k + 0.5;
  const SbpOperator op = build_sbp(cfg.order, N, 1.0 / double(N), 1.0);
  const Eigen::MatrixXd d1 = op.d1();

  Eigen::VectorXd wreg(N);
  for (Eigen::Index i = 0; i < N; ++i) wreg(i) = std::pow(op.grid(i), std::abs(kappa));
  // The kappa/r coupling enters as the signed diagonal logarithmic derivative
  // of the regular weight r^|kappa| under d1, so the block of matching
  // chirality kills r^|kappa| exactly and the zeroth-order part of any
  // commutator with a diagonal multiplier stays diagonal. K is real diagonal,
  // so it cancels in the Green identity.
  const Eigen::VectorXd klog =
      (kappa > 0 ? 1.0 : -1.0) * (d1 * wreg).cwiseQuotient(wreg);
  const Eigen::MatrixXd up_full = d1 + Eigen::MatrixXd(klog.asDiagonal());
  const Eigen::MatrixXd lo_full = d1 - Eigen::MatrixXd(klog.asDiagonal());

  // Origin closure by subspace compression: both slots drop the innermost
  // node. The irregular slot is ghost-zeroed there; the regular slot folds
  // its origin value in by exact power-law extrapolation, which expels the
  // parasitic origin branch of the three-term recurrence (otherwise the
  // doubled operator acquires a spurious near-kernel) while keeping r^|kappa|
  // an exact kernel. Compression preserves the Green identity identically,
  // and the origin boundary term dies against the ghost zero.
  const bool ghost_first = kappa > 0;  // regular chirality sits in the second slot
  const Eigen::Index M = N - 1;
  const Eigen::Index gdim = M;
  const Eigen::Index fdim = M;
  const Eigen::Index n = gdim + fdim;

  const double cext = std::pow(op.grid(0) / op.grid(1), std::abs(kappa));
  Eigen::MatrixXd ereg = Eigen::MatrixXd::Zero(N, M);
  ereg(0, 0) = cext;
  ereg.bottomRows(M) = Eigen::MatrixXd::Identity(M, M);
  Eigen::MatrixXd eirr = Eigen::MatrixXd::Zero(N, M);
  eirr.bottomRows(M) = Eigen::MatrixXd::Identity(M, M);

  const Eigen::MatrixXd& eg = ghost_first ? eirr : ereg;
  const Eigen::MatrixXd& ef = ghost_first ? ereg : eirr;
  const Eigen::MatrixXd hfull = Eigen::MatrixXd(op.hdiag.asDiagonal());
  const Eigen::VectorXd hg = (eg.transpose() * hfull * eg).diagonal();
  const Eigen::VectorXd hf = (ef.transpose() * hfull * ef).diagonal();

  const Eigen::MatrixXd lo_c =
      hg.cwiseInverse().asDiagonal() * (eg.transpose() * hfull * lo_full * ef);
  const Eigen::MatrixXd up_c =
      hf.cwiseInverse().asDiagonal() * (ef.transpose() * hfull * up_full * eg);
  const Matrix U = Complex(0, -1) * up_c.cast<Complex>();
  const Matrix L = Complex(0, -1) * lo_c.cast<Complex>();

  GreenOperatorModel m;
  Matrix G = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < gdim; ++i) G(i, i) = hg(i);
  for (Eigen::Index i = 0; i < fdim; ++i) G(gdim + i, gdim + i) = hf(i);
  Matrix gamma = Matrix::Zero(n, n);
  gamma.topLeftCorner(gdim, gdim) = Matrix::Identity(gdim, gdim);
  gamma.bottomRightCorner(fdim, fdim) = -Matrix::Identity(fdim, fdim);
  m.space = GradedSpace(InnerProduct(G), gamma);

  m.D = Matrix::Zero(n, n);
  m.D.topRightCorner(gdim, fdim) = L;
  m.D.bottomLeftCorner(fdim, gdim) = U;
  m.oddness = true;

  m.R = Matrix::Zero(2, n);
  m.R(0, gdim - 1) = 1.0;  // outer trace, + slot
  m.R(1, n - 1) = 1.0;     // outer trace, - slot
  m.bmetric = InnerProduct::euclidean(2);
  m.nu = Matrix::Zero(2, 2);
  m.nu(0, 1) = Complex(0, 1);
  m.nu(1, 0) = Complex(0, 1);

  // Radial taper from the outer boundary inward; it is identically zero on
  // the inner 70% of nodes, so it never meets the origin closure and the
  // slot-weight mismatch there.
  Eigen::VectorXd phi(M);
  for (Eigen::Index j = 0; j < M; ++j) phi(j) = taper_profile(N - 2 - j, N, cfg.order);
  Matrix nmat = Matrix::Zero(n, n);
  nmat.topRightCorner(M, M) = Complex(0, 1) * phi.asDiagonal().toDenseMatrix().cast<Complex>();
  nmat.bottomLeftCorner(M, M) = Complex(0, 1) * phi.asDiagonal().toDenseMatrix().cast<Complex>();

  auto radial = [&](auto f) {
    Matrix a = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < M; ++i) {
      a(i, i) = f(op.grid(i + 1));
      a(gdim + i, gdim + i) = f(op.grid(i + 1));
    }
    return a;
  };
  m.algebra.elements.push_back({"one", Matrix::Identity(n, n), false});
  m.algebra.elements.push_back({"radial", radial([](double r) { return r * r; }), false});
  m.algebra.elements.push_back(
      {"bump", radial([](double r) { return (1.0 - r * r) * (1.0 - r * r); }), true});

  DiscMode md;
  md.k = k;
  md.kappa = kappa;
  md.gdim = gdim;
  md.fdim = fdim;
  // The normal acts on the whole mode space: the discrete harmonic branch
  // must stay inside Dom(n), or the Poisson operator loses its reproduction
  // property on kernel traces.
  md.normal = CliffordNormal::full_domain(m, nmat);
  md.model = std::move(m);
  return md;
}

inline DiscScenario disc_dirac(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.order == 4 && cfg.N < 12)
    throw std::invalid_argument("disc: order 4 needs N >= 12");
  DiscScenario sc;
  sc.config = cfg;
  for (int k = -cfg.modes; k <= cfg.modes; ++k) sc.modes.push_back(disc_mode(cfg, k));
  return sc;
}

}  // namespace gex
