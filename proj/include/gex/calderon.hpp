#pragma once

// Poisson operator and Calderon projector of a Green-exact model, and the
// comparison of the Calderon range with the nonnegative spectral part of the
// boundary operator in the dual trace norm.
//
// K f is the harmonic vector whose pairing through the normal reproduces f;
// it is computed from the least-squares inverse of the glued double, so no
// boundary value problem is solved mode by mode.  P_C = R K projects trace
// space onto the Cauchy data of the maximal kernel.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gex/boundary_op.hpp"
#include "gex/doubling.hpp"
#include "gex/models.hpp"

namespace gex {

// Deltas below this are round-off, not decay data: the mode sweep treats
// them as exact zeros before testing monotonicity.
inline constexpr double kComparisonFloor = 1e-12;

// Trace space with the order -1/2 metric.  Coordinates stay the trace
// coordinates (embed is the identity); only the gram changes, weighting by
// (1 + Dn^2)^{-1/2} against gram_n when the boundary operator is available
// and by the plain dual gram when it is not.
struct MinusHalfSpace {
  Eigen::Index dim = 0;
  InnerProduct metric;
  Matrix embed;
};

inline MinusHalfSpace minus_half_space(const BoundarySpace& bs) {
  MinusHalfSpace mh;
  mh.dim = bs.dim;
  mh.embed = Matrix::Identity(bs.dim, bs.dim);
  mh.metric = InnerProduct(Matrix(bs.metric.gram.inverse()));
  return mh;
}

inline MinusHalfSpace minus_half_space(const BoundarySpace& bs, const Matrix& Dn) {
  MinusHalfSpace mh;
  mh.dim = bs.dim;
  mh.embed = Matrix::Identity(bs.dim, bs.dim);
  const Matrix w = hermitian_funcalc(
      Dn, bs.metric, [](double t) { return 1.0 / std::sqrt(1.0 + t * t); });
  const Matrix gw = bs.metric.gram * w;
  mh.metric = InnerProduct(Matrix(0.5 * (gw + gw.adjoint())));
  return mh;
}

struct PoissonOperator {
  Matrix K;           // dim x b, harmonic extension of traces
  Matrix PC;          // b x b Calderon projector, PC = R K
  MinusHalfSpace mh;  // trace space carrying the dual metric
  bool lifted = false;  // computed through the Clifford double (ungraded input)
};

namespace detail {

// Least-squares inverse of the glued double, extended by zero on its kernel.
inline Matrix double_inverse(const DoubledOperator& dbl) {
  return dbl.constraint *
         pseudoinverse_rect(Matrix(dbl.action * dbl.constraint),
                            InnerProduct::euclidean(dbl.sdim()),
                            dbl.ambient.inner);
}

// K in trace coordinates.  A v = n dR (first copy of D~^{-1}(v, 0)) pairs
// vectors against traces through the normal; with Omega = -G_b nu that
// pairing is the negative of the gram_n product, hence the sign of K.
inline Matrix poisson_core(const GreenOperatorModel& m, const CliffordNormal& cn,
                           const BoundarySpace& bs) {
  const DoubledOperator dbl = build_double(m, cn);
  const Eigen::Index N = m.dim();
  const Matrix dinv = double_inverse(dbl);
  Matrix e1 = Matrix::Zero(2 * N, N);
  e1.topRows(N) = Matrix::Identity(N, N);
  const Matrix A = bs.nd * m.R * e1.transpose() * dinv * e1;
  return -m.inner().solve(A.adjoint() * bs.metric.gram);
}

inline void require_unital(const GreenOperatorModel& m) {
  const Matrix id = Matrix::Identity(m.dim(), m.dim());
  for (const auto& a : m.algebra.elements)
    if (!a.ideal && (a.matrix - id).norm() <= 1e-12 * double(m.dim())) return;
  throw std::invalid_argument(
      "build_poisson: algebra carries no unit; the glued double needs a "
      "unital scenario");
}

}  // namespace detail

inline PoissonOperator build_poisson(const GreenOperatorModel& m,
                                     const CliffordNormal& cn,
                                     const BoundaryTriple& bt) {
  detail::require_unital(m);
  PoissonOperator po;
  po.mh = minus_half_space(bt.space, bt.Dn);
  if (m.oddness) {
    po.K = detail::poisson_core(m, cn, bt.space);
  } else {
    // Route ungraded models through the Clifford double.  The lifted Poisson
    // operator is block diagonal for the lifted normal, so the first-copy
    // corner is the whole answer.
    const auto lifted = clifford_lift(m, cn);
    const BoundarySpace bsl = boundary_gram(lifted.first, lifted.second);
    const Matrix kl = detail::poisson_core(lifted.first, lifted.second, bsl);
    po.K = kl.topRows(m.dim()).leftCols(m.bdim());
    po.lifted = true;
  }
  po.PC = m.R * po.K;
  return po;
}

inline PoissonOperator build_poisson(const GreenOperatorModel& m,
                                     const CliffordNormal& cn) {
  return build_poisson(m, cn, boundary_operator(m, cn));
}

// Cauchy data space: traces of the maximal kernel modulo the minimal kernel,
// gram_minus-orthonormal columns.
inline Matrix cauchy_space(const GreenOperatorModel& m, const MinusHalfSpace& mh) {
  const Matrix kerd = orthonormalize(nullspace(m.D), m.inner());
  const Matrix mk = minimal_kernel(m);
  Matrix part = kerd;
  if (mk.cols() > 0)
    part -= mk * (mk.adjoint() * (m.inner().gram * kerd));
  const Matrix basis = orthonormalize(part, m.inner());
  return orthonormalize(Matrix(m.R * basis), mh.metric);
}

inline std::vector<CheckReport> check_poisson(const GreenOperatorModel& m,
                                              const CliffordNormal& cn,
                                              const BoundaryTriple& bt,
                                              const PoissonOperator& po) {
  std::vector<CheckReport> out;
  const Eigen::Index N = m.dim();
  const double kscale =
      std::max(1.0, operator_norm(po.K, po.mh.metric, m.inner()));

  out.push_back(make_report(
      "poisson-range-harmonic",
      operator_norm(Matrix(m.D * po.K), po.mh.metric, m.inner()) / kscale, 0.0,
      1e-9));

  // K R u = u on ker(D) cap (minimal kernel)^perp: harmonic vectors are
  // recovered from their traces.
  const Matrix kerd = orthonormalize(nullspace(m.D), m.inner());
  const Matrix mk = minimal_kernel(m);
  Matrix part = kerd;
  if (mk.cols() > 0)
    part -= mk * (mk.adjoint() * (m.inner().gram * kerd));
  const Matrix harm = orthonormalize(part, m.inner());
  double reprod = 0.0;
  if (harm.cols() > 0)
    reprod = operator_norm(
        Matrix(po.K * (m.R * harm) - harm),
        InnerProduct::euclidean(harm.cols()), m.inner());
  out.push_back(make_report("poisson-reproduces-kernel-traces", reprod, 0.0,
                            1e-9,
                            {{"kernel-dim", std::to_string(harm.cols())}}));

  out.push_back(make_report(
      "calderon-idempotent",
      operator_norm(Matrix(po.PC * po.PC - po.PC), po.mh.metric, po.mh.metric),
      0.0, 1e-9));

  const Matrix cauchy = cauchy_space(m, po.mh);
  const Matrix ran = orthonormalize(po.PC, po.mh.metric);
  const double range_gap = operator_norm(
      Matrix(orth_projector(ran, po.mh.metric) -
             orth_projector(cauchy, po.mh.metric)),
      po.mh.metric, po.mh.metric);
  out.push_back(make_report("calderon-range-is-cauchy-space", range_gap, 0.0,
                            1e-9,
                            {{"rank", std::to_string(ran.cols())},
                             {"cauchy-dim", std::to_string(cauchy.cols())}}));

  // The trace intertwines the algebra with its boundary representation on
  // Dom(n); P_C then conjugates correctly against rep.
  double linearity = 0.0;
  for (const auto& a : m.algebra.elements) {
    if (a.ideal) continue;
    const double scale = std::max(1.0, a.matrix.norm());
    linearity = std::max(
        linearity,
        (m.R * a.matrix * cn.ndom -
         bt.space.rep.at(a.name) * (m.R * cn.ndom)).norm() / scale);
  }
  out.push_back(
      make_report("boundary-rep-intertwines-trace", linearity, 0.0, 1e-10));

  (void)N;
  return out;
}

struct ModeComparison {
  int mode = 0;
  double delta = 0.0;      // ||P>= - PC+|| in the minus-half even norm
  double gram_cond = 0.0;  // condition number of gram_minus
  std::string note;        // builder error when the mode could not be compared
};

namespace detail {

inline double gram_condition(const InnerProduct& inner) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      Matrix(0.5 * (inner.gram + inner.gram.adjoint())));
  const RealVector& ev = es.eigenvalues();
  return ev(ev.size() - 1) / ev(0);
}

inline ModeComparison pge_pc_delta(const GreenOperatorModel& m,
                                   const CliffordNormal& cn,
                                   const BoundaryTriple& bt) {
  const OddReduction red = odd_reduction(m, bt);
  const PoissonOperator po = build_poisson(m, cn, bt);
  const Eigen::Index p = red.hplus.cols();

  // hplus is gram_n-orthonormal, so dpartial is self-adjoint for the
  // Euclidean product in plus coordinates; eigenvalue zero belongs to the
  // nonnegative side.
  const Eigensystem eig =
      hermitian_eigensystem(red.dpartial, InnerProduct::euclidean(p));
  Matrix pge = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    if (eig.values(i) >= -kComparisonFloor)
      pge += eig.vectors.col(i) * eig.vectors.col(i).adjoint();

  const Matrix pcp =
      red.hplus.adjoint() * (bt.space.metric.gram * (po.PC * red.hplus));
  const Matrix wp = red.hplus.adjoint() * (po.mh.metric.gram * red.hplus);
  const InnerProduct wip(Matrix(0.5 * (wp + wp.adjoint())));

  ModeComparison mc;
  mc.delta = operator_norm(Matrix(pge - pcp), wip, wip);
  mc.gram_cond = gram_condition(po.mh.metric);
  return mc;
}

}  // namespace detail

// Single-scenario comparison.  The value is recorded, not bounded: a
// difference of a projector and a compression can reach 2, and on models
// with a two-sided boundary it genuinely stays at 1.
inline CheckReport compare_pge_pc(const GreenOperatorModel& m,
                                  const CliffordNormal& cn,
                                  const BoundaryTriple& bt) {
  if (!m.oddness)
    throw std::invalid_argument(
        "compare_pge_pc: model is ungraded; apply clifford_lift and compare "
        "on the double");
  const ModeComparison mc = detail::pge_pc_delta(m, cn, bt);
  return make_report(
      "calderon-even-comparison", mc.delta, 2.0, 0.0,
      {{"gram-minus-cond", std::to_string(mc.gram_cond)}});
}

struct PgePcSweep {
  std::vector<ModeComparison> rows;  // one per angular mode, k ascending
  CheckReport verdict;
};

// Mode-by-mode comparison on the disc.  The verdict checks that the per-|k|
// deltas are nonincreasing beyond the first quartile and that the top mode
// sits at a quarter of the bottom one or less; values under the round-off
// floor count as zero.
inline PgePcSweep compare_pge_pc_modes(const DiscScenario& sc) {
  PgePcSweep sw;
  std::map<int, double> byabs;
  Eigen::Index faulted = 0;
  for (const auto& md : sc.modes) {
    ModeComparison mc;
    mc.mode = md.k;
    try {
      const BoundaryTriple bt = boundary_operator(md.model, md.normal);
      const ModeComparison healthy =
          detail::pge_pc_delta(md.model, md.normal, bt);
      mc.delta = healthy.delta;
      mc.gram_cond = healthy.gram_cond;
    } catch (const std::exception& err) {
      // A mode whose boundary structure cannot even be formed compares
      // maximally; the sweep records the non-decay instead of aborting.
      mc.delta = 2.0;
      mc.note = err.what();
      ++faulted;
    }
    byabs[std::abs(md.k)] = std::max(byabs[std::abs(md.k)], mc.delta);
    sw.rows.push_back(mc);
  }

  std::vector<double> d;
  for (const auto& kv : byabs)
    d.push_back(kv.second < kComparisonFloor ? 0.0 : kv.second);

  double violation = 0.0;
  if (d.size() > 1) {
    const std::size_t q = d.size() / 4;
    for (std::size_t j = q; j + 1 < d.size(); ++j)
      violation = std::max(violation, d[j + 1] - d[j]);
    violation = std::max(violation, d.back() - 0.25 * d.front());
  }
  sw.verdict = make_report(
      "calderon-comparison-decays", violation, 0.0, kComparisonFloor,
      {{"modes", std::to_string(sw.rows.size())},
       {"faulted", std::to_string(faulted)},
       {"delta-top", std::to_string(d.empty() ? 0.0 : d.back())}});
  return sw;
}

}  // namespace gex
