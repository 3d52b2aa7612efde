#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "gex/boundary_op.hpp"
#include "gex/models.hpp"
#include "gex/serialize.hpp"

using namespace gex;

namespace {

// Signed discrete logarithmic derivative of the regular weight r^|kappa| at
// the outer node.  The boundary operator of the disc mode must act on trace
// coordinates as exactly this multiplier, in sigma_2 form; computed here
// straight from the difference operator, without touching the descent path.
double outer_log_derivative(int order, Eigen::Index N, int k) {
  const double kappa = k + 0.5;
  const SbpOperator op = build_sbp(order, N, 1.0 / double(N), 1.0);
  Eigen::VectorXd w(N);
  for (Eigen::Index i = 0; i < N; ++i) w(i) = std::pow(op.grid(i), std::abs(kappa));
  const double raw = op.d1().row(N - 1).dot(w) / w(N - 1);
  return (kappa > 0 ? 1.0 : -1.0) * raw;
}

Matrix sigma2_form(double khat) {
  Matrix o = Matrix::Zero(2, 2);
  o(0, 1) = Complex(0, khat);
  o(1, 0) = Complex(0, -khat);
  return o;
}

}  // namespace

TEST_CASE("interval boundary operator vanishes with exact representative independence") {
  ScenarioConfig cfg;
  cfg.N = 48;
  const IntervalScenario sc = interval_dirac(cfg);
  const BoundaryTriple bt = boundary_operator(sc.model, sc.normal);

  // The tapered normal commutes with D near the endpoints, so Dn = 0; the
  // second-order domain is everything, its zero-trace part drops b = 4.
  CHECK(bt.Dn.norm() <= 1e-10);
  CHECK(bt.h2n.cols() == 2 * cfg.N);
  CHECK(bt.h2n0.cols() == 2 * cfg.N - 4);
  CHECK(bt.rep_independence <= 1e-12);

  for (const auto& r : check_equivalences(sc.model, sc.normal)) {
    CAPTURE(r.name, r.measured);
    CHECK(r.passed);
    CHECK(r.measured <= 1e-12);
  }
  for (const auto& r : check_assumption6(sc.model, sc.normal, bt)) {
    CAPTURE(r.name, r.measured);
    CHECK(r.passed);
  }

  const OddReduction red = odd_reduction(sc.model, bt);
  CHECK(red.hplus.cols() == 2);
  CHECK(red.dpartial.norm() <= 1e-10);
  CHECK((red.rebuilt - bt.Dn).norm() <= 1e-10);
}

TEST_CASE("disc boundary operator is the outer log-derivative in sigma-2 form") {
  ScenarioConfig cfg;
  cfg.N = 48;
  cfg.modes = 2;  // |k| = 2 runs with the shrunk n-domain
  for (int k = -2; k <= 2; ++k) {
    CAPTURE(k);
    const DiscMode md = disc_mode(cfg, k);
    const BoundaryTriple bt = boundary_operator(md.model, md.normal);
    const double khat = outer_log_derivative(cfg.order, cfg.N, k);

    CHECK((bt.Dn - sigma2_form(khat)).norm() <= 1e-9);
    CHECK((bt.space.metric.gram - Matrix::Identity(2, 2)).norm() <= 1e-12);
    CHECK(bt.rep_independence <= 1e-12);

    // The multiplier carries the half-integer k + 1/2 to first order in h.
    CHECK(std::abs(khat - md.kappa) <= 0.1);
    CHECK(khat * md.kappa > 0.0);

    for (const auto& r : check_equivalences(md.model, md.normal)) {
      CAPTURE(r.name, r.measured);
      CHECK(r.passed);
      CHECK(r.measured <= 1e-12);
    }
    for (const auto& r : check_assumption6(md.model, md.normal, bt)) {
      CAPTURE(r.name, r.measured);
      CHECK(r.passed);
    }

    const OddReduction red = odd_reduction(md.model, bt);
    REQUIRE(red.dpartial.rows() == 1);
    CHECK(std::abs(red.dpartial(0, 0) - Complex(-khat, 0)) <= 1e-9);
    CHECK((red.rebuilt - bt.Dn).norm() <= 1e-10);
  }

  // Modes k and -1-k mirror each other: same |kappa|, opposite sign.
  const Matrix dplus = boundary_operator(disc_mode(cfg, 1).model, disc_mode(cfg, 1).normal).Dn;
  const Matrix dminus = boundary_operator(disc_mode(cfg, -2).model, disc_mode(cfg, -2).normal).Dn;
  CHECK((dplus + dminus).norm() <= 1e-10);
}

TEST_CASE("disc boundary operator converges to the half-integer multiplier at first order") {
  ScenarioConfig cfg;
  cfg.modes = 2;
  double err[2];
  for (int i = 0; i < 2; ++i) {
    cfg.N = 32 << i;
    const DiscMode md = disc_mode(cfg, 1);
    const BoundaryTriple bt = boundary_operator(md.model, md.normal);
    err[i] = std::abs(bt.Dn(0, 1).imag() - md.kappa);
  }
  CHECK(err[1] <= 0.01);
  CHECK(err[0] / err[1] >= 1.7);
  CHECK(err[0] / err[1] <= 2.3);
}

TEST_CASE("tangential fault breaks all four equivalence formulations together") {
  ScenarioConfig cfg;
  cfg.N = 32;
  const IntervalScenario sc = interval_dirac(cfg);

  // Mix a tangential (grading-direction) multiplication into the normal:
  // [D,n] picks up a first-order part, and every formulation of the
  // representative-independence hypothesis must reject it at once.
  Matrix psi = Matrix::Zero(sc.model.dim(), sc.model.dim());
  for (Eigen::Index i = 0; i < cfg.N; ++i) {
    const double x = double(i) / double(cfg.N - 1);
    psi(i, cfg.N + i) = Complex(0, 0.3) * (1.0 - x);
    psi(cfg.N + i, i) = Complex(0, 0.3) * (1.0 - x);
  }
  CliffordNormal bad = sc.normal;
  bad.n = sc.normal.n + psi;

  const auto reports = check_equivalences(sc.model, bad);
  REQUIRE(reports.size() == 4);
  for (const auto& r : reports) {
    CAPTURE(r.name, r.measured);
    CHECK_FALSE(r.passed);
    CHECK(r.measured > 1e-4);
  }
  CHECK_THROWS_AS(boundary_operator(sc.model, bad), std::domain_error);
  CHECK_THROWS_WITH(boundary_operator(sc.model, bad),
                    Catch::Matchers::ContainsSubstring("leaks trace"));
}

TEST_CASE("self-adjointness check isolates a tampered boundary operator") {
  ScenarioConfig cfg;
  cfg.N = 32;
  const DiscMode md = disc_mode(cfg, 0);
  BoundaryTriple bad = boundary_operator(md.model, md.normal);
  // A phase rotation keeps the anticommutation with nd but breaks symmetry.
  bad.Dn = Complex(0, 1) * bad.Dn;

  for (const auto& r : check_assumption6(md.model, md.normal, bad)) {
    CAPTURE(r.name, r.measured);
    if (r.name == "assumption6-d-dn-self-adjoint")
      CHECK_FALSE(r.passed);
    else
      CHECK(r.passed);
  }
}

TEST_CASE("boundary operator is stable under interior changes of the normal") {
  ScenarioConfig cfg;
  cfg.N = 48;
  const DiscMode md = disc_mode(cfg, 0);
  const BoundaryTriple bt = boundary_operator(md.model, md.normal);

  // Multiply the normal by 1 + psi with psi supported in the taper decay
  // band, well away from the outer rows and the origin closure.  Boundary
  // classes never see the change.
  const Eigen::Index M = cfg.N - 1;
  Eigen::VectorXd bump = Eigen::VectorXd::Zero(2 * M);
  for (Eigen::Index j = M / 2; j < 3 * M / 4; ++j) {
    const double t = double(j - M / 2) / double(M / 4);
    const double s = 0.05 * std::sin(3.14159265358979323846 * t);
    bump(j) = s;
    bump(M + j) = s;
  }
  CliffordNormal moved = md.normal;
  moved.n = md.normal.n + md.normal.n * Matrix(bump.cast<Complex>().asDiagonal());

  const BoundaryTriple bt2 = boundary_operator(md.model, moved);
  CHECK((bt2.Dn - bt.Dn).norm() <= 1e-9);
}

TEST_CASE("ungraded scenario reduces with an error") {
  const Eigen::Index N = 32;
  GreenOperatorModel m = gexfix::scalar_interval(N);
  Matrix n = Matrix::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    n(i, i) = Complex(0, 1) * (taper_profile(N - 1 - i, N, 2) - taper_profile(i, N, 2));
  const CliffordNormal cn = CliffordNormal::full_domain(m, n);

  const BoundaryTriple bt = boundary_operator(m, cn);
  CHECK(bt.Dn.norm() <= 1e-10);
  CHECK_THROWS_AS(odd_reduction(m, bt), std::invalid_argument);
  CHECK_THROWS_WITH(odd_reduction(m, bt),
                    Catch::Matchers::ContainsSubstring("ungraded"));
}

TEST_CASE("reduction requires anticommutation with the boundary normal") {
  ScenarioConfig cfg;
  cfg.N = 32;
  const IntervalScenario sc = interval_dirac(cfg);
  BoundaryTriple bad = boundary_operator(sc.model, sc.normal);
  bad.Dn += 0.05 * Matrix::Identity(bad.space.dim, bad.space.dim);
  CHECK_THROWS_WITH(odd_reduction(sc.model, bad),
                    Catch::Matchers::ContainsSubstring("anticommute"));
}

TEST_CASE("boundary data serializes with its representation") {
  ScenarioConfig cfg;
  cfg.N = 32;
  const DiscMode md = disc_mode(cfg, 1);
  const BoundaryTriple bt = boundary_operator(md.model, md.normal);
  const Json j = boundary_to_json(bt);

  CHECK(j["dim"] == 2);
  CHECK((matrix_from_json(j["Dn"]) - bt.Dn).norm() == 0.0);
  CHECK((matrix_from_json(j["gram_n"]) - bt.space.metric.gram).norm() == 0.0);
  CHECK((matrix_from_json(j["nd"]) - bt.space.nd).norm() == 0.0);
  for (const auto& [name, mat] : bt.space.rep) {
    CAPTURE(name);
    REQUIRE(j["rep"].contains(name));
    CHECK((matrix_from_json(j["rep"][name]) - mat).norm() == 0.0);
  }
}
