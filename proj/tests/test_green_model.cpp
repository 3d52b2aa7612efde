#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fixtures.hpp"
#include "gex/green_model.hpp"
#include "gex/models.hpp"
#include "gex/serialize.hpp"

using namespace gex;
using Catch::Approx;

namespace {

const CheckReport& find_report(const std::vector<CheckReport>& reports, const std::string& name) {
  for (const auto& r : reports)
    if (r.name == name) return r;
  FAIL("missing report: " << name);
  throw std::logic_error("unreachable");
}

Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = Complex(dist(rng), dist(rng));
  return v;
}

}  // namespace

TEST_CASE("interval model satisfies every structural report") {
  for (int order : {2, 4}) {
    ScenarioConfig cfg;
    cfg.order = order;
    cfg.N = 64;
    const auto sc = interval_dirac(cfg);
    const auto reports = validate_model(sc.model);
    CAPTURE(order);
    for (const auto& r : reports) {
      CAPTURE(r.name, r.measured, r.bound);
      CHECK(r.passed);
    }
    CHECK(all_passed(reports));
  }
}

TEST_CASE("green identity residual is at round-off") {
  const auto sc = interval_dirac(ScenarioConfig{});
  const auto& m = sc.model;
  const Matrix lhs = m.D.adjoint() * m.inner().gram - m.inner().gram * m.D;
  const Matrix rhs = m.R.adjoint() * m.bmetric.gram * m.nu * m.R;
  CHECK((lhs - rhs).norm() <= 1e-15);
}

TEST_CASE("zeroed trace map fails the surjectivity report") {
  auto sc = interval_dirac(ScenarioConfig{});
  sc.model.R.row(2).setZero();
  const auto reports = validate_model(sc.model);
  CHECK_FALSE(find_report(reports, "trace-surjective").passed);
}

TEST_CASE("asymmetric perturbation of D is measured by the identity report") {
  auto sc = interval_dirac(ScenarioConfig{});
  auto& m = sc.model;
  // Rank-one non-symmetric noise of operator size 1e-6 relative to G D.
  const Eigen::Index n = m.dim();
  Matrix noise = Matrix::Zero(n, n);
  noise(n / 3, 2 * n / 3) = 1e-6 * m.D.norm();
  m.D += noise;
  const auto reports = validate_model(m);
  const auto& r = find_report(reports, "green-identity");
  CHECK_FALSE(r.passed);
  CHECK(r.measured > 1e-9);
  CHECK(r.measured < 1e-3);
}

TEST_CASE("boundary form matches its trace-coordinate matrix") {
  const auto sc = interval_dirac(ScenarioConfig{});
  const auto& m = sc.model;
  std::mt19937_64 rng(7);
  const Matrix omega = m.omega_matrix();
  for (int t = 0; t < 20; ++t) {
    const Vector xi = random_vector(m.dim(), rng);
    const Vector eta = random_vector(m.dim(), rng);
    const Complex direct = boundary_form(m, xi, eta);
    const Complex via_traces = Complex((m.R * xi).dot(omega * (m.R * eta)));
    CHECK(std::abs(direct - via_traces) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("boundary form is antisymmetric and kills the minimal domain") {
  const auto sc = interval_dirac(ScenarioConfig{});
  const auto& m = sc.model;
  std::mt19937_64 rng(11);
  const Matrix B0 = minimal_operator(m).basis;
  for (int t = 0; t < 1000; ++t) {
    const Vector xi = random_vector(m.dim(), rng);
    const Vector eta = random_vector(m.dim(), rng);
    const Complex a = boundary_form(m, xi, eta);
    const Complex b = boundary_form(m, eta, xi);
    CHECK(std::abs(a + std::conj(b)) <= 1e-9 * std::max(1.0, std::abs(a)));
    // Shifting either argument by a minimal-domain vector leaves omega fixed.
    const Vector shift = B0 * random_vector(B0.cols(), rng);
    const Complex shifted = boundary_form(m, xi + shift, eta);
    CHECK(std::abs(a - shifted) <= 1e-9 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("interval boundary form on an endpoint indicator") {
  // xi = eta = the u-component node at x = 0: omega = +i |u(0)|^2.
  const auto sc = interval_dirac(ScenarioConfig{});
  const auto& m = sc.model;
  Vector xi = Vector::Zero(m.dim());
  xi(0) = 1.0;
  const Complex val = boundary_form(m, xi, xi);
  CHECK(std::abs(val - Complex(0, 1)) <= 1e-14);
  // And the u-component at x = 1 carries the opposite sign.
  Vector eta = Vector::Zero(m.dim());
  eta(sc.config.N - 1) = 1.0;
  CHECK(std::abs(boundary_form(m, eta, eta) - Complex(0, -1)) <= 1e-14);
}

TEST_CASE("symmetry on the minimal domain") {
  const auto sc = interval_dirac(ScenarioConfig{});
  const auto& m = sc.model;
  const auto mo = minimal_operator(m);
  CHECK(mo.basis.cols() == m.dim() - m.bdim());
  CHECK((m.R * mo.basis).norm() <= 1e-12);
  // <D xi, eta> = <xi, D eta> for xi, eta in ker R.
  const Matrix sym = mo.basis.adjoint() *
                     (m.inner().gram * m.D - m.D.adjoint() * m.inner().gram) * mo.basis;
  CHECK(sym.norm() <= 1e-13 * m.D.norm());
  // The minimal operator has no kernel: both traces of a solution vanish.
  Eigen::JacobiSVD<Matrix> svd(mo.action);
  CHECK(svd.singularValues()(mo.basis.cols() - 1) > 1e-3);
}

TEST_CASE("lip norm dominates the operator norm and vanishes nowhere on the algebra") {
  const auto sc = interval_dirac(ScenarioConfig{});
  const auto& m = sc.model;
  for (const auto& e : m.algebra.elements) {
    const double lip = lip_norm(m, e.matrix);
    const double op = operator_norm(e.matrix, m.inner(), m.inner());
    CHECK(lip >= op);
    CHECK(lip > 0.0);
  }
  CHECK(lip_norm(m, m.algebra.by_name("one").matrix) == Approx(1.0));
}

TEST_CASE("model json round trip is bit exact") {
  ScenarioConfig cfg;
  cfg.N = 16;
  const auto sc = interval_dirac(cfg);
  const auto& m = sc.model;
  const std::string text = model_to_string(m);
  const GreenOperatorModel back = model_from_string(text);

  REQUIRE(back.dim() == m.dim());
  REQUIRE(back.bdim() == m.bdim());
  CHECK(back.inner().gram == m.inner().gram);
  CHECK(back.space.grading == m.space.grading);
  CHECK(back.D == m.D);
  CHECK(back.R == m.R);
  CHECK(back.bmetric.gram == m.bmetric.gram);
  CHECK(back.nu == m.nu);
  CHECK(back.oddness == m.oddness);
  REQUIRE(back.algebra.elements.size() == m.algebra.elements.size());
  for (std::size_t i = 0; i < m.algebra.elements.size(); ++i) {
    CHECK(back.algebra.elements[i].name == m.algebra.elements[i].name);
    CHECK(back.algebra.elements[i].matrix == m.algebra.elements[i].matrix);
    CHECK(back.algebra.elements[i].ideal == m.algebra.elements[i].ideal);
  }
  // A second serialization of the reloaded model is byte-identical.
  CHECK(model_to_string(back) == text);
}

TEST_CASE("oddness flag is recovered from the matrices on load") {
  const auto sc = interval_dirac(ScenarioConfig{});
  REQUIRE(sc.model.oddness);
  Json j = model_to_json(sc.model);
  const GreenOperatorModel back = model_from_json(j);
  CHECK(back.oddness);

  // A non-anticommuting pair loads with the flag off.
  const auto fix = gexfix::scalar_interval(16);
  CHECK_FALSE(model_from_json(model_to_json(fix)).oddness);
}

TEST_CASE("malformed model documents are rejected") {
  const auto sc = interval_dirac(ScenarioConfig{});
  Json good = model_to_json(sc.model);

  Json missing = good;
  missing.erase("nu");
  CHECK_THROWS(model_from_json(missing));

  Json badshape = good;
  badshape["R"] = matrix_to_json(Matrix::Identity(3, 3));
  CHECK_THROWS(model_from_json(badshape));

  CHECK_THROWS(model_from_string("not json at all"));
  CHECK_THROWS(model_from_string("{\"dim\": 4}"));
}

TEST_CASE("scalar fixture is green exact with a diagonal boundary form") {
  const auto m = gexfix::scalar_interval(32);
  const auto reports = validate_model(m);
  for (const auto& r : reports) {
    CAPTURE(r.name, r.measured);
    CHECK(r.passed);
  }
  const Matrix omega = m.omega_matrix();
  CHECK(std::abs(omega(0, 0) - Complex(0, 1)) <= 1e-15);
  CHECK(std::abs(omega(1, 1) - Complex(0, -1)) <= 1e-15);
  CHECK(std::abs(omega(0, 1)) + std::abs(omega(1, 0)) <= 1e-15);
}
