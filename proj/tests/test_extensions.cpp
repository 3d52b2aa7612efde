#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "gex/extensions.hpp"
#include "gex/models.hpp"

using namespace gex;
using Catch::Approx;

namespace {

Matrix column(std::initializer_list<Complex> entries) {
  Matrix m(static_cast<Eigen::Index>(entries.size()), 1);
  Eigen::Index i = 0;
  for (const Complex& z : entries) m(i++, 0) = z;
  return m;
}

// Projector comparison: same span iff the bmetric projectors agree.
bool same_span(const GreenOperatorModel& m, const ExtensionSubspace& a,
               const ExtensionSubspace& b) {
  const Matrix pa = a.basis * a.basis.adjoint() * m.bmetric.gram;
  const Matrix pb = b.basis * b.basis.adjoint() * m.bmetric.gram;
  return (pa - pb).norm() <= 1e-10;
}

}  // namespace

TEST_CASE("annihilator on the scalar endpoint form") {
  // omega(x, y) = i x0bar y0 - i x1bar y1: diagonal, so the annihilator of
  // the first coordinate line is the second coordinate line.
  const auto m = gexfix::scalar_interval(16);
  const auto L = make_subspace(m, column({1.0, 0.0}));
  const auto Lp = annihilator(m, L);
  REQUIRE(Lp.dim() == 1);
  CHECK(std::abs(Lp.basis(0, 0)) <= 1e-12);
  CHECK(std::abs(std::abs(Lp.basis(1, 0)) - 1.0) <= 1e-12);
  CHECK(Lp.warnings.empty());

  SECTION("trivial subspace annihilates to everything") {
    const ExtensionSubspace zero = make_subspace(m, Matrix(2, 0));
    CHECK(annihilator(m, zero).dim() == 2);
  }
  SECTION("full subspace annihilates to nothing") {
    const auto full = make_subspace(m, Matrix(Matrix::Identity(2, 2)));
    CHECK(annihilator(m, full).dim() == 0);
  }
  SECTION("double annihilator returns the original span") {
    CHECK(same_span(m, annihilator(m, Lp), L));
  }
}

TEST_CASE("classification of scalar boundary subspaces") {
  const auto m = gexfix::scalar_interval(16);
  // Diagonal form with opposite signs: the graph lines z -> e^{ia} z are
  // exactly the lagrangian lines.
  for (int j = 0; j < 8; ++j) {
    const double alpha = 2.0 * 3.14159265358979323846 * j / 8.0;
    const auto L = make_subspace(m, column({1.0, std::exp(Complex(0, alpha))}));
    CHECK(classify(m, L) == ExtensionClass::lagrangian);
  }
  // A coordinate line pairs with itself: generic (not isotropic), and its
  // annihilator is the other line.
  const auto L0 = make_subspace(m, column({1.0, 0.0}));
  CHECK(classify(m, L0) == ExtensionClass::generic);
  // The zero subspace is isotropic; the full space is coisotropic.
  CHECK(classify(m, make_subspace(m, Matrix(2, 0))) == ExtensionClass::isotropic);
  CHECK(classify(m, make_subspace(m, Matrix(Matrix::Identity(2, 2)))) ==
        ExtensionClass::coisotropic);
}

TEST_CASE("interval twisted boundary conditions give a lagrangian family") {
  const auto sc = interval_dirac(ScenarioConfig{});
  const auto& m = sc.model;
  // L_alpha = {(u0, v0, e^{ia} u0, e^{ia} v0)}: both components twisted by
  // the same phase.  Trace order is (u(0), v(0), u(1), v(1)).
  for (double alpha : {0.0, 0.7, 3.14159265358979323846, 5.5}) {
    const Complex ph = std::exp(Complex(0, alpha));
    Matrix raw(4, 2);
    raw << 1.0, 0.0, 0.0, 1.0, ph, 0.0, 0.0, ph;
    const auto L = make_subspace(m, raw);
    CAPTURE(alpha);
    CHECK(classify(m, L) == ExtensionClass::lagrangian);
  }
}

TEST_CASE("extension operators over lagrangian subspaces are symmetric") {
  const auto m = gexfix::scalar_interval(64, 4);
  const auto L = make_subspace(m, column({1.0, 1.0}));  // periodic: alpha = 0
  REQUIRE(classify(m, L) == ExtensionClass::lagrangian);
  const auto ext = extension_operator(m, L);
  CHECK(ext.domain.cols() == m.dim() - 1);  // one boundary constraint
  // Compressed matrix is Hermitian to round-off.
  CHECK((ext.compressed - ext.compressed.adjoint()).norm() <=
        1e-12 * ext.compressed.norm());
  const Vector ev = extension_eigenvalues(ext);
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    CHECK(std::abs(ev(i).imag()) <= 1e-9 * std::max(1.0, std::abs(ev(i))));
}

TEST_CASE("twisted spectra match the shifted lattice") {
  // D = -i d/dx with u(1) = e^{ia} u(0) has spectrum {alpha + 2 pi k}.
  const double alpha = 0.9;
  const auto m = gexfix::scalar_interval(96, 4);
  const auto L = make_subspace(m, column({1.0, std::exp(Complex(0, alpha))}));
  const auto ext = extension_operator(m, L);
  const Vector ev = extension_eigenvalues(ext);
  std::vector<double> real;
  for (Eigen::Index i = 0; i < ev.size(); ++i) real.push_back(ev(i).real());
  std::sort(real.begin(), real.end());
  const double two_pi = 2.0 * 3.14159265358979323846;
  for (int k = -2; k <= 2; ++k) {
    const double target = alpha + two_pi * k;
    double best = 1e300;
    for (double x : real) best = std::min(best, std::abs(x - target));
    CAPTURE(k, target, best);
    CHECK(best <= 5e-3 * std::max(1.0, std::abs(target)));
  }
}

TEST_CASE("adjoint domains pair through the annihilator") {
  // <D xi, eta> = <xi, D eta> holds for xi with traces in L exactly against
  // eta with traces in the annihilator of L, and fails off it.
  const auto m = gexfix::scalar_interval(24);
  const auto L = make_subspace(m, column({1.0, 0.0}));
  const auto Lp = annihilator(m, L);
  const auto extL = extension_operator(m, L);
  const auto extLp = extension_operator(m, Lp);
  const Matrix cross = extLp.domain.adjoint() *
                       (m.inner().gram * m.D - m.D.adjoint() * m.inner().gram) * extL.domain;
  CHECK(cross.norm() <= 1e-12 * m.D.norm());
  // Swapping in the non-annihilating line breaks the pairing.
  const auto bad = extension_operator(m, L);
  const Matrix broken = bad.domain.adjoint() *
                        (m.inner().gram * m.D - m.D.adjoint() * m.inner().gram) * extL.domain;
  CHECK(broken.norm() > 1e-3);
}

TEST_CASE("lagrangian search produces a lagrangian subspace") {
  const auto m = gexfix::scalar_interval(16);
  const auto res = lagrangian_search(m, LagrangianConstraints{}, 42);
  REQUIRE(res.found.has_value());
  CHECK(res.obstruction.empty());
  CHECK(res.found->dim() == 1);
  CHECK(classify(m, *res.found) == ExtensionClass::lagrangian);

  SECTION("deterministic in the seed") {
    const auto again = lagrangian_search(m, LagrangianConstraints{}, 42);
    REQUIRE(again.found.has_value());
    CHECK(again.found->basis == res.found->basis);
  }
  SECTION("different seeds still produce lagrangians") {
    for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
      const auto other = lagrangian_search(m, LagrangianConstraints{}, seed);
      REQUIRE(other.found.has_value());
      CHECK(classify(m, *other.found) == ExtensionClass::lagrangian);
    }
  }
}

TEST_CASE("blockwise search respects endpoint labels") {
  const auto sc = interval_dirac(ScenarioConfig{});
  const auto& m = sc.model;
  LagrangianConstraints cons;
  cons.blocks = {0, 0, 1, 1};  // left endpoint coordinates, right ones
  const auto res = lagrangian_search(m, cons, 5);
  REQUIRE(res.found.has_value());
  CHECK(res.found->dim() == 2);
  CHECK(classify(m, *res.found) == ExtensionClass::lagrangian);
  REQUIRE(res.found->labels.size() == 2);
  // One basis vector per endpoint: supported on the block coordinates only.
  for (Eigen::Index j = 0; j < 2; ++j) {
    const int tag = res.found->labels[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < 4; ++i)
      if (cons.blocks[static_cast<std::size_t>(i)] != tag)
        CHECK(std::abs(res.found->basis(i, j)) <= 1e-12);
  }
  // The resulting extension is symmetric.
  const auto ext = extension_operator(m, *res.found);
  CHECK((ext.compressed - ext.compressed.adjoint()).norm() <=
        1e-11 * std::max(1.0, ext.compressed.norm()));
}

TEST_CASE("graded search on the interval boundary") {
  const auto sc = interval_dirac(ScenarioConfig{});
  const auto& m = sc.model;
  // The boundary grading swaps u and v traces at each endpoint.
  Matrix gb = Matrix::Zero(4, 4);
  gb(0, 1) = 1.0;
  gb(1, 0) = 1.0;
  gb(2, 3) = 1.0;
  gb(3, 2) = 1.0;
  LagrangianConstraints cons;
  cons.blocks = {0, 0, 1, 1};
  cons.graded = true;
  cons.grading_b = gb;
  const auto res = lagrangian_search(m, cons, 0);
  REQUIRE(res.found.has_value());
  CHECK(classify(m, *res.found) == ExtensionClass::lagrangian);
  // Found space is grading-invariant.
  const Matrix img = gb * res.found->basis;
  const Matrix proj = res.found->basis * res.found->basis.adjoint() * m.bmetric.gram;
  CHECK((img - proj * img).norm() <= 1e-10);
}

TEST_CASE("graded search reports the counting obstruction") {
  const auto m = gexfix::scalar_interval(16);
  LagrangianConstraints cons;
  cons.graded = true;
  cons.grading_b = Matrix(Matrix::Identity(2, 2));  // all of C^b in the +1 eigenspace
  const auto res = lagrangian_search(m, cons, 0);
  CHECK_FALSE(res.found.has_value());
  CHECK(res.obstruction.find("grading eigenspace") != std::string::npos);
}

TEST_CASE("definite boundary forms admit no lagrangian") {
  const auto m = gexfix::definite_form_model();
  REQUIRE(all_passed(validate_model(m)));
  const auto res = lagrangian_search(m, LagrangianConstraints{}, 3);
  CHECK_FALSE(res.found.has_value());
  CHECK(res.obstruction.find("signature") != std::string::npos);
  // Every line is generic for a definite form.
  CHECK(classify(m, make_subspace(m, column({1.0, 0.0}))) == ExtensionClass::generic);
  CHECK(classify(m, make_subspace(m, column({1.0, 1.0}))) == ExtensionClass::generic);
}
