#include <catch2/catch.hpp>
#include <cmath>
#include <random>

#include "pss/model.hpp"

using namespace pss;

namespace {
Vector nodal(const FemSpace& space, const std::function<double(double)>& f) {
  Vector v(space.n_interior);
  for (int i = 0; i < space.n_interior; ++i) v[i] = f(space.node(i));
  return v;
}

double exact_u0(double x) { return 0.5 * x * (1.0 - x); }
}  // namespace

TEST_CASE("check_uea on canonical coefficient families") {
  FemSpace space(15);
  std::size_t ne = static_cast<std::size_t>(space.n_elements());
  std::vector<double> abar(ne, 1.0);

  SECTION("single constant psi") {
    std::vector<std::vector<double>> psis{std::vector<double>(ne, 0.6)};
    CHECK(check_uea(abar, psis) == Approx(0.4));
  }
  SECTION("disjoint inclusions share the budget") {
    auto family = disjoint_inclusions(space, 4, 0.9);
    CHECK(family.uea_constant() == Approx(0.1));
  }
  SECTION("violated ellipticity is rejected") {
    std::vector<std::vector<double>> psis{std::vector<double>(ne, 0.6),
                                          std::vector<double>(ne, 0.5)};
    CHECK(check_uea(abar, psis) == Approx(-0.1));
    CHECK_THROWS_AS(AffineCoefficientFamily(space, abar, psis,
                                            {PsiKind::GlobalSmooth, PsiKind::GlobalSmooth}),
                    malformed_input);
  }
}

TEST_CASE("P1 assembly matches hand computations") {
  FemSpace space(3);  // h = 1/4
  const double h = space.h;
  REQUIRE(h == Approx(0.25));

  SECTION("constant coefficient gives the Laplacian stencil") {
    auto family = disjoint_inclusions(space, 4, 0.5);
    StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
    const auto& L = stiff.laplace();
    for (int i = 0; i < 3; ++i) CHECK(L.diagonal()[i] == Approx(2.0 / h));
    for (int i = 0; i < 2; ++i) CHECK(L.off_diagonal()[i] == Approx(-1.0 / h));
    // abar = 1 so Bbar is the same matrix
    for (int i = 0; i < 3; ++i) CHECK(stiff.bbar().diagonal()[i] == Approx(2.0 / h));
  }

  SECTION("psi = 1 reproduces Bbar of abar = 1") {
    std::size_t ne = static_cast<std::size_t>(space.n_elements());
    AffineCoefficientFamily family(space, std::vector<double>(ne, 1.0),
                                   {std::vector<double>(ne, 0.5)}, {PsiKind::GlobalSmooth});
    StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
    for (int i = 0; i < 3; ++i)
      CHECK(stiff.bj(0).diagonal()[i] == Approx(0.5 * stiff.bbar().diagonal()[i]));
  }

  SECTION("indicator on (0,1/2): Laplacian stencil on the first two elements") {
    auto family = disjoint_inclusions(space, 2, 1.0 - 0.25);
    StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
    const double theta = 0.75;
    const auto& B1 = stiff.bj(0);
    CHECK(B1.diagonal()[0] == Approx(theta * 2.0 / h));
    CHECK(B1.diagonal()[1] == Approx(theta * 1.0 / h));
    CHECK(B1.diagonal()[2] == Approx(0.0).margin(1e-15));
    CHECK(B1.off_diagonal()[0] == Approx(-theta / h));
    CHECK(B1.off_diagonal()[1] == Approx(0.0).margin(1e-15));
  }
}

TEST_CASE("solve: nodal exactness and scalar scaling") {
  FemSpace space(63);
  SECTION("abar = 1, f = 1, y = 0 hits x(1-x)/2 at the nodes") {
    auto family = disjoint_inclusions(space, 4, 0.5);
    StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
    Vector u = stiff.solve(std::vector<double>{});
    Vector ref = nodal(space, exact_u0);
    CHECK((u - ref).lpNorm<Eigen::Infinity>() <= 1e-13);
  }

  SECTION("single constant psi scales the solution by 1/(1+theta y)") {
    std::size_t ne = static_cast<std::size_t>(space.n_elements());
    AffineCoefficientFamily family(space, std::vector<double>(ne, 1.0),
                                   {std::vector<double>(ne, 0.6)}, {PsiKind::GlobalSmooth});
    StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
    Vector u0 = stiff.solve(std::vector<double>{0.0});
    Vector uy = stiff.solve(std::vector<double>{0.5});
    CHECK((uy * (1.0 + 0.6 * 0.5) - u0).lpNorm<Eigen::Infinity>() <= 1e-13);
  }

  SECTION("piecewise-constant coefficient: variational residual vanishes") {
    auto family = disjoint_inclusions(space, 2, 0.5);
    StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int t = 0; t < 5; ++t) {
      std::vector<double> y{dist(rng), dist(rng)};
      Vector u = stiff.solve(y);
      SymTridiagonal b = stiff.bbar();
      b.axpy(y[0], stiff.bj(0));
      b.axpy(y[1], stiff.bj(1));
      Vector res = b.apply(u) - stiff.load();
      Vector z = stiff.laplace().solve(res);
      CHECK(std::sqrt(res.dot(z)) <= 1e-12);
    }
  }

  SECTION("parameters outside the cube are rejected") {
    auto family = disjoint_inclusions(space, 2, 0.5);
    StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
    CHECK_THROWS_AS(stiff.solve(std::vector<double>{1.5, 0.0}), malformed_input);
    CHECK_THROWS_AS(stiff.solve(std::vector<double>{0.0, 0.0, 0.0}), malformed_input);
  }
}

TEST_CASE("norms") {
  FemSpace space(255);
  auto family = disjoint_inclusions(space, 4, 0.5);
  StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));

  SECTION("V-norm of x(1-x)/2 approaches 1/sqrt(12)") {
    Vector v = nodal(space, exact_u0);
    CHECK(stiff.v_norm(v) == Approx(1.0 / std::sqrt(12.0)).margin(space.h));
  }
  SECTION("zero vector") { CHECK(stiff.v_norm(Vector::Zero(space.n_interior)) == 0.0); }
  SECTION("abar = 1 makes both norms agree") {
    std::size_t ne = static_cast<std::size_t>(space.n_elements());
    AffineCoefficientFamily unit(space, std::vector<double>(ne, 1.0),
                                 {std::vector<double>(ne, 0.3)}, {PsiKind::GlobalSmooth});
    StiffnessSet s2(space, unit, StiffnessSet::constant_load(space, 1.0));
    std::mt19937_64 rng(8);
    Vector v(space.n_interior);
    for (int i = 0; i < v.size(); ++i) v[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
    CHECK(s2.v_norm(v) == Approx(s2.abar_norm(v)).epsilon(1e-12));
  }
  SECTION("norm equivalence r ||.||_V^2 <= ||.||_abar^2 <= amax ||.||_V^2") {
    std::mt19937_64 rng(9);
    const double r = family.uea_constant(), amax = family.abar_max();
    for (int t = 0; t < 10; ++t) {
      Vector v(space.n_interior);
      for (int i = 0; i < v.size(); ++i)
        v[i] = std::uniform_real_distribution<double>(-1, 1)(rng);
      double vn2 = stiff.v_norm(v) * stiff.v_norm(v);
      double an2 = stiff.abar_norm(v) * stiff.abar_norm(v);
      CHECK(r * vn2 <= an2 * (1.0 + 1e-12));
      CHECK(an2 <= amax * vn2 * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("solution map: a priori bound and Lipschitz continuity") {
  FemSpace space(127);
  auto family = disjoint_inclusions(space, 4, 0.5);
  StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
  const double r = family.uea_constant();
  const double fdual = stiff.load_dual_norm();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);

  auto coeff_gap = [&](const std::vector<double>& y, const std::vector<double>& yp) {
    double m = 0.0;
    for (std::size_t e = 0; e < static_cast<std::size_t>(space.n_elements()); ++e) {
      double g = 0.0;
      for (int j = 0; j < 4; ++j)
        g += (y[static_cast<std::size_t>(j)] - yp[static_cast<std::size_t>(j)]) *
             family.psi(j)[e];
      m = std::max(m, std::abs(g));
    }
    return m;
  };

  for (int t = 0; t < 20; ++t) {
    std::vector<double> y{dist(rng), dist(rng), dist(rng), dist(rng)};
    std::vector<double> yp{dist(rng), dist(rng), dist(rng), dist(rng)};
    Vector u = stiff.solve(y), up = stiff.solve(yp);
    CHECK(stiff.v_norm(u) <= fdual / r * (1.0 + 1e-12));
    CHECK(stiff.v_norm(u - up) <= 2.0 * fdual / (r * r) * coeff_gap(y, yp) * (1.0 + 1e-12));
  }
}

TEST_CASE("mesh convergence is first order for abar = 1, f = 1") {
  auto v_error = [](int n_interior) {
    FemSpace space(n_interior);
    auto family = disjoint_inclusions(space, 2, 0.5);
    StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
    Vector u = stiff.solve(std::vector<double>{0.0, 0.0});
    // elementwise 2-point Gauss quadrature of (u' - u_h')^2, exact here
    double err2 = 0.0;
    const double h = space.h;
    for (int e = 0; e < space.n_elements(); ++e) {
      double ul = e == 0 ? 0.0 : u[e - 1];
      double ur = e == space.n_elements() - 1 ? 0.0 : u[e];
      double slope = (ur - ul) / h;
      for (double g : {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)}) {
        double x = e * h + 0.5 * h * (1.0 + g);
        double diff = (0.5 - x) - slope;
        err2 += 0.5 * h * diff * diff;
      }
    }
    return std::sqrt(err2);
  };
  double e1 = v_error(31), e2 = v_error(63);
  CHECK(e1 / e2 == Approx(2.0).epsilon(0.05));
  CHECK(e1 == Approx(1.0 / (31 + 1) / std::sqrt(12.0)).epsilon(0.01));
}

TEST_CASE("B_j entries are dominated by the psi sup norm times the Laplacian stencil") {
  FemSpace space(63);
  auto family = smooth_family(space, 6, 2.0, 0.5);
  StiffnessSet stiff(space, family, StiffnessSet::constant_load(space, 1.0));
  for (int j = 0; j < family.dims(); ++j) {
    for (int i = 0; i < space.n_interior; ++i)
      CHECK(std::abs(stiff.bj(j).diagonal()[i]) <=
            family.psi_sup(j) * stiff.laplace().diagonal()[i] * (1.0 + 1e-12));
    for (int i = 0; i + 1 < space.n_interior; ++i)
      CHECK(std::abs(stiff.bj(j).off_diagonal()[i]) <=
            family.psi_sup(j) * std::abs(stiff.laplace().off_diagonal()[i]) * (1.0 + 1e-12));
  }
}

TEST_CASE("smooth family realizes the target ellipticity and norm ordering") {
  FemSpace space(127);
  auto family = smooth_family(space, 12, 3.0, 0.5);
  CHECK(family.uea_constant() >= 0.5);
  for (int j = 1; j < family.dims(); ++j) CHECK(family.psi_sup(j) <= family.psi_sup(j - 1) + 1e-15);

  SECTION("explicit amplitude is accepted and checked against ellipticity") {
    auto direct = smooth_family_with_amplitude(space, 12, 3.0, 0.3);
    CHECK(direct.uea_constant() > 0.6);
    CHECK_THROWS_AS(smooth_family_with_amplitude(space, 12, 3.0, 2.0), malformed_input);
  }
}
