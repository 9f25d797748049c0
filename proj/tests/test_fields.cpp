#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "torusflow/fields.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

using namespace torusflow;
using namespace torusflow::testing;

TEST_CASE("constant field evaluates to xi everywhere") {
  FieldSpec spec = make_constant(make_vec({1.0, 0.0}));
  for (const Vec& x : random_points(10, 2)) {
    Vec b = eval_field(spec, x);
    CHECK(b[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b[1] == doctest::Approx(0.0).epsilon(1e-15));
  }
  CHECK(eval_jacobian_matrix(spec, make_vec({0.3, 0.4})).norm() == 0.0);
}

TEST_CASE("stepanoff field vanishes at the origin") {
  FieldSpec spec = make_stepanoff(2, 0.75, make_vec({1.0, std::sqrt(2.0)}));
  Vec b = eval_field(spec, make_vec({0.0, 0.0}));
  CHECK(b.norm() == 0.0);
}

TEST_CASE("single-mode fourier field reproduces cos(2 pi x1)") {
  auto table = std::make_shared<FourierTable>(2, 1, 2);
  table->at(0, {1, 0}) = 0.5;  // cos(2 pi x1) = (e^{i..} + e^{-i..}) / 2
  table->at(0, {-1, 0}) = 0.5;
  FieldSpec spec = make_fourier(2, table);
  CHECK(eval_field(spec, make_vec({0.25, 0.0}))[0] ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval_field(spec, make_vec({0.0, 0.7}))[0] ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Jacobian entry (1,1): derivative of cos, 0 at x1=0 and -2pi at x1=0.25.
  CHECK(eval_jacobian_matrix(spec, make_vec({0.0, 0.0}))(0, 0) ==
        doctest::Approx(0.0).epsilon(1e-12));
  CHECK(eval_jacobian_matrix(spec, make_vec({0.25, 0.0}))(0, 0) ==
        doctest::Approx(-two_pi).epsilon(1e-12));
}

TEST_CASE("stepanoff jacobian matches finite differences at (0.5,0.5)") {
  FieldSpec spec = make_stepanoff(2, 0.75, make_vec({1.0, std::sqrt(2.0)}));
  Vec x = make_vec({0.5, 0.5});
  CHECK((eval_jacobian_matrix(spec, x) - fd_jacobian(spec, x)).cwiseAbs()
            .maxCoeff() < 1e-8);
}

TEST_CASE("divergence closed forms") {
  FieldSpec shear = make_shear(2, 2.0, 1.0);
  FieldSpec constant = make_constant(make_vec({1.0, std::sqrt(2.0)}));
  for (const Vec& x : random_points(20, 2)) {
    CHECK(std::abs(eval_divergence(shear, x)) == 0.0);
    CHECK(std::abs(eval_divergence(constant, x)) == 0.0);
  }
  // Stepanoff: div b = xi . grad rho_S, against finite differences.
  FieldSpec st = make_stepanoff(2, 0.75, make_vec({1.0, std::sqrt(2.0)}));
  Vec x = make_vec({0.3, 0.7});
  double h = 1e-6;
  double fd = 0;
  for (int a = 0; a < 2; ++a) {
    Vec xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    fd += (eval_field(st, xp)[a] - eval_field(st, xm)[a]) / (2 * h);
  }
  CHECK(std::abs(eval_divergence(st, x) - fd) < 1e-8);
}

TEST_CASE("periodicity over the catalog") {
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> ki(-2, 2);
  for (const FieldSpec& spec : catalog_2d()) {
    auto pts = random_points(100, 2);
    for (const Vec& x : pts) {
      Vec k = make_vec({double(ki(rng)), double(ki(rng))});
      CHECK((eval_field(spec, Vec(x + k)) - eval_field(spec, x)).norm() <
            1e-12);
    }
  }
}

TEST_CASE("analytic vs finite-difference jacobian over the catalog") {
  for (const FieldSpec& spec : catalog_2d()) {
    double worst = 0;
    for (const Vec& x : random_points(100, 2, 99)) {
      worst = std::max(worst, (eval_jacobian_matrix(spec, x) -
                               fd_jacobian(spec, x)).cwiseAbs().maxCoeff());
    }
    INFO(spec.name);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("divergence equals trace of jacobian") {
  for (const FieldSpec& spec : catalog_2d())
    for (const Vec& x : random_points(25, 2, 5))
      CHECK(std::abs(eval_divergence(spec, x) -
                     eval_jacobian_matrix(spec, x).trace()) < 1e-12);
}

TEST_CASE("stepanoff speed profile vanishes exactly on the lattice") {
  ScalarField rho = stepanoff_rho(2, 0.75);
  CHECK(std::abs(rho.value(make_vec({0.0, 0.0}))) < 1e-12);
  for (const Vec& x : random_points(1000, 2, 31)) {
    if (x.norm() < 1e-6) continue;
    CHECK(rho.value(x) > 0.0);
  }
}

TEST_CASE("parameter validation") {
  Vec xi = make_vec({1.0, std::sqrt(2.0)});
  CHECK_THROWS_AS(make_stepanoff(2, 0.5, xi), ConfigError);   // beta0 edge
  CHECK_THROWS_AS(make_stepanoff(2, 1.0, xi), ConfigError);
  CHECK_THROWS_AS(make_stepanoff(2, 0.75, make_vec({1.0, 0.5})), ConfigError);
  CHECK(coordinates_incommensurable(xi));
  CHECK_FALSE(coordinates_incommensurable(make_vec({2.0, 3.0})));
  // rho-rot-grad needs the periodic amplitude below min |xi_i|.
  CHECK_THROWS_AS(make_rho_rot_grad(xi, 1.5, true), ConfigError);
}

TEST_CASE("divergence-free-by-construction flags") {
  Vec xi = make_vec({1.0, std::sqrt(2.0)});
  CHECK(make_constant(xi).divergence_free_by_construction());
  CHECK(make_shear(2, 2.0, 1.0).divergence_free_by_construction());
  CHECK(make_rho_rot_grad(xi, 0.1, true).divergence_free_by_construction());
  CHECK_FALSE(make_stepanoff(2, 0.75, xi).divergence_free_by_construction());
  CHECK_FALSE(make_gradient(2, 1.0).divergence_free_by_construction());
  CHECK_FALSE(
      make_rho_rot_grad(xi, 0.1, false).divergence_free_by_construction());
}

TEST_CASE("fourier projection of a band-limited field is exact") {
  FieldSpec shear = make_shear(2, 2.0, 1.0);
  FourierTable t = fourier_from_field(shear, 2, 16);
  CHECK(t.conjugate_symmetric());
  FieldSpec back = make_fourier(2, std::make_shared<FourierTable>(t));
  for (const Vec& x : random_points(30, 2, 8))
    CHECK((eval_field(back, x) - eval_field(shear, x)).norm() < 1e-12);
}

TEST_CASE("fourier CSV round trip") {
  auto table = std::make_shared<FourierTable>(2, 1, 2);
  table->at(0, {1, 0}) = std::complex<double>(0.25, -0.125);
  table->at(0, {-1, 0}) = std::complex<double>(0.25, 0.125);
  table->at(1, {0, 1}) = std::complex<double>(0.0, 0.5);
  table->at(1, {0, -1}) = std::complex<double>(0.0, -0.5);
  std::string path = "fourier_roundtrip_test.csv";
  {
    std::ofstream out(path);
    out << "1,0,0,0.25,-0.125\n0,1,1,0,0.5\n";
  }
  FourierTable loaded = load_fourier_csv(path, 2, 2);
  std::remove(path.c_str());
  CHECK(loaded.conjugate_symmetric());
  for (const Vec& x : random_points(10, 2, 77)) {
    CHECK(std::abs(loaded.eval(0, x) - table->eval(0, x)) < 1e-14);
    CHECK(std::abs(loaded.eval(1, x) - table->eval(1, x)) < 1e-14);
  }
}
