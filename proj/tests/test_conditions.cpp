#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "torusflow/conditions.hpp"

#include <cmath>

using namespace torusflow;
using namespace torusflow::testing;

namespace {

const Vec kXi = make_vec({1.0, std::sqrt(2.0)});

RectificationMap identity_map() { return RectificationMap{2, nullptr}; }

/// b(y) = (xi1 / (1 + a sin(2 pi y1)), xi2) is rectified exactly by
/// Psi(y) = (y1 + (a / 2 pi)(1 - cos(2 pi y1)), y2).
FieldSpec rectifiable_field(double a) {
  FieldSpec spec;
  spec.dim = 2;
  spec.name = "rectifiable";
  Vec xi = kXi;
  spec.params = CustomField{
      [xi, a](const Vec& y) {
        return make_vec({xi[0] / (1.0 + a * std::sin(two_pi * y[0])), xi[1]});
      },
      [xi, a](const Vec& y) {
        Mat j = Mat::Zero(2, 2);
        double den = 1.0 + a * std::sin(two_pi * y[0]);
        j(0, 0) = -xi[0] * a * two_pi * std::cos(two_pi * y[0]) / (den * den);
        return j;
      }};
  return spec;
}

RectificationMap rectifying_map(double a) {
  auto table = std::make_shared<FourierTable>(2, 1, 2);
  table->at(0, {0, 0}) = a / two_pi;
  table->at(0, {1, 0}) = -a / (2.0 * two_pi);
  table->at(0, {-1, 0}) = -a / (2.0 * two_pi);
  return RectificationMap{2, table};
}

ConditionsOptions fast_options() {
  ConditionsOptions opt;
  opt.cfg.t_max = 2000.0;
  return opt;
}

}  // namespace

TEST_CASE("verdict labels") {
  CHECK(to_string(Verdict::holds) == "holds");
  CHECK(to_string(Verdict::fails) == "fails");
  CHECK(to_string(Verdict::not_evaluated) == "not-evaluated");
}

TEST_CASE("rectification residual examples") {
  auto sample = random_points(50, 2, 13);
  // Constant field with the identity: exact.
  CHECK(verify_rectification(make_constant(kXi), identity_map(), kXi,
                             sample) < 1e-14);
  // Stepanoff with the identity: far from rectified.
  CHECK(verify_rectification(make_stepanoff(2, 0.75, kXi), identity_map(),
                             kXi, sample) > 0.1);
  // Constructed pair: exact up to roundoff.
  CHECK(verify_rectification(rectifiable_field(0.5), rectifying_map(0.5), kXi,
                             sample) < 1e-8);
}

TEST_CASE("degenerate candidate maps are rejected") {
  // a = 1 makes det grad Psi = 1 + sin(2 pi y1) vanish at y1 = 3/4.
  std::vector<Vec> sample = {make_vec({0.75, 0.3})};
  CHECK_THROWS_AS(verify_rectification(rectifiable_field(1.0),
                                       rectifying_map(1.0), kXi, sample),
                  ConfigError);
  CHECK_THROWS_AS(verify_rectification(make_constant(kXi), identity_map(),
                                       kXi, {}),
                  ConfigError);
  CHECK_THROWS_AS(verify_rectification(make_constant(kXi),
                                       RectificationMap{3, nullptr}, kXi,
                                       sample),
                  ConfigError);
}

TEST_CASE("evaluate_conditions rejects psi without xi") {
  ConditionsOptions opt = fast_options();
  opt.psi = identity_map();
  CHECK_THROWS_AS(evaluate_conditions(make_constant(kXi), opt), ConfigError);
}

TEST_CASE("conditions table for the constant field") {
  ConditionsOptions opt = fast_options();
  opt.psi = identity_map();
  opt.rect_xi = kXi;
  ConditionsReport rep = evaluate_conditions(make_constant(kXi), opt);
  CHECK(rep.rec == Verdict::holds);
  CHECK(rep.rect_residual < 1e-12);
  CHECK(rep.erg == Verdict::not_evaluated);
  CHECK(rep.asy_ae == Verdict::holds);
  CHECK(rep.asy_e == Verdict::holds);
  CHECK(rep.cb_one == Verdict::holds);
  CHECK(rep.db_one == Verdict::holds);
  CHECK(rep.density_count >= 1);
  CHECK(rep.hom == Verdict::holds);
  CHECK((rep.ensemble_center - kXi).norm() < 1e-8);
  CHECK(rep.consistent());
}

TEST_CASE("conditions table for the gradient field") {
  ConditionsOptions opt = fast_options();
  ConditionsReport rep = evaluate_conditions(make_gradient(2, 1.0), opt);
  CHECK(rep.rec == Verdict::not_evaluated);
  CHECK(rep.asy_ae == Verdict::holds);
  CHECK(rep.asy_e == Verdict::holds);
  CHECK(rep.cb_one == Verdict::holds);
  // No nonnegative invariant density at the cutoff: D_b is empty.
  CHECK(rep.density_count == 0);
  CHECK(rep.db_one == Verdict::fails);
  // Not divergence free: the homogenization column stays out.
  CHECK(rep.hom == Verdict::not_evaluated);
  CHECK(rep.consistent());
}

TEST_CASE("conditions table for the shear field") {
  ConditionsOptions opt = fast_options();
  TransportScenario sc = default_hom_scenario(make_shear(2, 2.0, 1.0));
  sc.epsilon_grid = {1.0 / 4, 1.0 / 8, 1.0 / 16};
  opt.transport = sc;
  ConditionsReport rep = evaluate_conditions(make_shear(2, 2.0, 1.0), opt);
  CHECK(rep.asy_ae == Verdict::fails);
  CHECK(rep.asy_e == Verdict::fails);
  CHECK(rep.cb_one == Verdict::fails);
  CHECK(rep.db_one == Verdict::fails);
  CHECK(rep.density_count >= 2);
  CHECK(rep.hom == Verdict::fails);
  CHECK(rep.hom_verdict == "non-convergent");
  CHECK(rep.consistent());
}

TEST_CASE("default scenario dimensions and validation") {
  TransportScenario sc = default_hom_scenario(make_constant(kXi));
  CHECK_NOTHROW(sc.validate());
  CHECK(sc.epsilon_grid.size() == 5);
  FieldSpec c3 = make_constant(make_vec({1.0, std::sqrt(2.0), std::sqrt(3.0)}));
  TransportScenario sc3 = default_hom_scenario(c3);
  CHECK(sc3.epsilon_grid.size() == 3);
  CHECK_NOTHROW(sc3.validate());
}
