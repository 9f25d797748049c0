// Acceptance battery: one criterion per invocation, selected by argv[1].
// Prints a single PASS/FAIL line per criterion and exits nonzero on failure.

#include "torusflow/conditions.hpp"
#include "torusflow/fields.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/invariant.hpp"
#include "torusflow/rotation.hpp"
#include "torusflow/transport.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace torusflow;

namespace {

const Vec kXi = make_vec({1.0, std::sqrt(2.0)});

struct Checker {
  bool ok = true;
  std::ostringstream detail;

  void require(bool pass, const std::string& what) {
    if (!pass) {
      ok = false;
      detail << "  violated: " << what << "\n";
    }
  }
  void require_lt(double value, double bound, const std::string& what) {
    if (!(value < bound)) {
      ok = false;
      detail << "  violated: " << what << " (" << value << " >= " << bound
             << ")\n";
    }
  }
};

std::vector<FieldSpec> catalog() {
  return {make_constant(kXi),
          make_stepanoff(2, 0.75, kXi),
          make_shear(2, 2.0, 1.0),
          make_gradient(2, 1.0),
          make_rho_rot_grad(kXi, 0.1, true),
          make_rho_rot_grad(kXi, 0.1, false)};
}

// Central-difference determinant of the flow map, the independent oracle for
// the exp-integral Jacobian.
double fd_flow_det(const FieldSpec& spec, const Vec& x0, double t,
                   const IntegratorConfig& cfg) {
  double h = 1e-5;
  Mat j(spec.dim, spec.dim);
  for (int a = 0; a < spec.dim; ++a) {
    Vec xp = x0, xm = x0;
    xp[a] += h;
    xm[a] -= h;
    j.col(a) = (flow_map(spec, xp, t, cfg).x - flow_map(spec, xm, t, cfg).x) /
               (2 * h);
  }
  return j.determinant();
}

// --- Criterion 1: Stepanoff rotation structures ------------------------------

bool criterion1(Checker& c) {
  FieldSpec spec = make_stepanoff(2, 0.75, kXi);
  QuadratureConfig quad;
  IntegratorConfig cfg;  // t_max = 1e4

  // Frozen nested-grid + polar-patch oracle for mean(1/rho_S).
  const double sigma_bar_oracle = 1.9211539927448975;
  Vec zeta = kXi / sigma_bar_oracle;

  RotationSetEstimate ens = ensemble_rotation(spec, 64,
                                              Sampler::low_discrepancy, cfg,
                                              1e-2);
  int within = 0;
  for (const RotationEstimate& e : ens.points)
    if ((e.zeta_hat - zeta).norm() <= 0.02 * zeta.norm()) ++within;
  c.require(within >= 61, "at least 95% of 64 estimates within 2% of zeta (" +
                              std::to_string(within) + "/64)");

  RotationEstimate origin = rotation_vector(spec, make_vec({0.0, 0.0}), cfg,
                                            1e-2);
  c.require(origin.stationary && origin.zeta_hat.norm() == 0.0,
            "origin estimate exactly 0 and flagged stationary");

  RotationSetEstimate cb = estimate_C_b(spec, 64, cfg, 1e-2);
  c.require(cb.classification == HullClass::segment,
            "C_b classified as a segment");
  if (cb.classification == HullClass::segment) {
    Vec a = cb.seg_a, b = cb.seg_b;
    if (a.norm() > b.norm()) std::swap(a, b);
    c.require_lt(a.norm(), 0.03 * zeta.norm(), "segment endpoint near 0");
    c.require_lt((b - zeta).norm(), 0.03 * zeta.norm(),
                 "segment endpoint near zeta");
  }

  // D_b via the closed-form density: sigma_S * b_S = xi / mean(1/rho_S)
  // pointwise, so the quadrature mean reproduces xi/sigma_bar to roundoff
  // when compared against the same quadrature's normalization.
  InvariantDensity den = stepanoff_density(spec, quad);
  ScalarField rho = stepanoff_rho(2, 0.75);
  MeanResult m = periodic_mean(
      2, [&](const Vec& x) { return 1.0 / rho.value(x); }, quad,
      {make_vec({0.0, 0.0})});
  Vec zeta_quad = kXi / m.value;
  RotationSetEstimate db = estimate_D_b(spec, {den}, quad, 1e-2);
  c.require(db.classification == HullClass::singleton, "D_b is a singleton");
  c.require_lt((db.center - zeta_quad).norm(), 1e-10,
               "D_b center within 1e-10 of xi / mean(1/rho)");
  return c.ok;
}

// --- Criterion 2: homogenization, positive case ------------------------------

bool criterion2(Checker& c) {
  FieldSpec spec = make_rho_rot_grad(kXi, 0.1, true);
  TransportScenario sc = default_hom_scenario(spec);
  SweepReport rep = run_sweep(sc);
  c.require(rep.verdict == "converges", "sweep verdict is converges (got " +
                                            rep.verdict + ")");
  c.require_lt(rep.weak_errors.back(), 0.05 * rep.weak_errors.front(),
               "E(1/64) < 0.05 E(1/4)");
  Vec want = make_vec({-std::sqrt(2.0), 1.0});  // mean b = R_perp xi
  c.require_lt((rep.zeta_used - want).norm(), 1e-6,
               "effective velocity equals mean b");
  return c.ok;
}

// --- Criterion 3: homogenization, negative case -------------------------------

bool criterion3(Checker& c) {
  FieldSpec spec = make_shear(2, 2.0, 1.0);
  TransportScenario sc = default_hom_scenario(spec);
  SweepReport rep = run_sweep(sc);
  c.require(rep.verdict == "non-convergent",
            "sweep verdict is non-convergent (got " + rep.verdict + ")");
  c.require(rep.weak_errors.back() > 0.5 * rep.weak_errors.front(),
            "E(eps_min) > 0.5 E(eps_max)");

  IntegratorConfig cfg;
  cfg.t_max = 2000.0;
  RotationSetEstimate ens = ensemble_rotation(spec, 64,
                                              Sampler::low_discrepancy, cfg,
                                              1e-2);
  c.require(ens.classification != HullClass::singleton,
            "ensemble is not a singleton");
  double lo = 1e30, hi = -1e30;
  for (const Vec& v : ens.hull) {
    lo = std::min(lo, v[0]);
    hi = std::max(hi, v[0]);
  }
  c.require(hi - lo >= 1.5, "hull first-coordinate span >= 1.5");
  return c.ok;
}

// --- Criterion 4: Jacobian / Liouville suite ----------------------------------

bool criterion4(Checker& c) {
  IntegratorConfig cfg;
  QuadratureConfig quad;
  std::vector<FieldSpec> fields = catalog();
  c.require(fields.size() >= 6, "catalog has at least 6 fields");

  std::vector<Vec> probes = halton_points(20, 2, 1);
  int count = 0;
  for (const FieldSpec& spec : fields) {
    for (int p = 0; p < 4 && count < 20; ++p, ++count) {
      Vec x0 = probes[count];
      double t = 0.5 + 0.1 * count;
      double jn = jacobian_determinant(spec, x0, t, cfg);
      c.require_lt(std::abs(jn - fd_flow_det(spec, x0, t, cfg)), 1e-5,
                   spec.name + ": Jacobian vs finite-difference oracle");
      if (spec.divergence_free_by_construction())
        c.require_lt(std::abs(jacobian_determinant(spec, x0, 7.0, cfg) - 1.0),
                     1e-8, spec.name + ": unit Jacobian");
    }
  }
  c.require(count == 20, "20 Jacobian probes evaluated");

  // Liouville residuals of validated closed-form densities.
  std::vector<IVec> modes = liouville_modes(2, 4);
  InvariantDensity one =
      density_from_closed_form(2, [](const Vec&) { return 1.0; }, quad);
  c.require_lt(liouville_residual(one, make_constant(kXi), modes, quad), 1e-4,
               "constant field: density 1");
  FieldSpec shear = make_shear(2, 2.0, 1.0);
  c.require_lt(liouville_residual(one, shear, modes, quad), 1e-4,
               "shear field: density 1");
  InvariantDensity shear_sin = density_from_closed_form(
      2, [](const Vec& x) { return 1.0 + std::sin(two_pi * x[1]); }, quad);
  c.require_lt(liouville_residual(shear_sin, shear, modes, quad), 1e-4,
               "shear field: density 1 + sin(2 pi x2)");
  FieldSpec st = make_stepanoff(2, 0.75, kXi);
  InvariantDensity sden = stepanoff_density(st, quad);
  c.require_lt(liouville_residual(sden, st, modes, quad), 1e-4,
               "stepanoff field: ergodic density");
  c.require_lt(liouville_residual(one, make_rho_rot_grad(kXi, 0.1, true),
                                  modes, quad),
               1e-4, "rho-rot-grad (unit): density 1");

  // Density transport identity on bounded-density probes.
  std::vector<Vec> sample = halton_points(10, 2, 3);
  c.require_lt(density_transport_check(one, shear, 2.0, sample, cfg), 1e-4,
               "shear transport identity");
  std::vector<Vec> far;
  for (const Vec& x : halton_points(60, 2, 5)) {
    bool ok = true;
    for (int a = 0; a < 2; ++a)
      if (std::min(x[a], 1.0 - x[a]) < 0.1) ok = false;
    if (ok) far.push_back(x);
  }
  c.require(far.size() >= 5, "enough probes away from the stationary point");
  c.require_lt(density_transport_check(sden, st, 1.0, far, cfg), 1e-4,
               "stepanoff transport identity");
  return c.ok;
}

// --- Criterion 5: spectral solver oracle equivalence ---------------------------

bool criterion5(Checker& c) {
  auto sigma_star = [](const Vec& x) {
    return 1.0 + 0.3 * std::cos(two_pi * x[0]) +
           0.2 * std::sin(two_pi * x[1]);
  };
  Vec xi = kXi;
  auto w = [xi](const Vec& x) {
    return make_vec({xi[0] - 0.2 * std::sin(two_pi * x[1]),
                     xi[1] + 0.3 * std::cos(two_pi * x[0])});
  };
  FieldSpec spec;
  spec.dim = 2;
  spec.name = "w-over-sigma";
  spec.params = CustomField{
      [=](const Vec& x) { return Vec(w(x) / sigma_star(x)); },
      [=](const Vec& x) {
        Mat jw = Mat::Zero(2, 2);
        jw(0, 1) = -0.2 * two_pi * std::cos(two_pi * x[1]);
        jw(1, 0) = -0.3 * two_pi * std::sin(two_pi * x[0]);
        Vec gs = make_vec({-0.3 * two_pi * std::sin(two_pi * x[0]),
                           0.2 * two_pi * std::cos(two_pi * x[1])});
        double s = sigma_star(x);
        return Mat(jw / s - w(x) * (gs / (s * s)).transpose());
      }};
  SpectralResult sr = spectral_invariant_densities(spec, 8);
  c.require(sr.densities.size() >= 1, "null space recovers a density");
  if (!sr.densities.empty()) {
    double worst = 0;
    for (const Vec& x : halton_points(200, 2, 7))
      worst = std::max(worst, std::abs(sr.densities[0].value(x) -
                                       sigma_star(x)) /
                                  sigma_star(x));
    c.require_lt(worst, 1e-6, "recovered density matches sigma* to 1e-6");
  }
  SpectralResult grad = spectral_invariant_densities(make_gradient(2, 1.0), 8);
  c.require(grad.densities.empty(),
            "gradient field has no nonnegative null element at K = 8");
  return c.ok;
}

// --- Criterion 6: structural flow properties -----------------------------------

bool criterion6(Checker& c) {
  IntegratorConfig cfg;  // rel_tol 1e-10
  std::vector<Vec> probes = halton_points(4, 2, 2);
  for (const FieldSpec& spec : catalog()) {
    for (const Vec& x0 : probes) {
      c.require_lt(check_semigroup(spec, x0, 3.1, 2.4, cfg), 1e-6,
                   spec.name + ": semigroup");
      // Short horizon: backward integration of contracting fields amplifies
      // roundoff by exp(lambda t).
      Vec fwd = flow_map(spec, x0, 1.5, cfg).x;
      c.require_lt((flow_map(spec, fwd, -1.5, cfg).x - x0).norm(), 1e-6,
                   spec.name + ": inverse flow");
      c.require_lt(check_equivariance(spec, x0,
                                      (IVec(2) << 2, -1).finished(), 3.0,
                                      cfg),
                   1e-6, spec.name + ": equivariance");
    }
  }
  return c.ok;
}

// --- Criterion 7: conditions report coherence -----------------------------------

bool criterion7(Checker& c) {
  ConditionsOptions opt;
  std::vector<FieldSpec> fields = {make_constant(kXi), make_gradient(2, 1.0),
                                   make_rho_rot_grad(kXi, 0.1, true),
                                   make_shear(2, 2.0, 1.0),
                                   make_stepanoff(2, 0.75, kXi)};
  std::vector<ConditionsReport> reports;
  for (const FieldSpec& spec : fields) {
    ConditionsOptions o = opt;
    if (std::holds_alternative<ConstantField>(spec.params)) {
      o.psi = RectificationMap{2, nullptr};
      o.rect_xi = kXi;
    }
    ConditionsReport rep = evaluate_conditions(spec, o);
    c.require(rep.consistent(), spec.name + ": no implication violations");
    reports.push_back(rep);
  }
  const ConditionsReport& constant = reports[0];
  c.require(constant.rec == Verdict::holds &&
                constant.asy_ae == Verdict::holds &&
                constant.asy_e == Verdict::holds &&
                constant.cb_one == Verdict::holds &&
                constant.db_one == Verdict::holds &&
                constant.hom == Verdict::holds,
            "constant field: all testable conditions hold");
  const ConditionsReport& shear = reports[3];
  c.require(shear.asy_ae == Verdict::fails && shear.db_one == Verdict::fails &&
                shear.hom == Verdict::fails,
            "shear field: Asy-a.e., #D_b=1 and Hom fail");
  const ConditionsReport& st = reports[4];
  c.require(st.asy_ae == Verdict::holds && st.db_one == Verdict::holds,
            "stepanoff field: Asy-a.e. and #D_b=1 hold");
  c.require(st.asy_e == Verdict::fails && st.cb_one == Verdict::fails,
            "stepanoff field: Asy-e. and #C_b=1 fail");
  return c.ok;
}

// --- Criterion 8: admissibility / oscillatory pairing ---------------------------

bool criterion8(Checker& c) {
  Vec lo = Vec::Zero(2), hi = Vec::Ones(2);
  auto one = [](double, const Vec&) { return 1.0; };
  double exact = oscillatory_pairing(2, one, constant_factor(1.0), lo, hi,
                                     1.0 / 4);
  c.require_lt(std::abs(exact - 1.0), 1e-12,
               "constant fast factor: pairing equals the theta mass");
  const double C = 2.0;
  for (double eps : {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    double p = oscillatory_pairing(
        2, one, sine_factor(2, (IVec(2) << 1, 0).finished(), 1.0), lo, hi,
        eps);
    c.require_lt(std::abs(p - 0.5), C * eps,
                 "sin mode pairing within C * eps of 1/2 (eps = " +
                     std::to_string(eps) + ")");
  }
  // Non-uniform theta: theta(t,x) = (1+t) bump(x); limit = mean(v^2) *
  // integral of theta^2.
  BumpFunction bump{make_vec({0.5, 0.5}), make_vec({0.3, 0.3}), 1.0};
  auto theta = [&bump](double t, const Vec& x) { return (1 + t) * bump(x); };
  double mass = bump.l2_norm() * bump.l2_norm() * (7.0 / 3.0);
  for (double eps : {1.0 / 8, 1.0 / 32}) {
    double p = oscillatory_pairing(
        2, theta, sine_factor(2, (IVec(2) << 0, 1).finished(), 1.0, 1.0), lo,
        hi, eps);
    // mean((1 + sin)^2) = 3/2.
    c.require_lt(std::abs(p - 1.5 * mass), 4.0 * eps,
                 "bump-weighted pairing within C * eps of its limit");
  }
  return c.ok;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..8>\n");
    return 2;
  }
  int n = std::atoi(argv[1]);
  static const char* kNames[] = {
      "",
      "stepanoff rotation structures",
      "homogenization positive case",
      "homogenization negative case",
      "jacobian/liouville suite",
      "spectral solver oracle equivalence",
      "structural flow properties",
      "conditions report coherence",
      "oscillatory pairing admissibility"};
  if (n < 1 || n > 8) {
    std::fprintf(stderr, "criterion out of range: %d\n", n);
    return 2;
  }
  Checker c;
  bool ok = false;
  switch (n) {
    case 1: ok = criterion1(c); break;
    case 2: ok = criterion2(c); break;
    case 3: ok = criterion3(c); break;
    case 4: ok = criterion4(c); break;
    case 5: ok = criterion5(c); break;
    case 6: ok = criterion6(c); break;
    case 7: ok = criterion7(c); break;
    case 8: ok = criterion8(c); break;
  }
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", n, kNames[n]);
  if (!ok) std::fputs(c.detail.str().c_str(), stdout);
  return ok ? 0 : 1;
}
