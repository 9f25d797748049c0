#pragma once

#include "torusflow/fields.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/invariant.hpp"
#include "torusflow/types.hpp"

#include <functional>
#include <string>
#include <vector>

namespace torusflow {

/// Compactly supported C^1 bump: amplitude * prod_i cos^2(pi u_i / 2) on
/// |u_i| < 1, u_i = (x_i - center_i)/halfwidth_i; zero outside.
struct BumpFunction {
  Vec center;
  Vec halfwidth;
  double amplitude = 1.0;

  double operator()(const Vec& x) const;
  /// Exact L2 norm: amplitude * prod_i sqrt(3 halfwidth_i / 4).
  double l2_norm() const;
};

/// Bounded Z^d-periodic factor with its known mean.
struct PeriodicFactor {
  std::function<double(const Vec&)> value;
  double mean = 0.0;
  double sup = 1.0;  // sup |value|, used for a priori bounds
};

PeriodicFactor constant_factor(double c);
/// c0 + amp * sin(2 pi k . y); mean c0.
PeriodicFactor sine_factor(int dim, const IVec& k, double amp, double c0 = 0.0);

/// One separable term a(t) * theta(x) * v(y). Initial-datum terms ignore a.
struct SeparableTerm {
  BumpFunction theta;
  PeriodicFactor v;
  std::function<double(double)> time_coeff;  // null = identically 1
};

/// phi(t,x) = time(t) * space(x), compact support in space.
struct TestFunction {
  std::function<double(double)> time;  // null = identically 1 on [0,T]
  BumpFunction space;
};

struct TransportScenario {
  FieldSpec spec;
  std::vector<SeparableTerm> u0;
  std::vector<SeparableTerm> f;
  double T = 1.0;
  std::vector<TestFunction> test_battery;
  std::vector<double> epsilon_grid = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32,
                                      1.0 / 64};
  QuadratureConfig quad;
  IntegratorConfig cfg;
  /// Refusal cap on the fast-flow horizon t / eps.
  double horizon_cap = 1e6;
  /// Refusal cap on space-time quadrature nodes per weak-error evaluation.
  long node_budget = 200'000'000;
  /// Verdict threshold: converges iff E decreasing and
  /// E(eps_min) < convergence_factor * E(eps_max).
  double convergence_factor = 0.05;

  void validate() const;
};

struct SweepReport {
  std::vector<double> epsilons;
  std::vector<double> weak_errors;
  std::vector<double> l2_initial;
  std::vector<double> l2_final;
  /// Largest violation of ||u_eps(T)|| <= ||u_eps(0)|| + C_f T across the
  /// sweep (<= 0 means the a priori bound held).
  double estue_violation = 0.0;
  std::string verdict;  // converges | non-convergent | inconclusive
  Vec zeta_used;
};

/// u_eps(t,x) along exact characteristics of the scaled flow
/// X_eps(tau, x) = eps X(tau/eps, x/eps).
double solve_oscillating(const TransportScenario& sc, double eps, double t,
                         const Vec& x);

/// Homogenized solution u(t,x) = mean-u0(x + t zeta) + time integral of the
/// y-averaged source along the constant-velocity characteristic.
double solve_homogenized(const TransportScenario& sc, const Vec& zeta,
                         double t, const Vec& x);

/// E(eps) = max over the battery of |<u_eps - u, phi>| by tensor space-time
/// quadrature with node spacing <= eps/8 per axis.
double weak_error(const TransportScenario& sc, double eps, const Vec& zeta);

/// Full epsilon sweep with verdict; zeta defaults to mean(b) when not given.
SweepReport run_sweep(const TransportScenario& sc);
SweepReport run_sweep(const TransportScenario& sc, const Vec& zeta);

/// int_0^1 int_box g^2(t, x, x/eps) dx dt for separable
/// g(t,x,y) = theta(t,x) v(y), theta supported in [lo, hi].
double oscillatory_pairing(int dim,
                           const std::function<double(double, const Vec&)>& theta,
                           const PeriodicFactor& v, const Vec& lo,
                           const Vec& hi, double eps, long node_budget = 200'000'000);

/// |eps X(t/eps, x/eps) - Y(t)| where Y integrates b(./eps) directly.
double scaled_flow_discrepancy(const FieldSpec& spec, double eps, double t,
                               const Vec& x, const IntegratorConfig& cfg);

}  // namespace torusflow
