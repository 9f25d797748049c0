#pragma once

#include "torusflow/fields.hpp"
#include "torusflow/flow.hpp"

#include <random>
#include <vector>

namespace torusflow::testing {

inline std::vector<Vec> random_points(int n, int dim, unsigned seed = 12345) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<Vec> pts(n);
  for (Vec& p : pts) {
    p.resize(dim);
    for (int i = 0; i < dim; ++i) p[i] = uni(rng);
  }
  return pts;
}

/// Central finite-difference Jacobian of b at x.
inline Mat fd_jacobian(const FieldSpec& spec, const Vec& x, double h = 1e-5) {
  int d = spec.dim;
  Mat j(d, d);
  for (int a = 0; a < d; ++a) {
    Vec xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    Vec diff = (eval_field(spec, wrap_unit(xp)) -
                eval_field(spec, wrap_unit(xm))) /
               (2 * h);
    for (int c = 0; c < d; ++c) j(c, a) = diff[c];
  }
  return j;
}

/// Classic fixed-step RK4 on the lifted flow; reference oracle for the
/// adaptive integrator.
inline Vec rk4_flow(const FieldSpec& spec, const Vec& x0, double t_end,
                    double h) {
  auto f = [&](const Vec& x) { return eval_field(spec, wrap_unit(x)); };
  long n = static_cast<long>(std::ceil(std::abs(t_end) / h));
  double dt = t_end / static_cast<double>(n);
  Vec x = x0;
  for (long i = 0; i < n; ++i) {
    Vec k1 = f(x);
    Vec k2 = f(Vec(x + 0.5 * dt * k1));
    Vec k3 = f(Vec(x + 0.5 * dt * k2));
    Vec k4 = f(Vec(x + dt * k3));
    x += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

/// det of the central-finite-difference flow-derivative matrix.
inline double fd_flow_jacobian_det(const FieldSpec& spec, const Vec& x0,
                                   double t, const IntegratorConfig& cfg,
                                   double h = 1e-5) {
  int d = spec.dim;
  Mat m(d, d);
  for (int a = 0; a < d; ++a) {
    Vec xp = x0, xm = x0;
    xp[a] += h;
    xm[a] -= h;
    Vec diff = (flow_map(spec, xp, t, cfg).x - flow_map(spec, xm, t, cfg).x) /
               (2 * h);
    for (int c = 0; c < d; ++c) m(c, a) = diff[c];
  }
  return m.determinant();
}

/// The 2-d example catalog shared across test suites.
inline std::vector<FieldSpec> catalog_2d() {
  Vec xi = make_vec({1.0, std::sqrt(2.0)});
  return {make_constant(xi),
          make_stepanoff(2, 0.75, xi),
          make_shear(2, 2.0, 1.0),
          make_gradient(2, 1.0),
          make_rho_rot_grad(xi, 0.1, true),
          make_rho_rot_grad(xi, 0.1, false, 0.75)};
}

}  // namespace torusflow::testing
