#include "torusflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace torusflow {

double BumpFunction::operator()(const Vec& x) const {
  double p = amplitude;
  for (int i = 0; i < x.size(); ++i) {
    double u = (x[i] - center[i]) / halfwidth[i];
    if (std::abs(u) >= 1.0) return 0.0;
    double c = std::cos(0.5 * M_PI * u);
    p *= c * c;
  }
  return p;
}

double BumpFunction::l2_norm() const {
  // int_{-1}^{1} cos^4(pi u / 2) du = 3/4 per axis.
  double n2 = amplitude * amplitude;
  for (int i = 0; i < halfwidth.size(); ++i) n2 *= 0.75 * halfwidth[i];
  return std::sqrt(n2);
}

PeriodicFactor constant_factor(double c) {
  return {[c](const Vec&) { return c; }, c, std::abs(c)};
}

PeriodicFactor sine_factor(int dim, const IVec& k, double amp, double c0) {
  if (k.size() != dim) throw ConfigError("sine_factor: mode dimension mismatch");
  return {[k, amp, c0](const Vec& y) {
            double ph = 0;
            for (int i = 0; i < y.size(); ++i)
              ph += static_cast<double>(k[i]) * y[i];
            return c0 + amp * std::sin(two_pi * ph);
          },
          c0, std::abs(c0) + std::abs(amp)};
}

namespace {

double time_coeff_at(const SeparableTerm& term, double t) {
  return term.time_coeff ? term.time_coeff(t) : 1.0;
}

double test_time_at(const TestFunction& phi, double t) {
  return phi.time ? phi.time(t) : 1.0;
}

/// u0(X, Y) = sum_i theta_i(X) v_i(Y) with X lifted and Y a torus point.
double eval_u0(const TransportScenario& sc, const Vec& X, const Vec& Y) {
  double s = 0;
  for (const SeparableTerm& term : sc.u0) s += term.theta(X) * term.v.value(Y);
  return s;
}

double eval_u0_mean(const TransportScenario& sc, const Vec& X) {
  double s = 0;
  for (const SeparableTerm& term : sc.u0) s += term.theta(X) * term.v.mean;
  return s;
}

/// Composite-Simpson weights for n_int (even) intervals of width h.
std::vector<double> simpson_weights(int n_int, double h) {
  std::vector<double> w(n_int + 1, h / 3.0);
  for (int k = 1; k < n_int; ++k) w[k] *= (k % 2 == 1) ? 4.0 : 2.0;
  return w;
}

struct Box {
  Vec lo, hi;
};

Box bump_box(const BumpFunction& b) {
  return {Vec(b.center - b.halfwidth), Vec(b.center + b.halfwidth)};
}

Box box_union(const Box& a, const Box& b) {
  return {a.lo.cwiseMin(b.lo), a.hi.cwiseMax(b.hi)};
}

/// Midpoint-grid geometry over a box with per-axis spacing <= target.
struct SpaceGrid {
  Vec lo;
  Vec h;           // actual spacing per axis
  std::array<long, kMaxDim> n{};  // nodes per axis
  long total = 1;
  double cell = 1.0;  // volume element

  SpaceGrid(const Box& box, double target) {
    int dim = static_cast<int>(box.lo.size());
    lo = box.lo;
    h = Vec(dim);
    for (int i = 0; i < dim; ++i) {
      double side = box.hi[i] - box.lo[i];
      long ni = std::max<long>(1, static_cast<long>(std::ceil(side / target)));
      n[i] = ni;
      h[i] = side / static_cast<double>(ni);
      total *= ni;
      cell *= h[i];
    }
  }

  Vec point(long flat) const {
    Vec x(lo.size());
    for (int i = 0; i < lo.size(); ++i) {
      long ni = n[i];
      x[i] = lo[i] + (static_cast<double>(flat % ni) + 0.5) * h[i];
      flat /= ni;
    }
    return x;
  }
};

void check_horizon(const TransportScenario& sc, double eps, double t) {
  if (t / eps > sc.horizon_cap)
    throw ConfigError("transport: fast horizon t/eps = " +
                      std::to_string(t / eps) + " exceeds cap " +
                      std::to_string(sc.horizon_cap));
}

/// Source integral along one fast trajectory: values g_i[k] =
/// theta_i(eps y_k) v_i(y_k) on the uniform sigma grid, returning the
/// contribution eps * int_0^{sigma_k} a_i(t_k - eps sigma) g_i dsigma for
/// every k by trapezoid.
std::vector<double> source_along(const TransportScenario& sc, double eps,
                                 const std::vector<double>& t_nodes,
                                 const std::vector<Vec>& y) {
  int nt = static_cast<int>(t_nodes.size()) - 1;
  double dsig = (t_nodes[1] - t_nodes[0]) / eps;
  std::vector<double> out(nt + 1, 0.0);
  for (const SeparableTerm& term : sc.f) {
    std::vector<double> g(nt + 1);
    for (int k = 0; k <= nt; ++k)
      g[k] = term.theta(Vec(eps * y[k])) * term.v.value(wrap_unit(y[k]));
    if (!term.time_coeff) {
      double prefix = 0;
      for (int k = 1; k <= nt; ++k) {
        prefix += 0.5 * dsig * (g[k - 1] + g[k]);
        out[k] += eps * prefix;
      }
    } else {
      for (int k = 1; k <= nt; ++k) {
        double acc = 0;
        for (int j = 1; j <= k; ++j) {
          double a0 = term.time_coeff(t_nodes[k] - eps * (j - 1) * dsig);
          double a1 = term.time_coeff(t_nodes[k] - eps * j * dsig);
          acc += 0.5 * dsig * (a0 * g[j - 1] + a1 * g[j]);
        }
        out[k] += eps * acc;
      }
    }
  }
  return out;
}

double homog_source(const TransportScenario& sc, const Vec& zeta, double t,
                    const Vec& x) {
  if (sc.f.empty() || t == 0.0) return 0.0;
  constexpr int n_int = 512;
  double h = t / n_int;
  std::vector<double> w = simpson_weights(n_int, h);
  double acc = 0;
  for (int k = 0; k <= n_int; ++k) {
    double s = k * h;
    Vec z = x + (t - s) * zeta;
    for (const SeparableTerm& term : sc.f)
      acc += w[k] * time_coeff_at(term, s) * term.theta(z) * term.v.mean;
  }
  return acc;
}

/// sup_t |a(t)| over [0, T], sampled.
double coeff_sup(const SeparableTerm& term, double T) {
  if (!term.time_coeff) return 1.0;
  double s = 0;
  for (int k = 0; k <= 100; ++k)
    s = std::max(s, std::abs(term.time_coeff(T * k / 100.0)));
  return s;
}

}  // namespace

void TransportScenario::validate() const {
  if (spec.dim < kMinDim || spec.dim > kMaxDim)
    throw ConfigError("transport: dimension out of range");
  if (u0.empty()) throw ConfigError("transport: empty initial datum");
  if (test_battery.empty()) throw ConfigError("transport: empty test battery");
  if (!(T > 0)) throw ConfigError("transport: horizon T must be positive");
  if (epsilon_grid.empty())
    throw ConfigError("transport: empty epsilon grid");
  for (std::size_t i = 0; i < epsilon_grid.size(); ++i) {
    if (!(epsilon_grid[i] > 0))
      throw ConfigError("transport: epsilon must be positive");
    if (i > 0 && !(epsilon_grid[i] < epsilon_grid[i - 1]))
      throw ConfigError("transport: epsilon grid must be strictly decreasing");
  }
  auto check_bump = [&](const BumpFunction& b, const char* what) {
    if (b.center.size() != spec.dim || b.halfwidth.size() != spec.dim)
      throw ConfigError(std::string("transport: ") + what +
                        " bump dimension mismatch");
    for (int i = 0; i < spec.dim; ++i)
      if (!(b.halfwidth[i] > 0))
        throw ConfigError(std::string("transport: ") + what +
                          " bump needs positive halfwidths");
  };
  for (const SeparableTerm& t : u0) check_bump(t.theta, "initial-datum");
  for (const SeparableTerm& t : f) check_bump(t.theta, "source");
  for (const TestFunction& phi : test_battery) check_bump(phi.space, "test");
  quad.validate();
  cfg.validate();
  // Homogenization needs a divergence-free drift; sample the divergence on a
  // grid dense enough to catch any catalog or Fourier-truncation mistake.
  int m = spec.dim == 2 ? 64 : 16;
  double worst = 0;
  for (const Vec& x : midpoint_grid(m, spec.dim))
    worst = std::max(worst, std::abs(eval_divergence(spec, x)));
  if (worst > 1e-10)
    throw ConfigError("transport: field is not divergence free (max |div b| = " +
                      std::to_string(worst) + ")");
}

double solve_oscillating(const TransportScenario& sc, double eps, double t,
                         const Vec& x) {
  if (!(eps > 0)) throw ConfigError("solve_oscillating: eps must be positive");
  if (t < 0) throw ConfigError("solve_oscillating: t must be nonnegative");
  check_horizon(sc, eps, t);
  Vec y0 = x / eps;
  if (t == 0.0) return eval_u0(sc, x, wrap_unit(y0));
  double tau_end = t / eps;
  if (sc.f.empty()) {
    FlowPoint p = flow_map(sc.spec, y0, tau_end, sc.cfg);
    return eval_u0(sc, Vec(eps * p.x), wrap_unit(p.x));
  }
  // Sample the single characteristic finely enough to resolve the source's
  // dependence on the fast position (O(1) motion per unit of fast time).
  int nt = std::max(2, static_cast<int>(std::ceil(32.0 * tau_end)));
  if (nt % 2 != 0) ++nt;
  std::vector<double> taus(nt);
  for (int k = 1; k <= nt; ++k) taus[k - 1] = tau_end * k / nt;
  FlowTrajectory tr = integrate_sampled(sc.spec, y0, taus, sc.cfg);
  std::vector<Vec> y(nt + 1);
  y[0] = y0;
  for (int k = 1; k <= nt; ++k) y[k] = tr.positions[k - 1];
  std::vector<double> t_nodes(nt + 1);
  for (int k = 0; k <= nt; ++k) t_nodes[k] = t * k / nt;
  std::vector<double> src = source_along(sc, eps, t_nodes, y);
  return eval_u0(sc, Vec(eps * y[nt]), wrap_unit(y[nt])) + src[nt];
}

double solve_homogenized(const TransportScenario& sc, const Vec& zeta,
                         double t, const Vec& x) {
  if (zeta.size() != sc.spec.dim)
    throw ConfigError("solve_homogenized: zeta dimension mismatch");
  Vec z = x + t * zeta;
  return eval_u0_mean(sc, z) + homog_source(sc, zeta, t, x);
}

double weak_error(const TransportScenario& sc, double eps, const Vec& zeta) {
  check_horizon(sc, eps, sc.T);
  int nphi = static_cast<int>(sc.test_battery.size());
  Box box = bump_box(sc.test_battery[0].space);
  for (int j = 1; j < nphi; ++j)
    box = box_union(box, bump_box(sc.test_battery[j].space));
  SpaceGrid grid(box, eps / 8.0);

  int nt = std::max(8, static_cast<int>(std::ceil(8.0 * sc.T / eps)));
  if (nt % 2 != 0) ++nt;
  if (grid.total * static_cast<long>(nt + 1) > sc.node_budget)
    throw ConfigError("weak_error: node budget exceeded (" +
                      std::to_string(grid.total * (nt + 1)) + " > " +
                      std::to_string(sc.node_budget) + ")");
  std::vector<double> t_nodes(nt + 1), taus(nt);
  for (int k = 0; k <= nt; ++k) t_nodes[k] = sc.T * k / nt;
  for (int k = 1; k <= nt; ++k) taus[k - 1] = t_nodes[k] / eps;
  std::vector<double> wt = simpson_weights(nt, sc.T / nt);

  int workers = default_threads();
  std::size_t nchunks =
      std::min<std::size_t>(static_cast<std::size_t>(grid.total),
                            std::max(1, workers) * 4);
  std::vector<std::vector<double>> partial(
      nchunks, std::vector<double>(nphi, 0.0));
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t c = 0; c < nchunks; ++c) {
    std::size_t b = c * grid.total / nchunks;
    std::size_t e = (c + 1) * grid.total / nchunks;
    ranges.push_back({b, e});
  }
  parallel_chunks(nchunks, workers, [&](std::size_t cb, std::size_t ce) {
    for (std::size_t c = cb; c < ce; ++c) {
      std::vector<double>& acc = partial[c];
      for (std::size_t node = ranges[c].first; node < ranges[c].second;
           ++node) {
        Vec x = grid.point(static_cast<long>(node));
        // Skip nodes outside every test bump: they contribute nothing.
        std::vector<double> sp(nphi);
        bool any = false;
        for (int j = 0; j < nphi; ++j) {
          sp[j] = sc.test_battery[j].space(x);
          any = any || sp[j] != 0.0;
        }
        if (!any) continue;
        FlowTrajectory tr = integrate_sampled(sc.spec, Vec(x / eps), taus,
                                              sc.cfg);
        std::vector<Vec> y(nt + 1);
        y[0] = x / eps;
        for (int k = 1; k <= nt; ++k) y[k] = tr.positions[k - 1];
        std::vector<double> src;
        if (!sc.f.empty()) src = source_along(sc, eps, t_nodes, y);
        for (int k = 0; k <= nt; ++k) {
          double ue = eval_u0(sc, Vec(eps * y[k]), wrap_unit(y[k]));
          if (!src.empty()) ue += src[k];
          double uh = solve_homogenized(sc, zeta, t_nodes[k], x);
          double diff = (ue - uh) * wt[k] * grid.cell;
          for (int j = 0; j < nphi; ++j)
            if (sp[j] != 0.0)
              acc[j] += diff * sp[j] * test_time_at(sc.test_battery[j],
                                                    t_nodes[k]);
        }
      }
    }
  });
  double worst = 0;
  for (int j = 0; j < nphi; ++j) {
    double s = 0;
    for (std::size_t c = 0; c < nchunks; ++c) s += partial[c][j];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

namespace {

/// Spot estimates of ||u_eps(0,.)||_{L^2} and ||u_eps(T,.)||_{L^2} sharing
/// one low-discrepancy sample z of the data support: the final-time support
/// is the pullback of the data support under the scaled flow, so the norm is
/// sampled at x(z) = eps X(-T/eps, z/eps) with the (exact) Jacobian weight.
/// Sampling-noise then cancels between the two estimates.
std::pair<double, double> l2_spot_norms(const TransportScenario& sc,
                                        double eps) {
  Box box = bump_box(sc.u0[0].theta);
  for (std::size_t i = 1; i < sc.u0.size(); ++i)
    box = box_union(box, bump_box(sc.u0[i].theta));
  for (const SeparableTerm& term : sc.f)
    box = box_union(box, bump_box(term.theta));
  double volume = 1;
  for (int i = 0; i < sc.spec.dim; ++i) volume *= box.hi[i] - box.lo[i];
  const int n = 4096;
  std::vector<Vec> pts = halton_points(n, sc.spec.dim);
  std::vector<double> v0(n, 0.0), vT(n, 0.0);
  parallel_chunks(n, 0, [&](std::size_t bgn, std::size_t end) {
    for (std::size_t i = bgn; i < end; ++i) {
      Vec z(sc.spec.dim);
      for (int a = 0; a < sc.spec.dim; ++a)
        z[a] = box.lo[a] + pts[i][a] * (box.hi[a] - box.lo[a]);
      double u0v = eval_u0(sc, z, wrap_unit(Vec(z / eps)));
      v0[i] = u0v * u0v;
      FlowPoint p = flow_map(sc.spec, Vec(z / eps), -sc.T / eps, sc.cfg);
      double uT = solve_oscillating(sc, eps, sc.T, Vec(eps * p.x));
      vT[i] = uT * uT * std::exp(p.log_jacobian);
    }
  });
  double s0 = 0, sT = 0;
  for (int i = 0; i < n; ++i) {
    s0 += v0[i];
    sT += vT[i];
  }
  return {std::sqrt(s0 / n * volume), std::sqrt(sT / n * volume)};
}

}  // namespace

SweepReport run_sweep(const TransportScenario& sc) {
  VecMeanResult mb = periodic_mean_vec(
      sc.spec.dim, [&](const Vec& x) { return eval_field(sc.spec, x); },
      sc.quad);
  return run_sweep(sc, mb.value);
}

SweepReport run_sweep(const TransportScenario& sc, const Vec& zeta) {
  sc.validate();
  SweepReport rep;
  rep.zeta_used = zeta;
  double c_f = 0;
  for (const SeparableTerm& term : sc.f)
    c_f += coeff_sup(term, sc.T) * term.theta.l2_norm() * term.v.sup;
  rep.estue_violation = -std::numeric_limits<double>::infinity();
  for (double eps : sc.epsilon_grid) {
    rep.epsilons.push_back(eps);
    rep.weak_errors.push_back(weak_error(sc, eps, zeta));
    auto [n0, nT] = l2_spot_norms(sc, eps);
    rep.l2_initial.push_back(n0);
    rep.l2_final.push_back(nT);
    rep.estue_violation =
        std::max(rep.estue_violation, nT - (n0 + c_f * sc.T));
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < rep.weak_errors.size(); ++i)
    if (!(rep.weak_errors[i] < rep.weak_errors[i - 1])) decreasing = false;
  double first = rep.weak_errors.front(), last = rep.weak_errors.back();
  if (decreasing && last < sc.convergence_factor * first)
    rep.verdict = "converges";
  else if (last > 0.5 * first)
    rep.verdict = "non-convergent";
  else
    rep.verdict = "inconclusive";
  return rep;
}

double oscillatory_pairing(int dim,
                           const std::function<double(double, const Vec&)>& theta,
                           const PeriodicFactor& v, const Vec& lo,
                           const Vec& hi, double eps, long node_budget) {
  if (!(eps > 0)) throw ConfigError("oscillatory_pairing: eps must be positive");
  SpaceGrid grid({lo, hi}, eps / 8.0);
  constexpr int nt = 32;
  if (grid.total * static_cast<long>(nt + 1) > node_budget)
    throw ConfigError("oscillatory_pairing: node budget exceeded");
  std::vector<double> wt = simpson_weights(nt, 1.0 / nt);
  double s = 0;
  for (long i = 0; i < grid.total; ++i) {
    Vec x = grid.point(i);
    double vy = v.value(wrap_unit(Vec(x / eps)));
    for (int k = 0; k <= nt; ++k) {
      double g = theta(static_cast<double>(k) / nt, x) * vy;
      s += wt[k] * grid.cell * g * g;
    }
  }
  return s;
}

double scaled_flow_discrepancy(const FieldSpec& spec, double eps, double t,
                               const Vec& x, const IntegratorConfig& cfg) {
  double inv = 1.0 / eps;
  if (std::abs(inv - std::round(inv)) > 1e-12)
    throw ConfigError(
        "scaled_flow_discrepancy: 1/eps must be an integer so b(./eps) stays "
        "Z^d-periodic");
  FieldSpec scaled;
  scaled.dim = spec.dim;
  scaled.name = spec.name + "-scaled";
  scaled.params = CustomField{
      [spec, eps](const Vec& y) { return eval_field(spec, Vec(y / eps)); },
      [spec, eps](const Vec& y) {
        return Mat(eval_jacobian_matrix(spec, Vec(y / eps)) / eps);
      }};
  IntegratorConfig slow = cfg;
  slow.max_step = std::min(cfg.max_step, eps);
  Vec direct = flow_map(scaled, x, t, slow).x;
  Vec rescaled = eps * flow_map(spec, Vec(x / eps), t / eps, cfg).x;
  return (direct - rescaled).norm();
}

}  // namespace torusflow
