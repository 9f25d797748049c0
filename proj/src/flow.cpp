#include "torusflow/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace torusflow {

namespace {

// Augmented state (position in R^d, accumulated integral of div b).
using AVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim + 1, 1>;

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Shampine's continuous extension (order 4).
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

struct Rhs {
  const FieldSpec& spec;
  int d;

  AVec operator()(const AVec& y) const {
    Vec x = y.head(d);
    Vec b = eval_field(spec, wrap_unit(x));
    AVec f(d + 1);
    f.head(d) = b;
    f[d] = eval_divergence(spec, wrap_unit(x));
    return f;
  }
};

/// One accepted step, with everything needed for dense output.
struct StepRecord {
  double t0, h;
  const AVec& y0;
  const AVec& y1;
  const std::array<AVec, 7>& k;
};

struct DensePoly {
  AVec rc1, rc2, rc3, rc4, rc5;

  explicit DensePoly(const StepRecord& s) {
    AVec dy = s.y1 - s.y0;
    rc1 = s.y0;
    rc2 = dy;
    rc3 = s.h * s.k[0] - dy;
    rc4 = dy - s.h * s.k[6] - rc3;
    rc5 = s.h * (d1 * s.k[0] + d3 * s.k[2] + d4 * s.k[3] + d5 * s.k[4] +
                 d6 * s.k[5] + d7 * s.k[6]);
  }

  AVec value(double th) const {
    return rc1 + th * (rc2 + (1 - th) * (rc3 + th * (rc4 + (1 - th) * rc5)));
  }
  /// dy/dt at theta (already divided by h).
  AVec derivative(double th, double h) const {
    AVec d = rc2 + (1 - 2 * th) * rc3 + th * (2 - 3 * th) * rc4 +
             2 * th * (1 - th) * (1 - 2 * th) * rc5;
    return d / h;
  }
};

double error_norm(const AVec& err, const AVec& y0, const AVec& y1,
                  const IntegratorConfig& cfg) {
  double acc = 0;
  for (int i = 0; i < err.size(); ++i) {
    double sc =
        cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / err.size());
}

double initial_step(const AVec& y0, const AVec& f0,
                    const IntegratorConfig& cfg) {
  double d0 = 0, dd1 = 0;
  for (int i = 0; i < y0.size(); ++i) {
    double sc = cfg.abs_tol + cfg.rel_tol * std::abs(y0[i]);
    d0 += (y0[i] / sc) * (y0[i] / sc);
    dd1 += (f0[i] / sc) * (f0[i] / sc);
  }
  d0 = std::sqrt(d0 / y0.size());
  dd1 = std::sqrt(dd1 / y0.size());
  double h = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
  return std::clamp(h, cfg.min_step, cfg.max_step);
}

/// Core driver. Calls on_step(StepRecord) after every accepted step and
/// returns the endpoint.
template <class OnStep>
FlowPoint drive(const FieldSpec& spec, const Vec& x0, double t_end,
                const IntegratorConfig& cfg, OnStep&& on_step) {
  cfg.validate();
  if (x0.size() != spec.dim) throw ConfigError("integrate: x0 dim mismatch");
  if (std::abs(t_end) > cfg.t_max)
    throw ConfigError("integrate: |t_end| exceeds cfg.t_max");

  int d = spec.dim;
  Rhs rhs{spec, d};
  FlowPoint out;
  AVec y(d + 1);
  y.head(d) = x0;
  y[d] = 0.0;
  if (t_end == 0) {
    out.x = x0;
    return out;
  }
  double dir = t_end > 0 ? 1.0 : -1.0;
  double t = 0;
  std::array<AVec, 7> k;
  k[0] = rhs(y);
  double h = dir * initial_step(y, k[0], cfg);
  bool have_k1 = true;

  while (dir * (t_end - t) > 0) {
    if (!y.allFinite())
      throw FlowError("integrate: nonfinite state (numerical blowup)", t,
                      Vec(y.head(d)));
    if (std::abs(h) > cfg.max_step) h = dir * cfg.max_step;
    bool last = dir * (t + h) >= dir * t_end;
    if (last) h = t_end - t;

    if (!have_k1) {
      k[0] = rhs(y);
      have_k1 = true;
    }
    // Near-stationary regime: the field is too slow for the error controller
    // to make progress judgments; take capped fixed steps instead.
    bool frozen = k[0].head(d).norm() < cfg.stationary_speed_threshold;
    if (frozen) {
      out.near_stationary = true;
      h = dir * cfg.max_step;
      if (dir * (t + h) >= dir * t_end) h = t_end - t;
    }

    k[1] = rhs(y + h * (a21 * k[0]));
    k[2] = rhs(y + h * (a31 * k[0] + a32 * k[1]));
    k[3] = rhs(y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]));
    k[4] = rhs(y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]));
    k[5] = rhs(y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] +
                        a65 * k[4]));
    AVec y1 = y + h * (b1 * k[0] + b3 * k[2] + b4 * k[3] + b5 * k[4] +
                       b6 * k[5]);
    k[6] = rhs(y1);
    AVec err = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] +
                    e6 * k[5] + e7 * k[6]);
    double en = frozen ? 0.0 : error_norm(err, y, y1, cfg);

    if (en <= 1.0) {
      on_step(StepRecord{t, h, y, y1, k});
      t = last && !frozen ? t_end : t + h;
      y = y1;
      k[0] = k[6];  // FSAL
      ++out.accepted_steps;
      if (!frozen) {
        double fac = en == 0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        h *= fac;
      }
    } else {
      ++out.rejected_steps;
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.2, 1.0);
      have_k1 = true;  // k[0] still valid at (t, y)
      if (std::abs(h) < cfg.min_step)
        throw FlowError("integrate: step size underflow (stiff region)", t,
                        Vec(y.head(d)));
    }
  }
  out.x = y.head(d);
  out.log_jacobian = y[d];
  return out;
}

void push_state(FlowTrajectory& tr, double t, const AVec& y, int d) {
  tr.times.push_back(t);
  Vec x = y.head(d);
  tr.positions.push_back(x);
  tr.winding.push_back(winding_of(x));
  tr.log_jacobian.push_back(y[d]);
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0))
    throw ConfigError("IntegratorConfig: tolerances must be positive");
  if (!(min_step > 0) || !(min_step <= max_step))
    throw ConfigError("IntegratorConfig: need 0 < min_step <= max_step");
  if (!(t_max > 0)) throw ConfigError("IntegratorConfig: t_max must be positive");
  if (!(stationary_speed_threshold >= 0))
    throw ConfigError("IntegratorConfig: negative stationarity threshold");
}

FlowTrajectory integrate(const FieldSpec& spec, const Vec& x0, double t_end,
                         const IntegratorConfig& cfg) {
  FlowTrajectory tr;
  tr.tolerance_used = cfg.rel_tol;
  int d = spec.dim;
  {
    AVec y0(d + 1);
    y0.head(d) = x0;
    y0[d] = 0;
    push_state(tr, 0.0, y0, d);
  }
  FlowPoint end = drive(spec, x0, t_end, cfg, [&](const StepRecord& s) {
    push_state(tr, s.t0 + s.h, s.y1, d);
  });
  tr.accepted_steps = end.accepted_steps;
  tr.rejected_steps = end.rejected_steps;
  tr.near_stationary = end.near_stationary;
  if (t_end != 0) {  // snap the endpoint to the exact final time
    tr.times.back() = t_end;
    tr.positions.back() = end.x;
    tr.winding.back() = winding_of(end.x);
    tr.log_jacobian.back() = end.log_jacobian;
  }
  return tr;
}

FlowTrajectory integrate_sampled(const FieldSpec& spec, const Vec& x0,
                                 const std::vector<double>& times,
                                 const IntegratorConfig& cfg) {
  if (times.empty()) throw ConfigError("integrate_sampled: empty time list");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw ConfigError("integrate_sampled: times must be increasing");
  if (times.front() < 0)
    throw ConfigError("integrate_sampled: times must be nonnegative");

  FlowTrajectory tr;
  tr.tolerance_used = cfg.rel_tol;
  int d = spec.dim;
  std::size_t next = 0;
  if (times[0] == 0.0) {
    AVec y0(d + 1);
    y0.head(d) = x0;
    y0[d] = 0;
    push_state(tr, 0.0, y0, d);
    next = 1;
  }
  double t_end = times.back();
  if (t_end == 0.0) return tr;

  FlowPoint end = drive(spec, x0, t_end, cfg, [&](const StepRecord& s) {
    double t1 = s.t0 + s.h;
    if (next >= times.size() || times[next] > t1 + 1e-14) return;
    DensePoly poly(s);
    while (next < times.size() && times[next] <= t1 + 1e-14) {
      double th = std::clamp((times[next] - s.t0) / s.h, 0.0, 1.0);
      push_state(tr, times[next], poly.value(th), d);
      ++next;
    }
  });
  tr.accepted_steps = end.accepted_steps;
  tr.rejected_steps = end.rejected_steps;
  tr.near_stationary = end.near_stationary;
  // The final requested time coincides with the endpoint; use it verbatim.
  AVec yend(d + 1);
  yend.head(d) = end.x;
  yend[d] = end.log_jacobian;
  if (!tr.times.empty() && std::abs(tr.times.back() - t_end) < 1e-14) {
    tr.positions.back() = end.x;
    tr.winding.back() = winding_of(end.x);
    tr.log_jacobian.back() = end.log_jacobian;
  } else {
    push_state(tr, t_end, yend, d);
  }
  return tr;
}

FlowPoint flow_map(const FieldSpec& spec, const Vec& x0, double t_end,
                   const IntegratorConfig& cfg) {
  return drive(spec, x0, t_end, cfg, [](const StepRecord&) {});
}

double jacobian_determinant(const FieldSpec& spec, const Vec& x0, double t,
                            const IntegratorConfig& cfg) {
  return std::exp(flow_map(spec, x0, t, cfg).log_jacobian);
}

double check_semigroup(const FieldSpec& spec, const Vec& x0, double s,
                       double t, const IntegratorConfig& cfg) {
  Vec direct = flow_map(spec, x0, s + t, cfg).x;
  Vec mid = flow_map(spec, x0, t, cfg).x;
  Vec composed = flow_map(spec, mid, s, cfg).x;
  return (direct - composed).norm();
}

double check_equivariance(const FieldSpec& spec, const Vec& x0, const IVec& k,
                          double t, const IntegratorConfig& cfg) {
  Vec shifted = x0;
  for (int i = 0; i < k.size(); ++i) shifted[i] += static_cast<double>(k[i]);
  Vec a = flow_map(spec, shifted, t, cfg).x;
  Vec b = flow_map(spec, x0, t, cfg).x;
  for (int i = 0; i < k.size(); ++i) b[i] += static_cast<double>(k[i]);
  return (a - b).norm();
}

double max_dense_residual(const FieldSpec& spec, const Vec& x0, double t_end,
                          const IntegratorConfig& cfg) {
  int d = spec.dim;
  double worst = 0;
  drive(spec, x0, t_end, cfg, [&](const StepRecord& s) {
    DensePoly poly(s);
    AVec ymid = poly.value(0.5);
    AVec dmid = poly.derivative(0.5, s.h);
    Vec b = eval_field(spec, wrap_unit(Vec(ymid.head(d))));
    worst = std::max(worst, (Vec(dmid.head(d)) - b).norm());
  });
  return worst;
}

}  // namespace torusflow
