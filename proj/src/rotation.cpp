#include "torusflow/rotation.hpp"

#include <algorithm>
#include <cmath>

namespace torusflow {

std::string to_string(HullClass c) {
  switch (c) {
    case HullClass::singleton: return "singleton";
    case HullClass::segment: return "segment";
    case HullClass::polytope: return "polytope";
    default: return "inconclusive";
  }
}

namespace {

/// Mean of window velocities after dropping the slowest and fastest window
/// (speed measured along the mean direction). Orbits of fields with
/// integrable singular slowdowns accumulate most of their finite-time bias
/// in the few windows containing a close passage by a zero; the symmetric
/// trim removes that heavy tail without biasing smooth cases, where all
/// windows agree anyway.
Vec trimmed_window_mean(const std::vector<Vec>& w, int dim) {
  Vec m = Vec::Zero(dim);
  for (const Vec& v : w) m += v;
  m /= static_cast<double>(w.size());
  if (w.size() < 4) return m;
  std::vector<std::pair<double, std::size_t>> speed;
  for (std::size_t j = 0; j < w.size(); ++j) speed.push_back({w[j].dot(m), j});
  std::sort(speed.begin(), speed.end());
  Vec s = Vec::Zero(dim);
  for (std::size_t j = 1; j + 1 < speed.size(); ++j) s += w[speed[j].second];
  return s / static_cast<double>(speed.size() - 2);
}

}  // namespace

RotationEstimate rotation_vector(const FieldSpec& spec, const Vec& x0,
                                 const IntegratorConfig& cfg, double tol) {
  if (!(tol > 0)) throw ConfigError("rotation_vector: tol must be positive");
  RotationEstimate est;
  est.x0 = x0;
  est.zeta_hat = Vec::Zero(spec.dim);
  if (eval_field(spec, wrap_unit(x0)).norm() <
      cfg.stationary_speed_threshold) {
    est.stationary = true;
    est.converged = true;
    return est;
  }
  constexpr int nw = 8;  // equal windows over [0, t_max]
  std::vector<double> times(nw);
  for (int j = 0; j < nw; ++j) times[j] = cfg.t_max * (j + 1) / nw;
  FlowTrajectory tr = integrate_sampled(spec, x0, times, cfg);
  est.near_stationary = tr.near_stationary;

  std::vector<Vec> w(nw);
  Vec prev = x0;
  for (int j = 0; j < nw; ++j) {
    w[j] = (tr.positions[j] - prev) / (cfg.t_max / nw);
    prev = tr.positions[j];
  }
  est.zeta_hat = trimmed_window_mean(w, spec.dim);
  est.t_used = cfg.t_max;
  // Doubling diagnostic: the same estimator on the first half horizon.
  std::vector<Vec> half(w.begin(), w.begin() + nw / 2);
  est.cauchy_gap = (est.zeta_hat - trimmed_window_mean(half, spec.dim)).norm();
  // The half-horizon estimate is intrinsically noisier than the full one;
  // converged means the doubling moved us by at most a few classification
  // tolerances.
  double eff = std::max(5.0 * tol * est.zeta_hat.norm(), 0.5 * tol);
  est.converged = est.cauchy_gap < eff;
  return est;
}

std::vector<Vec> convex_hull_2d(std::vector<Vec> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec& a, const Vec& b) {
                          return a[0] == b[0] && a[1] == b[1];
                        }),
            pts.end());
  std::size_t n = pts.size();
  if (n < 3) return pts;
  auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  std::vector<Vec> h(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = n - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

namespace {

double point_segment_distance(const Vec& p, const Vec& a, const Vec& b) {
  Vec ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 == 0) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

Vec mean_of(const std::vector<Vec>& pts, int dim) {
  Vec c = Vec::Zero(dim);
  for (const Vec& p : pts) c += p;
  if (!pts.empty()) c /= static_cast<double>(pts.size());
  return c;
}

void fill_hull(RotationSetEstimate& out, const std::vector<Vec>& pts,
               int dim) {
  if (dim == 2) {
    out.hull = convex_hull_2d(pts);
  } else {
    out.hull = pts;
    std::sort(out.hull.begin(), out.hull.end(),
              [](const Vec& a, const Vec& b) {
                for (int i = 0; i < a.size(); ++i)
                  if (a[i] != b[i]) return a[i] < b[i];
                return false;
              });
    out.hull.erase(std::unique(out.hull.begin(), out.hull.end(),
                               [](const Vec& a, const Vec& b) {
                                 return (a - b).norm() == 0;
                               }),
                   out.hull.end());
  }
}

/// Strict geometric classification: singleton by diameter, then a tube test
/// around the diameter-realizing chord, else polytope.
void classify_geometry(RotationSetEstimate& out, const std::vector<Vec>& pts,
                       int dim, double tol) {
  out.center = mean_of(pts, dim);
  if (pts.empty()) {
    out.classification = HullClass::inconclusive;
    return;
  }
  out.abs_tolerance = std::max(tol * out.center.norm(), 0.1 * tol);
  double diam = 0;
  std::size_t ia = 0, ib = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      double d = (pts[i] - pts[j]).norm();
      if (d > diam) {
        diam = d;
        ia = i;
        ib = j;
      }
    }
  fill_hull(out, pts, dim);
  if (diam < out.abs_tolerance) {
    out.classification = HullClass::singleton;
    return;
  }
  double tube = std::max(out.abs_tolerance, tol * diam);
  bool on_segment = true;
  for (const Vec& p : pts)
    if (point_segment_distance(p, pts[ia], pts[ib]) > tube) {
      on_segment = false;
      break;
    }
  if (on_segment) {
    out.classification = HullClass::segment;
    out.seg_a = pts[ia];
    out.seg_b = pts[ib];
  } else {
    out.classification = HullClass::polytope;
  }
}

std::vector<RotationEstimate> run_ensemble(const FieldSpec& spec, int n,
                                           Sampler sampler,
                                           const IntegratorConfig& cfg,
                                           double tol) {
  if (n < 16) throw ConfigError("ensemble_rotation: need n >= 16");
  std::vector<Vec> x0s;
  if (sampler == Sampler::low_discrepancy) {
    x0s = halton_points(n, spec.dim);
  } else {
    int m = static_cast<int>(std::ceil(std::pow(n, 1.0 / spec.dim)));
    x0s = midpoint_grid(m, spec.dim);
    x0s.resize(n);
  }
  std::vector<RotationEstimate> est(n);
  parallel_chunks(static_cast<std::size_t>(n), 0,
                  [&](std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i)
                      est[i] = rotation_vector(spec, x0s[i], cfg, tol);
                  });
  return est;
}

}  // namespace

RotationSetEstimate ensemble_rotation(const FieldSpec& spec, int n,
                                      Sampler sampler,
                                      const IntegratorConfig& cfg,
                                      double tol) {
  RotationSetEstimate out;
  out.tolerance = tol;
  out.points = run_ensemble(spec, n, sampler, cfg, tol);

  // The a.e. verdict: drop stationary/near-stationary trajectories when few
  // and isolated enough to be a measure-zero suspect set.
  long flagged = 0;
  for (const auto& e : out.points)
    if (e.stationary || e.near_stationary) ++flagged;
  bool exclude_flagged =
      flagged > 0 && flagged <= static_cast<long>(std::sqrt((double)n));

  std::vector<Vec> usable;
  long converged = 0;
  for (const auto& e : out.points) {
    if (exclude_flagged && (e.stationary || e.near_stationary)) continue;
    if (!e.converged) continue;
    ++converged;
    usable.push_back(e.zeta_hat);
  }
  if (usable.empty()) {
    out.classification = HullClass::inconclusive;
    out.center = Vec::Zero(spec.dim);
    return out;
  }
  out.center = mean_of(usable, spec.dim);
  out.abs_tolerance = std::max(tol * out.center.norm(), 0.1 * tol);
  long within = 0;
  for (const Vec& z : usable)
    if ((z - out.center).norm() <= out.abs_tolerance) ++within;
  long unconverged_unflagged = 0;
  for (const auto& e : out.points)
    if (!e.converged && !e.stationary && !e.near_stationary)
      ++unconverged_unflagged;
  fill_hull(out, usable, spec.dim);
  if (unconverged_unflagged == 0 &&
      static_cast<double>(within) >= 0.95 * static_cast<double>(usable.size())) {
    out.classification = HullClass::singleton;
  } else {
    classify_geometry(out, usable, spec.dim, tol);
  }
  return out;
}

RotationSetEstimate estimate_C_b(const FieldSpec& spec, int n,
                                 const IntegratorConfig& cfg, double tol) {
  RotationSetEstimate out;
  out.tolerance = tol;
  out.points = run_ensemble(spec, n, Sampler::low_discrepancy, cfg, tol);
  // Dirac measures at declared stationary points contribute b(x*) = 0.
  for (const Vec& xs : spec.stationary_points) {
    RotationEstimate e;
    e.x0 = xs;
    e.zeta_hat = Vec::Zero(spec.dim);
    e.stationary = true;
    e.converged = true;
    out.points.push_back(e);
  }
  std::vector<Vec> pts;
  for (const auto& e : out.points)
    if (e.converged) pts.push_back(e.zeta_hat);
  classify_geometry(out, pts, spec.dim, tol);
  return out;
}

RotationSetEstimate estimate_D_b(const FieldSpec& spec,
                                 const std::vector<InvariantDensity>& densities,
                                 const QuadratureConfig& quad, double tol) {
  RotationSetEstimate out;
  out.tolerance = tol;
  std::vector<Vec> pts;
  for (const InvariantDensity& den : densities) {
    VecMeanResult m = periodic_mean_vec(
        spec.dim,
        [&](const Vec& x) { return Vec(den.value(x) * eval_field(spec, x)); },
        quad, den.singular ? den.singular_points : std::vector<Vec>{});
    if (m.divergent)
      throw ConfigError("estimate_D_b: divergent quadrature for a density");
    RotationEstimate e;
    e.x0 = Vec::Zero(spec.dim);
    e.zeta_hat = m.value;
    e.converged = true;
    out.points.push_back(e);
    pts.push_back(m.value);
  }
  classify_geometry(out, pts, spec.dim, tol);
  return out;
}

}  // namespace torusflow
