#include "torusflow/invariant.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace torusflow {

namespace {

double periodic_linf(const Vec& x, const Vec& p) {
  double d = 0;
  for (int i = 0; i < x.size(); ++i) {
    double r = std::abs(x[i] - p[i]);
    r -= std::floor(r);
    d = std::max(d, std::min(r, 1.0 - r));
  }
  return d;
}

/// Midpoint sum over [0,1)^d skipping cells whose centers fall inside any
/// patch cube {|x - p|_inf <= R}. Fixed-order parallel reduction.
double outer_mean(int dim, const std::function<double(const Vec&)>& g, int m,
                  const std::vector<Vec>& patches, double R) {
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(m);
  int nt = default_threads();
  std::vector<double> partial(static_cast<std::size_t>(nt) + 1, 0.0);
  std::size_t chunk = (total + nt - 1) / nt;
  parallel_chunks(total, nt, [&](std::size_t b, std::size_t e) {
    double acc = 0;
    Vec x(dim);
    for (std::size_t c = b; c < e; ++c) {
      std::size_t rem = c;
      for (int j = dim - 1; j >= 0; --j) {
        x[j] = (static_cast<double>(rem % m) + 0.5) / m;
        rem /= m;
      }
      bool inside = false;
      for (const Vec& p : patches)
        if (periodic_linf(x, p) < R) {
          inside = true;
          break;
        }
      if (!inside) acc += g(x);
    }
    partial[b / chunk] += acc;
  });
  double sum = std::accumulate(partial.begin(), partial.end(), 0.0);
  return sum / static_cast<double>(total);
}

/// Integral of g (and of |g|) over the dyadic shell cube(Rj) \ cube(Rj/2)
/// around p, midpoint rule with ms cells per axis on cube(Rj).
std::pair<double, double> shell_integral(
    int dim, const std::function<double(const Vec&)>& g, const Vec& p,
    double Rj, int ms) {
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(ms);
  double w = 2.0 * Rj / ms;
  double acc = 0, abs_acc = 0;
  Vec x(dim);
  for (std::size_t c = 0; c < total; ++c) {
    std::size_t rem = c;
    double linf = 0;
    for (int j = dim - 1; j >= 0; --j) {
      double off = -Rj + (static_cast<double>(rem % ms) + 0.5) * w;
      x[j] = p[j] + off;
      linf = std::max(linf, std::abs(off));
      rem /= ms;
    }
    if (linf > Rj / 2) {
      double v = g(wrap_unit(x));
      acc += v;
      abs_acc += std::abs(v);
    }
  }
  double vol = std::pow(w, dim);
  return {acc * vol, abs_acc * vol};
}

struct PatchResult {
  double integral = 0;
  double tail = 0;
  double tail_abs = 0;
  bool divergent = false;
};

PatchResult patch_integral(int dim, const std::function<double(const Vec&)>& g,
                           const Vec& p, double R, int depth, int ms,
                           double trigger) {
  PatchResult out;
  std::vector<double> shells(depth), mass(depth);
  double Rj = R;
  for (int j = 0; j < depth; ++j, Rj /= 2)
    std::tie(shells[j], mass[j]) = shell_integral(dim, g, p, Rj, ms);
  out.integral = std::accumulate(shells.begin(), shells.end(), 0.0);
  // Divergence and tail decisions use the |g| shell masses: for integrable
  // singularities they decay geometrically, while signed masses may cancel
  // erratically for oscillatory integrands.
  double total_mass = std::accumulate(mass.begin(), mass.end(), 0.0);
  double floor_mass = 1e-14 * (total_mass + 1e-300);
  if (mass[depth - 1] < floor_mass) return out;  // integrand dies out at p
  double q = mass[depth - 1] / std::max(mass[depth - 2], 1e-300);
  if (depth >= 3 && mass[depth - 3] > floor_mass)
    q = std::max(q, mass[depth - 2] / mass[depth - 3]);
  if (q >= trigger) {
    out.divergent = true;
    return out;
  }
  out.tail = shells[depth - 1] * q / (1.0 - q);
  out.tail_abs = mass[depth - 1] * q / (1.0 - q);
  return out;
}

}  // namespace

void QuadratureConfig::validate() const {
  if (base_resolution < 8)
    throw ConfigError("QuadratureConfig: base_resolution must be >= 8");
  if (refinement_depth < 2 || refinement_depth > 12)
    throw ConfigError("QuadratureConfig: refinement_depth must be in [2,12]");
  if (shell_resolution < 4 || shell_resolution % 4 != 0)
    throw ConfigError(
        "QuadratureConfig: shell_resolution must be a positive multiple of 4");
  if (!(target_rel_error > 0))
    throw ConfigError("QuadratureConfig: target_rel_error must be positive");
}

MeanResult periodic_mean(int dim, const std::function<double(const Vec&)>& g,
                         const QuadratureConfig& quad,
                         const std::vector<Vec>& singular_points) {
  quad.validate();
  if (dim < 1 || dim > kMaxDim) throw ConfigError("periodic_mean: bad dim");
  int m = quad.base_resolution, ms = quad.shell_resolution;
  MeanResult out;
  if (singular_points.empty()) {
    out.value = outer_mean(dim, g, m, {}, 0.0);
    out.error_estimate = std::abs(out.value - outer_mean(dim, g, m / 2, {}, 0.0));
    return out;
  }
  // Patch half-width: an even multiple of the cell width near 1/16, so the
  // patch boundary aligns with cell boundaries at this and half resolution.
  int kcells = std::max(2, 2 * (m / 32));
  double R = static_cast<double>(kcells) / m;
  double outer = outer_mean(dim, g, m, singular_points, R);
  out.value = outer;
  out.error_estimate =
      std::abs(outer - outer_mean(dim, g, m / 2, singular_points, R));
  for (const Vec& p : singular_points) {
    PatchResult pr = patch_integral(dim, g, p, R, quad.refinement_depth, ms,
                                    quad.trigger_ratio);
    PatchResult pc = patch_integral(dim, g, p, R, quad.refinement_depth,
                                    std::max(4, ms / 2), quad.trigger_ratio);
    out.value += pr.integral + pr.tail;
    // The geometric tail is exact for power-law singularities; budget a
    // tenth of its mass for the deviation of the observed shell ratios.
    out.error_estimate += std::abs((pr.integral + pr.tail) -
                                   (pc.integral + pc.tail)) +
                          0.1 * pr.tail_abs;
    out.divergent = out.divergent || pr.divergent || pc.divergent;
  }
  return out;
}

VecMeanResult periodic_mean_vec(int dim,
                                const std::function<Vec(const Vec&)>& g,
                                const QuadratureConfig& quad,
                                const std::vector<Vec>& singular_points) {
  VecMeanResult out;
  out.value = Vec::Zero(dim);
  for (int i = 0; i < dim; ++i) {
    MeanResult mi = periodic_mean(
        dim, [&](const Vec& x) { return g(x)[i]; }, quad, singular_points);
    out.value[i] = mi.value;
    out.error_estimate = std::max(out.error_estimate, mi.error_estimate);
    out.divergent = out.divergent || mi.divergent;
  }
  return out;
}

// --- Densities ---------------------------------------------------------------

namespace {

int certification_grid(int dim) {
  switch (dim) {
    case 2: return 256;
    case 3: return 64;
    default: return 24;
  }
}

void certify_by_sampling(InvariantDensity& den) {
  int m = certification_grid(den.dim);
  double mn = std::numeric_limits<double>::infinity(), mx = 0;
  for (const Vec& x : midpoint_grid(m, den.dim)) {
    double v = den.value(x);
    mn = std::min(mn, v);
    mx = std::max(mx, std::abs(v));
  }
  den.min_sampled = mn;
  den.sample_count = static_cast<long>(std::pow(m, den.dim));
  den.nonnegative = mn >= -1e-8 * std::max(1.0, mx);
}

}  // namespace

InvariantDensity density_from_closed_form(
    int dim, const std::function<double(const Vec&)>& raw,
    const QuadratureConfig& quad, const std::vector<Vec>& singular_points,
    bool singular) {
  MeanResult m = periodic_mean(dim, raw, quad, singular_points);
  if (m.divergent)
    throw ConfigError("density_from_closed_form: quadrature divergent (not L1?)");
  if (!(m.value > 0))
    throw ConfigError("density_from_closed_form: nonpositive mean");
  InvariantDensity den;
  den.dim = dim;
  double scale = m.value;
  den.value = [raw, scale](const Vec& x) { return raw(x) / scale; };
  den.mean = 1.0;
  den.singular = singular;
  den.singular_points = singular_points;
  certify_by_sampling(den);
  return den;
}

InvariantDensity stepanoff_density(const FieldSpec& spec,
                                   const QuadratureConfig& quad) {
  const auto* p = std::get_if<StepanoffField>(&spec.params);
  if (!p) throw ConfigError("stepanoff_density: field is not stepanoff kind");
  ScalarField rho = stepanoff_rho(spec.dim, p->beta0);
  auto raw = [rho](const Vec& x) {
    double r = rho.value(x);
    return r > 0 ? 1.0 / r : std::numeric_limits<double>::infinity();
  };
  InvariantDensity den = density_from_closed_form(
      spec.dim, raw, quad, spec.density_singular_points, /*singular=*/true);
  den.label = "stepanoff closed form";
  return den;
}

std::vector<IVec> liouville_modes(int dim, int kmax) {
  std::vector<IVec> modes;
  std::vector<int> k(dim, -kmax);
  for (;;) {
    // One representative per {k, -k}: first nonzero coordinate positive.
    int first = 0;
    for (int a = 0; a < dim; ++a)
      if (k[a] != 0) {
        first = k[a];
        break;
      }
    if (first > 0) {
      IVec v(dim);
      for (int a = 0; a < dim; ++a) v[a] = k[a];
      modes.push_back(v);
    }
    int a = dim - 1;
    for (; a >= 0; --a) {
      if (++k[a] <= kmax) break;
      k[a] = -kmax;
    }
    if (a < 0) break;
  }
  return modes;
}

double liouville_residual(const InvariantDensity& sigma, const FieldSpec& spec,
                          const std::vector<IVec>& modes,
                          const QuadratureConfig& quad) {
  if (modes.empty()) throw ConfigError("liouville_residual: empty mode set");
  double bsup = sup_norm_estimate(spec);
  if (bsup == 0) return 0.0;
  const std::vector<Vec>& sing =
      sigma.singular ? sigma.singular_points : std::vector<Vec>{};
  double worst = 0;
  for (const IVec& k : modes) {
    Vec kd(spec.dim);
    double knorm = 0;
    bool zero = true;
    for (int a = 0; a < spec.dim; ++a) {
      kd[a] = static_cast<double>(k[a]);
      knorm += kd[a] * kd[a];
      if (k[a] != 0) zero = false;
    }
    if (zero) throw ConfigError("liouville_residual: k = 0 not allowed");
    knorm = std::sqrt(knorm);
    for (int trig = 0; trig < 2; ++trig) {
      auto integrand = [&](const Vec& x) {
        double phase = two_pi * kd.dot(x);
        // grad of sin(2 pi k.x) resp. cos(2 pi k.x)
        double dpsi = trig == 0 ? std::cos(phase) : -std::sin(phase);
        return eval_field(spec, x).dot(kd) * two_pi * dpsi * sigma.value(x);
      };
      MeanResult m = periodic_mean(spec.dim, integrand, quad, sing);
      if (m.divergent)
        throw ConfigError("liouville_residual: quadrature divergence");
      worst = std::max(worst, std::abs(m.value) / (knorm * bsup));
    }
  }
  return worst;
}

// --- Spectral solver ----------------------------------------------------------

namespace {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

/// Conjugate-reflection (C v)(k) = conj(v(-k)) in the flat mode ordering.
CVec conj_reflect(const CVec& v, const FourierTable& layout) {
  CVec out(v.size());
  for (int f = 0; f < v.size(); ++f) {
    auto k = layout.mode_of(static_cast<std::size_t>(f));
    std::array<int, kMaxDim> mk{};
    for (int a = 0; a < layout.dim(); ++a) mk[a] = -k[a];
    out[static_cast<int>(layout.flat_index(mk))] = std::conj(v[f]);
  }
  return out;
}

/// Real coordinates of a conjugate-symmetric coefficient vector: c(0) and
/// (Re, Im) of each positive representative mode.
Eigen::VectorXd realify(const CVec& v, const FourierTable& layout) {
  Eigen::VectorXd out(v.size());
  int pos = 0;
  for (int f = 0; f < v.size(); ++f) {
    auto k = layout.mode_of(static_cast<std::size_t>(f));
    int first = 0;
    for (int a = 0; a < layout.dim(); ++a)
      if (k[a] != 0) {
        first = k[a];
        break;
      }
    if (first == 0)
      out[pos++] = v[f].real();
    else if (first > 0) {
      out[pos++] = v[f].real();
      out[pos++] = v[f].imag();
    }
  }
  return out;
}

CVec unrealify(const Eigen::VectorXd& r, const FourierTable& layout) {
  CVec out = CVec::Zero(r.size());
  int pos = 0;
  for (int f = 0; f < r.size(); ++f) {
    auto k = layout.mode_of(static_cast<std::size_t>(f));
    std::array<int, kMaxDim> mk{};
    int first = 0;
    for (int a = 0; a < layout.dim(); ++a) {
      mk[a] = -k[a];
      if (first == 0 && k[a] != 0) first = k[a];
    }
    if (first == 0)
      out[f] = cplx(r[pos++], 0);
    else if (first > 0) {
      cplx c(r[pos], r[pos + 1]);
      pos += 2;
      out[f] = c;
      out[static_cast<int>(layout.flat_index(mk))] = std::conj(c);
    }
  }
  return out;
}

InvariantDensity density_from_table(std::shared_ptr<const FourierTable> table) {
  InvariantDensity den;
  den.dim = table->dim();
  den.fourier = table;
  den.value = [table](const Vec& x) { return table->eval(0, x); };
  std::array<int, kMaxDim> zero{};
  den.mean = table->at(0, zero).real();
  certify_by_sampling(den);
  return den;
}

}  // namespace

SpectralResult spectral_invariant_densities(const FieldSpec& spec, int K,
                                            double svd_tol, int band_margin) {
  if (K < 4) throw ConfigError("spectral_invariant_densities: K must be >= 4");
  int kb = 2 * K + band_margin;
  int grid = 1;
  while (grid <= 2 * kb) grid *= 2;  // grid beyond the coefficient box Nyquist
  grid *= 2;
  FourierTable bhat = fourier_from_field(spec, kb, grid);

  FourierTable layout(spec.dim, K, 1);
  int M = layout.modes_per_component();
  CMat A(M, M);
  for (int row = 0; row < M; ++row) {
    auto k = layout.mode_of(static_cast<std::size_t>(row));
    for (int col = 0; col < M; ++col) {
      auto m = layout.mode_of(static_cast<std::size_t>(col));
      cplx acc(0, 0);
      std::array<int, kMaxDim> diff{};
      for (int a = 0; a < spec.dim; ++a) diff[a] = k[a] - m[a];
      for (int a = 0; a < spec.dim; ++a)
        acc += static_cast<double>(k[a]) * bhat.at(a, diff);
      A(row, col) = cplx(0, two_pi) * acc;
    }
  }

  Eigen::BDCSVD<CMat> svd(A, Eigen::ComputeThinV);
  SpectralResult out;
  out.singular_values.assign(svd.singularValues().data(),
                             svd.singularValues().data() + M);
  double smax = out.singular_values.empty() ? 0.0 : out.singular_values[0];
  int r = 0;
  for (double s : out.singular_values)
    if (s < svd_tol * smax) ++r;
  out.null_dimension = r;
  if (r == 0) return out;

  // Realify the null basis: the operator commutes with conjugate reflection,
  // so the null space is spanned by conjugate-symmetric vectors.
  Eigen::MatrixXd R(M, 2 * r);
  for (int i = 0; i < r; ++i) {
    CVec v = svd.matrixV().col(M - 1 - i);
    CVec cv = conj_reflect(v, layout);
    R.col(2 * i) = realify((v + cv) / 2.0, layout);
    R.col(2 * i + 1) = realify((v - cv) / cplx(0, 2), layout);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> rsvd(
      R, Eigen::ComputeThinU | Eigen::ComputeThinV);
  int keep = 0;
  for (int i = 0; i < rsvd.singularValues().size(); ++i)
    if (rsvd.singularValues()[i] > 1e-10 * rsvd.singularValues()[0]) ++keep;
  keep = std::min(keep, r);

  std::array<int, kMaxDim> zero{};
  for (int i = 0; i < keep; ++i) {
    CVec c = unrealify(rsvd.matrixU().col(i), layout);
    double c0 = c[static_cast<int>(layout.flat_index(zero))].real();
    bool normalizable = std::abs(c0) > 1e-6 * c.norm();
    if (normalizable)
      c /= c0;
    else
      c /= c.norm();
    out.max_residual =
        std::max(out.max_residual, (A * c).norm() / std::max(c.norm(), 1e-300));
    auto table = std::make_shared<FourierTable>(spec.dim, K, 1);
    for (int f = 0; f < M; ++f) table->raw()[f] = c[f];
    InvariantDensity den = density_from_table(table);
    if (normalizable && den.nonnegative) {
      out.densities.push_back(std::move(den));
    } else {
      den.label = "signed invariant element";
      out.signed_elements.push_back(std::move(den));
    }
  }
  return out;
}

std::vector<InvariantDensity> augment_with_signed_mixes(
    const std::vector<InvariantDensity>& densities,
    const std::vector<InvariantDensity>& signed_elements) {
  std::vector<InvariantDensity> extra;
  for (const InvariantDensity& base : densities) {
    if (base.singular || !base.fourier) continue;
    for (const InvariantDensity& s : signed_elements) {
      if (!s.fourier || s.fourier->kmax() != base.fourier->kmax()) continue;
      for (double sign : {1.0, -1.0}) {
        // Largest safe t with base + t * sign * s >= 0, from a shared sample.
        double t = std::numeric_limits<double>::infinity();
        int m = certification_grid(base.dim);
        for (const Vec& x : midpoint_grid(m, base.dim)) {
          double sv = sign * s.value(x);
          if (sv < -1e-12) t = std::min(t, base.value(x) / (-sv));
        }
        if (!std::isfinite(t) || t <= 0) continue;
        t *= 0.5;
        auto table = std::make_shared<FourierTable>(base.dim,
                                                    base.fourier->kmax(), 1);
        for (std::size_t f = 0; f < table->raw().size(); ++f)
          table->raw()[f] =
              base.fourier->raw()[f] + sign * t * s.fourier->raw()[f];
        std::array<int, kMaxDim> zero{};
        double mean = table->at(0, zero).real();
        if (!(mean > 1e-8)) continue;
        for (auto& c : table->raw()) c /= mean;
        InvariantDensity den = density_from_table(table);
        den.label = "mixed density";
        if (den.nonnegative) extra.push_back(std::move(den));
      }
    }
  }
  return extra;
}

double density_transport_check(const InvariantDensity& sigma,
                               const FieldSpec& spec, double t,
                               const std::vector<Vec>& sample,
                               const IntegratorConfig& cfg) {
  double worst = 0;
  for (const Vec& y : sample) {
    FlowPoint p = flow_map(spec, y, t, cfg);
    double lhs = sigma.value(wrap_unit(p.x)) * std::exp(p.log_jacobian);
    worst = std::max(worst, std::abs(lhs - sigma.value(wrap_unit(y))));
  }
  return worst;
}

}  // namespace torusflow
