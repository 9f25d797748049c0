#pragma once

#include "torusflow/fields.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace torusflow {

struct QuadratureConfig {
  /// Base midpoint-grid resolution per axis (power of two recommended).
  int base_resolution = 256;
  /// Number of dyadic shells around each declared singular point.
  int refinement_depth = 10;
  /// Midpoint resolution per axis inside each shell cube.
  int shell_resolution = 64;
  /// Shell-mass ratio at or above which refinement is declared divergent.
  double trigger_ratio = 0.95;
  double target_rel_error = 1e-6;

  void validate() const;
};

struct MeanResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool divergent = false;
};

struct VecMeanResult {
  Vec value;
  double error_estimate = 0.0;
  bool divergent = false;
};

/// Mean of g over the unit torus. Smooth integrands use a plain midpoint
/// grid; integrands with declared singular points get square patches around
/// each point resolved by dyadic shells with geometric tail extrapolation.
/// The divergent flag signals numerically non-integrable behavior (shell
/// masses not decaying).
MeanResult periodic_mean(int dim, const std::function<double(const Vec&)>& g,
                         const QuadratureConfig& quad,
                         const std::vector<Vec>& singular_points = {});

VecMeanResult periodic_mean_vec(int dim,
                                const std::function<Vec(const Vec&)>& g,
                                const QuadratureConfig& quad,
                                const std::vector<Vec>& singular_points = {});

struct InvariantDensity {
  int dim = 2;
  /// Normalized density (mean 1) as a callable; always present.
  std::function<double(const Vec&)> value;
  /// Fourier representation when the density came from the spectral solver.
  std::shared_ptr<const FourierTable> fourier;
  double mean = 1.0;
  /// Nonnegativity certificate: minimum over the sample and its size.
  double min_sampled = 0.0;
  long sample_count = 0;
  bool nonnegative = false;
  /// Filled by liouville_residual; negative = not yet evaluated.
  double liouville_residual = -1.0;
  /// True when the density is unbounded (e.g. 1/rho_S).
  bool singular = false;
  std::vector<Vec> singular_points;
  std::string label = "density";
};

/// Density from a closed form; normalizes to mean 1 via periodic_mean and
/// certifies nonnegativity by sampling. Throws on divergent quadrature.
InvariantDensity density_from_closed_form(
    int dim, const std::function<double(const Vec&)>& raw,
    const QuadratureConfig& quad, const std::vector<Vec>& singular_points = {},
    bool singular = false);

/// The unique invariant probability density of a Stepanoff field:
/// x -> rho_S(x)^{-1} / mean(rho_S^{-1}). Singular at the field's zeros.
InvariantDensity stepanoff_density(const FieldSpec& spec,
                                   const QuadratureConfig& quad);

/// max over psi in {sin(2 pi k.x), cos(2 pi k.x) : k in modes} of
/// |int b . grad(psi) sigma dx|, normalized by |k| sup|b|.
double liouville_residual(const InvariantDensity& sigma, const FieldSpec& spec,
                          const std::vector<IVec>& modes,
                          const QuadratureConfig& quad);

/// Default test battery: all nonzero modes with |k|_inf <= kmax, one
/// representative per {k, -k} pair.
std::vector<IVec> liouville_modes(int dim, int kmax);

struct SpectralResult {
  /// Null-space elements certified nonnegative and mean-normalized.
  std::vector<InvariantDensity> densities;
  /// Remaining null-space elements (sign-changing or mean ~ 0).
  std::vector<InvariantDensity> signed_elements;
  /// Full singular-value spectrum of the constraint operator (descending),
  /// reported so borderline null modes can be audited.
  std::vector<double> singular_values;
  int null_dimension = 0;
  /// Largest coefficient-space residual ||div(sigma b)|| / ||sigma|| over
  /// the returned elements.
  double max_residual = 0.0;
};

/// Solves div(sigma b) = 0 for truncated-Fourier sigma (modes |k|_inf <= K)
/// by SVD of the convolution operator sigma -> div(sigma b), using Fourier
/// coefficients of b up to |k|_inf <= 2K + band_margin.
SpectralResult spectral_invariant_densities(const FieldSpec& spec, int K,
                                            double svd_tol = 1e-8,
                                            int band_margin = 8);

/// Tries convex mixes density +/- t * signed_element to surface additional
/// certified densities when the null space has dimension > 1.
std::vector<InvariantDensity> augment_with_signed_mixes(
    const std::vector<InvariantDensity>& densities,
    const std::vector<InvariantDensity>& signed_elements);

/// max over sample points y of |sigma(X(t,y)) J(t,y) - sigma(y)|.
double density_transport_check(const InvariantDensity& sigma,
                               const FieldSpec& spec, double t,
                               const std::vector<Vec>& sample,
                               const IntegratorConfig& cfg);

}  // namespace torusflow
