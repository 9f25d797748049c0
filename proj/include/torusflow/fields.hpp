#pragma once

#include "torusflow/types.hpp"

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace torusflow {

/// Dense table of Fourier coefficients over the mode box |k|_inf <= kmax,
/// one table per component. A real-valued field requires conjugate symmetry
/// c(-k) = conj(c(k)), which is checked on construction from data.
class FourierTable {
 public:
  FourierTable() = default;
  FourierTable(int dim, int kmax, int components);

  int dim() const { return dim_; }
  int kmax() const { return kmax_; }
  int components() const { return components_; }
  int modes_per_component() const { return modes_; }

  std::complex<double>& at(int comp, const std::array<int, kMaxDim>& k);
  const std::complex<double>& at(int comp,
                                 const std::array<int, kMaxDim>& k) const;

  /// Flat index over the mode box, iteration order = lexicographic in
  /// (k_1,...,k_d) with each axis running -kmax..kmax.
  std::size_t flat_index(const std::array<int, kMaxDim>& k) const;
  std::array<int, kMaxDim> mode_of(std::size_t flat) const;

  bool conjugate_symmetric(double tol = 1e-10) const;

  /// Sum of the truncated series at a (lifted) point; real part returned.
  double eval(int comp, const Vec& x) const;
  /// Partial derivative d(comp)/d(x_axis).
  double eval_derivative(int comp, int axis, const Vec& x) const;
  /// Samples component comp on the midpoint grid (m per axis), row-major
  /// in the same axis order as midpoint_grid.
  std::vector<double> sample_grid(int comp, int m) const;

  double max_abs_coefficient() const;

  std::vector<std::complex<double>>& raw() { return c_; }
  const std::vector<std::complex<double>>& raw() const { return c_; }

 private:
  int dim_ = 0, kmax_ = 0, components_ = 0;
  int modes_ = 0;  // (2*kmax+1)^dim
  std::vector<std::complex<double>> c_;
};

/// b(x) = xi.
struct ConstantField {
  Vec xi;
};

/// b(x) = rho_S(x) * xi with rho_S(x) = (sum_i sin^2(pi x_i))^beta0.
/// Vanishes exactly on the integer lattice; requires beta0 in (1/2, 1) and
/// xi with incommensurable coordinates.
struct StepanoffField {
  double beta0;
  Vec xi;
};

/// b(x) = (offset + amp * sin(2 pi x_2), 0, ..., 0). Divergence free.
struct ShearField {
  double offset;
  double amp;
};

/// b = grad u with u(x) = amp * cos(2 pi x_1) / (2 pi),
/// i.e. b(x) = (-amp * sin(2 pi x_1), 0, ..., 0).
struct GradientField {
  double amp;
};

/// Two-dimensional b = rho0 * R_perp grad(u) with
/// u(x) = xi . x + (amp / 2 pi)(sin 2 pi x_1 + sin 2 pi x_2) and
/// R_perp(v1, v2) = (-v2, v1). R_perp grad(u) is divergence free; with
/// unit_rho the whole field is. With stepanoff rho0 the invariant density
/// 1/rho0 is explicit.
struct RhoRotGradField {
  Vec xi;
  double amp = 0.0;
  bool unit_rho = true;
  double beta0 = 0.75;  // used when !unit_rho
};

/// Truncated Fourier series, one coefficient table per component.
struct FourierField {
  std::shared_ptr<const FourierTable> table;
};

/// Escape hatch for composite closed forms (used by the test catalog and
/// the rectification examples). Callbacks must be Z^d-periodic.
struct CustomField {
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;
};

using FieldParams = std::variant<ConstantField, StepanoffField, ShearField,
                                 GradientField, RhoRotGradField, FourierField,
                                 CustomField>;

struct FieldSpec {
  int dim = 2;
  FieldParams params;
  std::string name;
  /// Declared zeros of b in [0,1)^d (known analytically for the catalog).
  std::vector<Vec> stationary_points;
  /// Singular points of the associated invariant density, when one exists.
  std::vector<Vec> density_singular_points;

  bool divergence_free_by_construction() const;
};

Vec eval_field(const FieldSpec& spec, const Vec& x);
Mat eval_jacobian_matrix(const FieldSpec& spec, const Vec& x);
double eval_divergence(const FieldSpec& spec, const Vec& x);

/// Sampled sup-norm estimate of |b| over the torus.
double sup_norm_estimate(const FieldSpec& spec, int samples_per_axis = 64);

/// Checks that no integer relation k . xi = 0 holds for 0 < |k|_inf <= bound.
/// A floating-point check, not a proof; catches configuration mistakes like
/// rational ratios with small denominator.
bool coordinates_incommensurable(const Vec& xi, int bound = 64,
                                 double tol = 1e-12);

// --- Scalar fields ---------------------------------------------------------

/// Periodic scalar with optional analytic gradient.
struct ScalarField {
  int dim = 2;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

/// rho_S(x) = (sum_i sin^2(pi x_i))^beta0, the Stepanoff speed profile.
ScalarField stepanoff_rho(int dim, double beta0);

// --- Catalog factories ------------------------------------------------------

FieldSpec make_constant(const Vec& xi);
FieldSpec make_stepanoff(int dim, double beta0, const Vec& xi);
FieldSpec make_shear(int dim, double offset, double amp);
FieldSpec make_gradient(int dim, double amp);
FieldSpec make_rho_rot_grad(const Vec& xi, double amp, bool unit_rho,
                            double beta0 = 0.75);
FieldSpec make_fourier(int dim, std::shared_ptr<const FourierTable> table,
                       std::string name = "fourier");

/// Projects a field onto the truncated Fourier box |k|_inf <= kmax by
/// sampling on a uniform grid (grid_per_axis points per axis) and taking the
/// discrete transform. Exact for fields that are already band-limited below
/// the grid Nyquist.
FourierTable fourier_from_field(const FieldSpec& spec, int kmax,
                                int grid_per_axis);
FourierTable fourier_from_scalar(const std::function<double(const Vec&)>& f,
                                 int dim, int kmax, int grid_per_axis);

/// Fourier table from CSV rows (k_1,...,k_d, component, re, im). Missing
/// conjugate entries are filled in; inconsistent ones are an error.
FourierTable load_fourier_csv(const std::string& path, int dim, int components);

}  // namespace torusflow
