#pragma once

#include "torusflow/fields.hpp"
#include "torusflow/flow.hpp"
#include "torusflow/invariant.hpp"
#include "torusflow/types.hpp"

#include <string>
#include <vector>

namespace torusflow {

struct RotationEstimate {
  Vec zeta_hat;
  Vec x0;
  double t_used = 0.0;
  /// |zeta(t) - zeta(t/2)| at the reported horizon.
  double cauchy_gap = 0.0;
  bool converged = false;
  bool stationary = false;
  /// Trajectory spent time in the capped fixed-step regime.
  bool near_stationary = false;
};

enum class HullClass { singleton, segment, polytope, inconclusive };

std::string to_string(HullClass c);

struct RotationSetEstimate {
  std::vector<RotationEstimate> points;
  /// d=2: convex hull vertices in counterclockwise order. d>2: the distinct
  /// estimate values (no exact hull reduction is attempted).
  std::vector<Vec> hull;
  HullClass classification = HullClass::inconclusive;
  double tolerance = 1e-2;
  /// Effective absolute tolerance actually used for classification.
  double abs_tolerance = 0.0;
  /// Mean of the points entering classification.
  Vec center;
  /// Segment endpoints when classification == segment.
  Vec seg_a, seg_b;
};

enum class Sampler { grid, low_discrepancy };

/// zeta(t) = (X(t,x0) - x0)/t at the smallest doubling time where successive
/// doublings differ by less than tol; falls back to the t_max value with
/// converged = false. Points with |b(x0)| below the stationarity threshold
/// are reported stationary with zeta = 0.
RotationEstimate rotation_vector(const FieldSpec& spec, const Vec& x0,
                                 const IntegratorConfig& cfg, double tol);

/// Rotation vectors over n initial points. The a.e. verdict excludes
/// stationary/near-stationary trajectories when they number at most sqrt(n):
/// an isolated exceptional set is invisible to Lebesgue-generic sampling.
/// Classification is singleton iff at least 95% of converged points lie
/// within tolerance of their common mean.
RotationSetEstimate ensemble_rotation(const FieldSpec& spec, int n,
                                      Sampler sampler,
                                      const IntegratorConfig& cfg, double tol);

/// Ensemble hull augmented with b(x*) = 0 for every declared stationary
/// point x* (Dirac measures there are invariant, so 0 enters C_b).
RotationSetEstimate estimate_C_b(const FieldSpec& spec, int n,
                                 const IntegratorConfig& cfg, double tol);

/// {mean of sigma * b : sigma in densities}, hull-classified. An empty
/// density list yields an empty estimate with classification inconclusive
/// ("D_b empty at this cutoff").
RotationSetEstimate estimate_D_b(const FieldSpec& spec,
                                 const std::vector<InvariantDensity>& densities,
                                 const QuadratureConfig& quad, double tol);

/// Monotone-chain convex hull, counterclockwise, for 2-d point sets.
std::vector<Vec> convex_hull_2d(std::vector<Vec> pts);

}  // namespace torusflow
