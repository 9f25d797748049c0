#pragma once

#include "torusflow/fields.hpp"
#include "torusflow/types.hpp"

#include <string>
#include <vector>

namespace torusflow {

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 1.0;
  double min_step = 1e-12;
  double t_max = 1e4;
  /// Below this field magnitude the controller switches to capped fixed
  /// steps and flags the trajectory near-stationary.
  double stationary_speed_threshold = 1e-9;

  void validate() const;
};

/// Raised on step-size underflow or nonfinite state; carries the last good
/// time and position so callers can report where integration died.
struct FlowError : std::runtime_error {
  FlowError(const std::string& msg, double t, Vec x)
      : std::runtime_error(msg), t_last(t), x_last(std::move(x)) {}
  double t_last;
  Vec x_last;
};

/// Lifted trajectory in R^d. Positions are never reduced mod 1; the field is
/// evaluated at the reduced point inside the stepper. log_jacobian carries
/// the accumulated divergence integral, so exp(log_jacobian) is the Jacobian
/// determinant of the flow map at that time.
struct FlowTrajectory {
  std::vector<double> times;
  std::vector<Vec> positions;
  std::vector<IVec> winding;
  std::vector<double> log_jacobian;
  long accepted_steps = 0;
  long rejected_steps = 0;
  double tolerance_used = 0.0;
  bool near_stationary = false;

  const Vec& final_position() const { return positions.back(); }
  double final_log_jacobian() const { return log_jacobian.back(); }
};

/// Endpoint-only variant of integrate (no per-step recording).
struct FlowPoint {
  Vec x;
  double log_jacobian = 0.0;
  bool near_stationary = false;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

/// Integrates dX/dt = b(X) from x0 over [0, t_end] (t_end may be negative),
/// recording every accepted step. Embedded Runge-Kutta 5(4) with adaptive
/// steps; the augmented scalar state integrates div b along the path.
FlowTrajectory integrate(const FieldSpec& spec, const Vec& x0, double t_end,
                         const IntegratorConfig& cfg);

/// As integrate, but records exactly at the supplied times (strictly
/// monotone, starting at 0), using fourth-order dense output inside steps.
FlowTrajectory integrate_sampled(const FieldSpec& spec, const Vec& x0,
                                 const std::vector<double>& times,
                                 const IntegratorConfig& cfg);

FlowPoint flow_map(const FieldSpec& spec, const Vec& x0, double t_end,
                   const IntegratorConfig& cfg);

/// det grad_x X(t, x0) = exp(int_0^t div b(X(s, x0)) ds).
double jacobian_determinant(const FieldSpec& spec, const Vec& x0, double t,
                            const IntegratorConfig& cfg);

/// |X(s+t, x0) - X(s, X(t, x0))| via two integration paths.
double check_semigroup(const FieldSpec& spec, const Vec& x0, double s,
                       double t, const IntegratorConfig& cfg);

/// |X(t, x0+k) - X(t, x0) - k|.
double check_equivariance(const FieldSpec& spec, const Vec& x0, const IVec& k,
                          double t, const IntegratorConfig& cfg);

/// Max over accepted steps of |X'(mid) - b(X(mid))| at the dense-output
/// midpoint, scaled by nothing (raw residual). The dense interpolant is one
/// order below the stepper, so expect ~1e3 * step tolerance for smooth
/// fields.
double max_dense_residual(const FieldSpec& spec, const Vec& x0, double t_end,
                          const IntegratorConfig& cfg);

}  // namespace torusflow
