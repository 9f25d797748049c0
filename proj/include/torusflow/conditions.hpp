#pragma once

#include "torusflow/fields.hpp"
#include "torusflow/invariant.hpp"
#include "torusflow/rotation.hpp"
#include "torusflow/transport.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace torusflow {

enum class Verdict { holds, fails, not_evaluated };

std::string to_string(Verdict v);

/// Candidate rectification diffeomorphism Psi = identity + truncated-Fourier
/// periodic part, with analytic Jacobian.
struct RectificationMap {
  int dim = 2;
  std::shared_ptr<const FourierTable> periodic;  // may be null (identity)

  Vec apply(const Vec& y) const;
  Mat jacobian(const Vec& y) const;
};

/// max over the sample of |grad Psi(y) b(y) - xi|, after checking that the
/// sampled Jacobian determinant stays away from zero.
double verify_rectification(const FieldSpec& spec, const RectificationMap& psi,
                            const Vec& xi, const std::vector<Vec>& sample);

struct ConditionsOptions {
  int ensemble_n = 64;
  Sampler sampler = Sampler::low_discrepancy;
  IntegratorConfig cfg;
  QuadratureConfig quad;
  /// Relative classification tolerance for rotation-set estimates.
  double tol = 1e-2;
  /// Fourier cutoff for the spectral density solver (generic fields).
  int spectral_K = 6;
  double rect_tol = 1e-8;
  /// Supplied rectification candidate; Rec stays not-evaluated without one.
  std::optional<RectificationMap> psi;
  std::optional<Vec> rect_xi;
  /// Transport scenario for the Hom verdict (its field spec is replaced by
  /// the field under test); without one a default bump scenario is used.
  std::optional<TransportScenario> transport;
};

struct ConditionsReport {
  std::string field_name;
  Verdict rec = Verdict::not_evaluated;
  Verdict erg = Verdict::not_evaluated;  // never numerically decided
  Verdict asy_ae = Verdict::not_evaluated;
  Verdict asy_e = Verdict::not_evaluated;
  Verdict cb_one = Verdict::not_evaluated;
  Verdict db_one = Verdict::not_evaluated;
  Verdict hom = Verdict::not_evaluated;

  // Diagnostics backing the verdicts.
  double rect_residual = -1.0;
  HullClass ensemble_class = HullClass::inconclusive;
  HullClass cb_class = HullClass::inconclusive;
  HullClass db_class = HullClass::inconclusive;
  Vec ensemble_center;
  std::size_t density_count = 0;
  std::string hom_verdict;  // raw sweep verdict when evaluated
  std::vector<double> hom_errors;

  /// Violated implication rows, e.g. "Asy-e. holds but Asy-a.e. fails".
  /// Report generation asserts this stays empty for catalog runs.
  std::vector<std::string> implication_violations;
  bool consistent() const { return implication_violations.empty(); }
};

/// Evaluates the seven-conditions table for one field. Erg is always
/// not-evaluated; Rec only with a supplied candidate map; Hom only for
/// divergence-free fields.
ConditionsReport evaluate_conditions(const FieldSpec& spec,
                                     const ConditionsOptions& opt);

/// Invariant densities used for the D_b column: the closed-form density for
/// the catalog fields that have one, otherwise the spectral null space
/// (with signed mixes).
std::vector<InvariantDensity> candidate_densities(const FieldSpec& spec,
                                                  const ConditionsOptions& opt);

/// Default transport scenario (bump datum, two-test battery, f = 0) attached
/// to the given field for the Hom verdict.
TransportScenario default_hom_scenario(const FieldSpec& spec);

}  // namespace torusflow
