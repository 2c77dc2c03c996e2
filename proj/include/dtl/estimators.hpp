#pragma once

// The seven estimators of the selected treatment mean, plus the generic
// risk-improvement transform for location-permutation equivariant
// estimators (every estimator here has the form t1 + psi(d1, d2)).

#include <array>
#include <functional>
#include <string>
#include <string_view>

#include "dtl/model.hpp"

namespace dtl {

enum class EstimatorId {
  MLE,                     // delta_M : t1
  UMVCUE,                  // delta_BG: conditionally unbiased, Mills-ratio
  UMVCUE_IMPROVED,         // delta_BG^I: improvement transform of UMVCUE
  SINGLE_STAGE,            // delta_0 : stage-1 winner mean xbar_s
  SINGLE_STAGE_IMPROVED,   // delta_0^I: improvement transform of delta_0
  SINGLE_STAGE_RB,         // delta_0^RB: Rao-Blackwellization of delta_0
  DELTA1,                  // delta_1 : Rao-Blackwellization of delta_0^I
};

inline constexpr std::array<EstimatorId, 7> kAllEstimators = {
    EstimatorId::MLE,
    EstimatorId::UMVCUE,
    EstimatorId::UMVCUE_IMPROVED,
    EstimatorId::SINGLE_STAGE,
    EstimatorId::SINGLE_STAGE_IMPROVED,
    EstimatorId::SINGLE_STAGE_RB,
    EstimatorId::DELTA1,
};

// Stable lowercase names used in CSV output and CLI flags.
std::string_view to_string(EstimatorId id);
// Parses a name produced by to_string; throws std::invalid_argument.
EstimatorId estimator_from_string(std::string_view name);

// A location-permutation equivariant estimator is t1 + psi(d1, d2); the
// improvement transform acts on the shift function psi.
using EquivariantShift = std::function<double(double d1, double d2)>;

// Maximum-likelihood estimator: the pooled selected-arm mean t1.
double mle(const SufficientStatistics& stats);

// Conditionally unbiased estimator: t1 - sigma*k*mills(q) with
// k = sqrt(n1/(n2*(n1+n2))).
double umvcue(const TrialDesign& design, const SufficientStatistics& stats);

// Grand mean of all 2*n1 + n2 observations:
// ((n1+n2)*t1 + n1*t2)/(2n1+n2) = (n1*(xbar1+xbar2) + n2*ybar)/(2n1+n2).
double pooled_mean(const TrialDesign& design, const TwoStageObservation& obs);

// Risk-improvement transform: with c = (n1/(2n1+n2))*(t2 - t1), returns the
// pooled mean when psi(d1,d2) < c <= 0 or 0 <= c < psi(d1,d2), otherwise
// t1 + psi(d1,d2). Boundary points psi = c are left unimproved.
double improve_equivariant(const EquivariantShift& psi,
                           const TrialDesign& design,
                           const TwoStageObservation& obs);

// improve_equivariant applied to the UMVCUE shift psi_bg.
double umvcue_improved(const TrialDesign& design,
                       const TwoStageObservation& obs);

// Stage-1-only estimator: the winner's stage-1 mean xbar_s.
double single_stage(const SufficientStatistics& stats);

// improve_equivariant applied to the single-stage shift psi_zero.
double single_stage_improved(const TrialDesign& design,
                             const TwoStageObservation& obs);

// Rao-Blackwellization of single_stage given (t1, t2, S):
// t1 + sigma1*mills(z), z = (t1-t2)/sigma1, sigma1 = sigma*sqrt(n2/(n1*(n1+n2))).
double single_stage_rb(const TrialDesign& design,
                       const SufficientStatistics& stats);

// Rao-Blackwellization of single_stage_improved given (t1, t2, S). For
// t1 <= t2 this is exactly the pooled mean; otherwise a truncated-normal
// average of the pooled mean and the winner mean.
double delta1(const TrialDesign& design, const SufficientStatistics& stats);

// Dispatch by id; reduces obs internally.
double estimate(EstimatorId id, const TrialDesign& design,
                const TwoStageObservation& obs);

// The two named shift functions (exposed for the improvement-identity
// checks and the quadrature oracles).
double psi_bg(const TrialDesign& design, double d1, double d2);
double psi_zero(const TrialDesign& design, double d1, double d2);

}  // namespace dtl
