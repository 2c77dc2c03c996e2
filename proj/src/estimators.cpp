#include "dtl/estimators.hpp"

#include <cmath>
#include <stdexcept>

#include "dtl/gauss.hpp"

namespace dtl {

namespace {

// Pooled (grand) mean expressed through the sufficient statistics; the
// single evaluation path shared by every operation that returns it, so the
// improvement identities hold bitwise.
double pooled_from_stats(const TrialDesign& design,
                         const SufficientStatistics& stats) {
  const double n1 = design.n1;
  const double n2 = design.n2;
  return ((n1 + n2) * stats.t1 + n1 * stats.t2) / (2.0 * n1 + n2);
}

// Improvement transform on a precomputed shift value.
double improve_from_stats(double psi_value, const TrialDesign& design,
                          const SufficientStatistics& stats) {
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double c = n1 / (2.0 * n1 + n2) * (stats.t2 - stats.t1);
  const bool improved =
      (psi_value < c && c <= 0.0) || (0.0 <= c && c < psi_value);
  if (improved) {
    return pooled_from_stats(design, stats);
  }
  return stats.t1 + psi_value;
}

double sigma1_of(const TrialDesign& design) {
  const double n1 = design.n1;
  const double n2 = design.n2;
  return design.sigma * std::sqrt(n2 / (n1 * (n1 + n2)));
}

}  // namespace

std::string_view to_string(EstimatorId id) {
  switch (id) {
    case EstimatorId::MLE:
      return "mle";
    case EstimatorId::UMVCUE:
      return "umvcue";
    case EstimatorId::UMVCUE_IMPROVED:
      return "umvcue_improved";
    case EstimatorId::SINGLE_STAGE:
      return "single_stage";
    case EstimatorId::SINGLE_STAGE_IMPROVED:
      return "single_stage_improved";
    case EstimatorId::SINGLE_STAGE_RB:
      return "single_stage_rb";
    case EstimatorId::DELTA1:
      return "delta1";
  }
  throw std::invalid_argument("to_string: unknown estimator tag");
}

EstimatorId estimator_from_string(std::string_view name) {
  for (EstimatorId id : kAllEstimators) {
    if (to_string(id) == name) {
      return id;
    }
  }
  throw std::invalid_argument("unknown estimator name: " + std::string(name));
}

double mle(const SufficientStatistics& stats) { return stats.t1; }

double psi_bg(const TrialDesign& design, double d1, double d2) {
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double k = std::sqrt(n1 / (n2 * (n1 + n2)));
  const double q = k * (n2 * d2 - (n1 + n2) * d1) / design.sigma;
  return -design.sigma * k * inverse_mills(q);
}

double psi_zero(const TrialDesign& design, double d1, double d2) {
  (void)d1;
  const double n1 = design.n1;
  const double n2 = design.n2;
  return -n2 * d2 / (n1 + n2);
}

double umvcue(const TrialDesign& design, const SufficientStatistics& stats) {
  validate(design);
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double k = std::sqrt(n1 / (n2 * (n1 + n2)));
  return stats.t1 - design.sigma * k * inverse_mills(stats.q);
}

double pooled_mean(const TrialDesign& design, const TwoStageObservation& obs) {
  return pooled_from_stats(design, reduce(design, obs));
}

double improve_equivariant(const EquivariantShift& psi,
                           const TrialDesign& design,
                           const TwoStageObservation& obs) {
  const SufficientStatistics stats = reduce(design, obs);
  return improve_from_stats(psi(stats.d1, stats.d2), design, stats);
}

double umvcue_improved(const TrialDesign& design,
                       const TwoStageObservation& obs) {
  const SufficientStatistics stats = reduce(design, obs);
  return improve_from_stats(psi_bg(design, stats.d1, stats.d2), design, stats);
}

double single_stage(const SufficientStatistics& stats) { return stats.xbar_s; }

double single_stage_improved(const TrialDesign& design,
                             const TwoStageObservation& obs) {
  const SufficientStatistics stats = reduce(design, obs);
  return improve_from_stats(psi_zero(design, stats.d1, stats.d2), design,
                            stats);
}

double single_stage_rb(const TrialDesign& design,
                       const SufficientStatistics& stats) {
  validate(design);
  const double sigma1 = sigma1_of(design);
  const double z = (stats.t1 - stats.t2) / sigma1;
  return stats.t1 + sigma1 * inverse_mills(z);
}

double delta1(const TrialDesign& design, const SufficientStatistics& stats) {
  validate(design);
  const double n1 = design.n1;
  const double n2 = design.n2;
  const double bign = 2.0 * n1 + n2;
  if (stats.t1 <= stats.t2) {
    return pooled_from_stats(design, stats);
  }
  const double sigma1 = sigma1_of(design);
  const double z = (stats.t1 - stats.t2) / sigma1;
  const double alpha = n1 / bign;
  const double c = n1 * (stats.t2 - stats.t1) / bign;
  // Average of the improved single-stage estimator over the conditional law
  // of the winner mean (a normal truncated to [t2, inf)). The bracket is a
  // difference of complementary tails so it keeps full relative precision
  // for large z, and the whole correction vanishes as z grows, leaving t1.
  const double phi_z = std_normal_cdf(z);
  const double bracket = std_normal_cdf(-alpha * z) - std_normal_cdf(-z);
  return stats.t1 + c * bracket / phi_z +
         sigma1 * std_normal_pdf(alpha * z) / phi_z;
}

double estimate(EstimatorId id, const TrialDesign& design,
                const TwoStageObservation& obs) {
  switch (id) {
    case EstimatorId::MLE:
      return mle(reduce(design, obs));
    case EstimatorId::UMVCUE:
      return umvcue(design, reduce(design, obs));
    case EstimatorId::UMVCUE_IMPROVED:
      return umvcue_improved(design, obs);
    case EstimatorId::SINGLE_STAGE:
      return single_stage(reduce(design, obs));
    case EstimatorId::SINGLE_STAGE_IMPROVED:
      return single_stage_improved(design, obs);
    case EstimatorId::SINGLE_STAGE_RB:
      return single_stage_rb(design, reduce(design, obs));
    case EstimatorId::DELTA1:
      return delta1(design, reduce(design, obs));
  }
  throw std::invalid_argument("estimate: unknown estimator tag");
}

}  // namespace dtl
