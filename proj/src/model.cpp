#include "dtl/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dtl {

namespace {

void require_finite(double x, const char* who) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(who) + ": non-finite input");
  }
}

}  // namespace

void validate(const TrialDesign& design) {
  if (design.n1 < 1 || design.n2 < 1) {
    throw std::invalid_argument("TrialDesign: n1 and n2 must be >= 1");
  }
  if (!(design.sigma > 0.0) || !std::isfinite(design.sigma)) {
    throw std::invalid_argument("TrialDesign: sigma must be positive finite");
  }
}

int select_arm(double xbar1, double xbar2) {
  require_finite(xbar1, "select_arm");
  require_finite(xbar2, "select_arm");
  return xbar1 >= xbar2 ? 1 : 2;
}

SufficientStatistics reduce(const TrialDesign& design,
                            const TwoStageObservation& obs) {
  validate(design);
  require_finite(obs.xbar1, "reduce");
  require_finite(obs.xbar2, "reduce");
  require_finite(obs.ybar, "reduce");
  if (obs.selected != 1 && obs.selected != 2) {
    throw std::invalid_argument("reduce: selected index must be 1 or 2");
  }
  if (obs.selected != select_arm(obs.xbar1, obs.xbar2)) {
    throw std::invalid_argument(
        "reduce: selected index inconsistent with the stage-1 means");
  }
  const double n1 = design.n1;
  const double n2 = design.n2;
  SufficientStatistics stats;
  stats.xbar_s = obs.selected == 1 ? obs.xbar1 : obs.xbar2;
  stats.xbar_loser = obs.selected == 1 ? obs.xbar2 : obs.xbar1;
  stats.d1 = stats.xbar_loser - stats.xbar_s;
  stats.d2 = obs.ybar - stats.xbar_s;
  stats.t1 = (n1 * stats.xbar_s + n2 * obs.ybar) / (n1 + n2);
  stats.t2 = stats.xbar_loser;
  stats.q = std::sqrt(n1 / (n2 * (n1 + n2))) *
            (n2 * stats.d2 - (n1 + n2) * stats.d1) / design.sigma;
  stats.w = n1 / (n1 + n2);
  return stats;
}

TwoStageObservation sample_observation(const TrialDesign& design,
                                       const ParameterPoint& truth,
                                       const StreamKey& stream) {
  validate(design);
  require_finite(truth.mu1, "sample_observation");
  require_finite(truth.mu2, "sample_observation");
  const double s1 = design.sigma / std::sqrt(static_cast<double>(design.n1));
  const double s2 = design.sigma / std::sqrt(static_cast<double>(design.n2));
  TwoStageObservation obs;
  obs.xbar1 = truth.mu1 + s1 * normal_at(stream, 0);
  obs.xbar2 = truth.mu2 + s1 * normal_at(stream, 1);
  obs.selected = select_arm(obs.xbar1, obs.xbar2);
  const double mu_s = obs.selected == 1 ? truth.mu1 : truth.mu2;
  obs.ybar = mu_s + s2 * normal_at(stream, 2);
  return obs;
}

}  // namespace dtl
