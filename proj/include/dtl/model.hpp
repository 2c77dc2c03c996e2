#pragma once

// Data model of the two-stage drop-the-losers design with two Gaussian arms
// and known common standard deviation: designs, parameter points,
// observations, the stage-1 selection rule, and the sufficient-statistic
// reduction every estimator consumes.

#include "dtl/rng.hpp"

namespace dtl {

// Fixed experiment configuration: n1 subjects per arm in stage 1, n2 more
// subjects on the selected arm in stage 2, known sampling SD sigma.
struct TrialDesign {
  int n1 = 1;
  int n2 = 1;
  double sigma = 1.0;
};

// Throws std::invalid_argument unless n1 >= 1, n2 >= 1, sigma > 0 and finite.
void validate(const TrialDesign& design);

// True arm means. theta1/theta2 are the sorted means; theta their gap.
struct ParameterPoint {
  double mu1 = 0.0;
  double mu2 = 0.0;

  double theta1() const { return mu1 < mu2 ? mu1 : mu2; }
  double theta2() const { return mu1 < mu2 ? mu2 : mu1; }
  double theta() const { return theta2() - theta1(); }
};

// Raw summary data of one trial: stage-1 arm means, the selected index, and
// the stage-2 mean of the selected arm.
struct TwoStageObservation {
  double xbar1 = 0.0;
  double xbar2 = 0.0;
  int selected = 1;  // 1 or 2; must equal select_arm(xbar1, xbar2)
  double ybar = 0.0;
};

// Derived statistics used by every estimator. With S the selected arm:
//   xbar_s     = stage-1 mean of the selected arm (the larger one)
//   xbar_loser = stage-1 mean of the dropped arm
//   d1         = xbar_loser - xbar_s  (<= 0 by construction)
//   d2         = ybar - xbar_s
//   t1         = (n1*xbar_s + n2*ybar)/(n1+n2)   (pooled selected-arm mean)
//   t2         = xbar_loser
//   q          = sqrt(n1/(n2*(n1+n2))) * (n2*d2 - (n1+n2)*d1) / sigma
//   w          = n1/(n1+n2)
struct SufficientStatistics {
  double xbar_s = 0.0;
  double xbar_loser = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  double q = 0.0;
  double w = 0.0;
};

// Stage-1 selection rule: the arm with the larger sample mean continues;
// ties go to arm 1.
int select_arm(double xbar1, double xbar2);

// Computes the sufficient statistics. Throws std::invalid_argument if
// obs.selected is not in {1,2} or disagrees with select_arm on the means.
SufficientStatistics reduce(const TrialDesign& design,
                            const TwoStageObservation& obs);

// Draws one observation at the given truth: xbar_i ~ N(mu_i, sigma^2/n1)
// independent, selection by select_arm, ybar ~ N(mu_S, sigma^2/n2). Pure
// function of (design, truth, stream); draw positions 0,1 are the stage-1
// arms and position 2 the stage-2 mean.
TwoStageObservation sample_observation(const TrialDesign& design,
                                       const ParameterPoint& truth,
                                       const StreamKey& stream);

}  // namespace dtl
