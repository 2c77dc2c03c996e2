#pragma once

// Closed-form theoretical quantities (densities, conditional expectations,
// the risk-optimal shift psi_theta, Bayes estimator) and deterministic
// quadrature oracles for exact risk, bias, and conditional bias. These are
// the ground truth against which estimators and the Monte Carlo engine are
// validated.

#include <stdexcept>

#include "dtl/estimators.hpp"
#include "dtl/gauss.hpp"
#include "dtl/model.hpp"

namespace dtl {

// Evaluation context at truth mu = (0, theta) (location-permutation
// equivariance makes this lossless). Houses U = T1 - mu_S and
// S1 = Xbar_S - mu_S as the random arguments of the density operations.
struct TheoryContext {
  TrialDesign design;
  double theta = 0.0;
  double sigma_star_sq = 0.0;  // sigma^2/(n1+n2)
  double rho = 0.0;            // n2/(n1+n2)

  TheoryContext(const TrialDesign& design_, double theta_);
};

// Conjugate Gaussian prior scale for the Bayes estimator.
struct BayesPrior {
  double m = 1.0;
};
void validate(const BayesPrior& prior);

// Thrown when doubling the quadrature order moves a result by more than the
// convergence budget (1e-7).
struct quadrature_nonconvergence : std::runtime_error {
  explicit quadrature_nonconvergence(const std::string& what)
      : std::runtime_error(what) {}
};

// Density of U = T1 - mu_S:
// (1/sigma_star)*[Phi(sqrt(n1)(u+theta)/(sigma*sqrt(1+rho))) +
//                 Phi(sqrt(n1)(u-theta)/(sigma*sqrt(1+rho)))]*phi(u/sigma_star).
double density_U(const TheoryContext& ctx, double u);

// E[U^2] = sigma_star^2 exactly, independent of theta.
double second_moment_U(const TheoryContext& ctx);

// Conditional density of S1 = Xbar_S - mu_S given (D1, D2) = (d1, d2): a
// two-component normal mixture with common SD sigma/sqrt(2n1+n2), means
// -(n1*d1 + n2*d2 -+ n1*theta)/(2n1+n2), and logistic weights evaluated in
// log-space. Requires d1 <= 0.
double cond_density_S1(const TheoryContext& ctx, double d1, double d2,
                       double s);

// E[S1 | (D1,D2) = (d1,d2)] in overflow-free tanh form.
double cond_expect_S1(const TheoryContext& ctx, double d1, double d2);

// The shift minimizing the conditional risk at gap theta:
// psi_theta = -cond_expect_S1 - n2*d2/(n1+n2).
double psi_theta(const TheoryContext& ctx, double d1, double d2);

// Range of psi_theta over theta >= 0. The finite endpoint is always
// B = n1*((n1+n2)*d1 - n2*d2)/((n1+n2)*(2n1+n2)); when
// d1 <= n2*d2/(n1+n2) the range is [B, +inf), otherwise (-inf, B].
struct PsiBounds {
  double inf;
  double sup;
};
PsiBounds psi_bounds(const TrialDesign& design, double d1, double d2);

// Bayes estimator under the N(0, m^2) prior on each arm mean:
// (n1*xbar_s + n2*ybar)/((n1+n2) + sigma^2/m^2).
double bayes_estimate(const BayesPrior& prior, const TrialDesign& design,
                      const SufficientStatistics& stats);

// Exact (deterministic-quadrature) risk and bias of an estimator at truth
// mu = (0, theta): mse = E[(delta - mu_S)^2], bias = E[delta - mu_S].
struct RiskResult {
  double mse;
  double bias;
};
RiskResult risk_quadrature(const TrialDesign& design, double theta,
                           EstimatorId id, const QuadratureSpec& spec);

// Exact conditional bias E[delta | S = arm] - mu_arm at truth (mu1, mu2).
// Throws std::domain_error when P(S = arm) <= 1e-12.
double conditional_bias_quadrature(const TrialDesign& design, double mu1,
                                   double mu2, EstimatorId id, int arm,
                                   const QuadratureSpec& spec);

// Conditional risk of the shift value c given (D1,D2) = (d1,d2):
// E[(S1 + n2*d2/(n1+n2) + c)^2 | (d1,d2)]; strictly convex in c with
// minimizer psi_theta(ctx, d1, d2).
double conditional_risk_R1(const TheoryContext& ctx, double d1, double d2,
                           double c);

// P(improvement region of psi_bg is hit) at truth mu = (0, theta); strictly
// positive for every design, which is what makes the improvement transform
// a genuine (risk-strict) improvement.
double improvement_region_probability(const TrialDesign& design, double theta,
                                      const QuadratureSpec& spec);

}  // namespace dtl
