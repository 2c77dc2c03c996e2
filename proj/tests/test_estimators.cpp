#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "dtl/estimators.hpp"
#include "dtl/gauss.hpp"
#include "dtl/model.hpp"

using namespace dtl;

namespace {

void check_abs(double actual, double expected, double tol) {
  INFO("actual ", actual, " expected ", expected, " tol ", tol);
  CHECK(std::abs(actual - expected) <= tol);
}

TwoStageObservation make_obs(double x1, double x2, double y) {
  return TwoStageObservation{x1, x2, select_arm(x1, x2), y};
}

}  // namespace

TEST_CASE("estimator names round-trip") {
  for (EstimatorId id : kAllEstimators) {
    CHECK(estimator_from_string(to_string(id)) == id);
  }
  CHECK(to_string(EstimatorId::MLE) == "mle");
  CHECK(to_string(EstimatorId::UMVCUE) == "umvcue");
  CHECK(to_string(EstimatorId::UMVCUE_IMPROVED) == "umvcue_improved");
  CHECK(to_string(EstimatorId::SINGLE_STAGE) == "single_stage");
  CHECK(to_string(EstimatorId::SINGLE_STAGE_IMPROVED) ==
        "single_stage_improved");
  CHECK(to_string(EstimatorId::SINGLE_STAGE_RB) == "single_stage_rb");
  CHECK(to_string(EstimatorId::DELTA1) == "delta1");
  CHECK_THROWS_AS(estimator_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("mle is the pooled selected-arm mean") {
  const TrialDesign design{5, 5, 1.0};
  const SufficientStatistics stats = reduce(design, make_obs(1.0, 0.0, 2.0));
  CHECK(mle(stats) == 1.5);
  // sigma-free: same data, wildly different sigma, same value.
  const TrialDesign other{5, 5, 1000.0};
  CHECK(mle(reduce(other, make_obs(1.0, 0.0, 2.0))) == 1.5);
}

TEST_CASE("umvcue at the fully degenerate point") {
  // n1 = n2 = 1, all observations equal: correction is
  // sigma*sqrt(1/2)*mills(0) = sqrt(1/(2*2*pi)/...) = 0.56418958...
  const TrialDesign design{1, 1, 1.0};
  const SufficientStatistics stats = reduce(design, make_obs(0.0, 0.0, 0.0));
  check_abs(umvcue(design, stats), -0.56418958354775628695, 1e-15);
}

TEST_CASE("umvcue and its Rao-Blackwell sibling on a toy case") {
  const TrialDesign design{5, 5, 1.0};
  const SufficientStatistics stats = reduce(design, make_obs(1.0, 0.0, 2.0));
  check_abs(umvcue(design, stats), 1.4999983590414890867, 1e-13);
  check_abs(single_stage_rb(design, stats), 1.5000016409585109133, 1e-13);
  // With n1 = n2 the two corrections are mirror images around t1.
  check_abs((umvcue(design, stats) - 1.5) +
                (single_stage_rb(design, stats) - 1.5),
            0.0, 1e-15);
}

TEST_CASE("pooled mean is the grand mean of all observations") {
  const TrialDesign design{1, 1, 1.0};
  CHECK(pooled_mean(design, make_obs(3.0, 0.0, 3.0)) == 2.0);
  const TrialDesign growth{40, 26, 1.0};
  const TwoStageObservation obs =
      make_obs(153842.0 / 40.0, 148431.0 / 40.0, 102072.0 / 26.0);
  check_abs(pooled_mean(growth, obs), 3814.5754716981132075, 1e-9);
}

TEST_CASE("single stage returns the winner's stage-1 mean") {
  const TrialDesign design{5, 5, 1.0};
  CHECK(single_stage(reduce(design, make_obs(1.0, 0.0, 2.0))) == 1.0);
  CHECK(single_stage(reduce(design, make_obs(-1.0, 0.5, 2.0))) == 0.5);
}

TEST_CASE("improvement transform: improving, boundary, and forced cases") {
  const TrialDesign design{5, 5, 1.0};

  // Improving case for the unbiased estimator: its Mills correction
  // overshoots below the pooled mean, so the transform pools.
  const TwoStageObservation improving = make_obs(0.2, 0.15, 0.2);
  const SufficientStatistics s1 = reduce(design, improving);
  check_abs(umvcue(design, s1), -0.02136787050897056889, 1e-13);
  CHECK(umvcue_improved(design, improving) == pooled_mean(design, improving));
  check_abs(umvcue_improved(design, improving), 0.18333333333333332, 1e-15);

  // Boundary psi == c: left unimproved by definition.
  const TwoStageObservation boundary = make_obs(1.0, 0.0, 2.0);
  CHECK(single_stage_improved(design, boundary) == 1.0);
  CHECK(single_stage_improved(design, boundary) ==
        single_stage(reduce(design, boundary)));

  // Improving case for the single-stage estimator.
  const TwoStageObservation pooled_case = make_obs(1.0, 0.9, 3.0);
  CHECK(single_stage_improved(design, pooled_case) ==
        pooled_mean(design, pooled_case));
  check_abs(single_stage_improved(design, pooled_case), 1.6333333333333333,
            1e-15);

  // A huge negative shift is always improved away to the pooled mean
  // (c <= 0 here since t2 < t1).
  const double forced = improve_equivariant(
      [](double, double) { return -1e6; }, design, boundary);
  CHECK(forced == pooled_mean(design, boundary));

  // psi == 0 is never improved: t1 + 0 stays.
  const double zero_shift = improve_equivariant(
      [](double, double) { return 0.0; }, design, boundary);
  CHECK(zero_shift == 1.5);
}

TEST_CASE("delta1 against an independent truncated-normal oracle") {
  const struct {
    int n1, n2;
    double sigma, x1, x2, y, expected;
  } cases[] = {
      // t1 > t2 branch
      {5, 5, 1.0, 1.2, 0.2, 0.8, 1.0369308531669760629},
      {5, 5, 1.0, 0.4, 0.2, 0.2, 0.49664090511042647987},
      {10, 15, 2.0, 4.0, 1.5, 4.0, 4.0157881642083194549},
      {10, 5, 0.7, -1.0, -1.2, -1.0, -0.97305051874642222852},
      // t1 == t2: exactly the pooled mean
      {3, 7, 1.3, 2.0, 2.0, 2.0, 2.0},
      // t1 < t2: exactly the pooled mean 25/13
      {3, 7, 1.3, 2.0, 2.0, 13.0 / 7.0, 1.9230769230769230086},
  };
  for (const auto& c : cases) {
    const TrialDesign design{c.n1, c.n2, c.sigma};
    const SufficientStatistics stats =
        reduce(design, make_obs(c.x1, c.x2, c.y));
    check_abs(delta1(design, stats), c.expected, 1e-12);
  }
  // Growth-trial point at the back-solved sigma.
  const TrialDesign growth{40, 26, 1025.8542000097599};
  const SufficientStatistics stats = reduce(
      growth, make_obs(153842.0 / 40.0, 148431.0 / 40.0, 102072.0 / 26.0));
  check_abs(delta1(growth, stats), 3898.4169519184529004, 1e-8);
}

TEST_CASE("delta1 jump at t1 == t2 has the predicted one-sided limits") {
  const TrialDesign design{5, 5, 1.0};
  const double sigma1 = std::sqrt(5.0 / (5.0 * 10.0));  // sigma1 = 1/sqrt(10)
  // Right limit as t1 -> t2+ : t1 + 2*sigma1*phi(0).
  const double eps = 1e-9;
  const SufficientStatistics near_right =
      reduce(design, make_obs(eps, 0.0, eps));
  check_abs(delta1(design, near_right),
            2.0 * sigma1 * 0.39894228040143267794, 1e-6);
  // At exact equality the value is the pooled mean (left limit).
  const SufficientStatistics at_tie = reduce(design, make_obs(0.0, 0.0, 0.0));
  CHECK(delta1(design, at_tie) == 0.0);
}

TEST_CASE("delta1 collapses to the mle far from the boundary") {
  const TrialDesign design{5, 5, 1.0};
  const double sigma1 = 1.0 / std::sqrt(10.0);
  // t1 - t2 = 30 sigma1: every correction term is below double precision.
  const double gap = 30.0 * sigma1;
  const SufficientStatistics stats =
      reduce(design, make_obs(gap, 0.0, gap));
  CHECK(stats.t1 - stats.t2 == doctest::Approx(gap).epsilon(1e-12));
  check_abs(delta1(design, stats), mle(stats), 1e-12);
}

TEST_CASE("growth-trial values at the back-solved sigma") {
  const double sigma_star = 1025.8542000097599;
  const TrialDesign design{40, 26, sigma_star};
  const TwoStageObservation obs =
      make_obs(153842.0 / 40.0, 148431.0 / 40.0, 102072.0 / 26.0);
  const SufficientStatistics stats = reduce(design, obs);

  check_abs(stats.t1, 3877.4848484848485, 1e-9);
  check_abs(umvcue(design, stats), 3860.262, 1e-6);
  // Exact consequence of z == q: the Rao-Blackwell correction is
  // (n2/n1) times the unbiased correction, so rb = t1 + (26/40)*(t1 - bg).
  check_abs(single_stage_rb(design, stats), 3888.6797, 1e-5);
  CHECK(single_stage(stats) == 153842.0 / 40.0);
  // Neither improvement fires at this data point.
  CHECK(umvcue_improved(design, obs) == umvcue(design, stats));
  CHECK(single_stage_improved(design, obs) == single_stage(stats));
  check_abs(pooled_mean(design, obs), 3814.5754716981132, 1e-9);
  check_abs(delta1(design, stats), 3898.4169519184529, 1e-8);
}

TEST_CASE("umvcue sits strictly below and rb strictly above the mle") {
  // The corrections are sigma*k*mills(q) and sigma1*mills(z), both strictly
  // positive for every input. The ordering of the estimates themselves is
  // strict whenever the correction is representable next to t1 (deep in the
  // selection tail it underflows below one ulp and the estimates coincide).
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> ns(1, 25);
  std::uniform_real_distribution<double> sig(0.2, 3.0);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  for (int rep = 0; rep < 2000; ++rep) {
    const TrialDesign design{ns(rng), ns(rng), sig(rng)};
    const TwoStageObservation obs = make_obs(val(rng), val(rng), val(rng));
    const SufficientStatistics stats = reduce(design, obs);
    const double t1 = mle(stats);
    const double k = std::sqrt(static_cast<double>(design.n1) /
                               (static_cast<double>(design.n2) *
                                (design.n1 + design.n2)));
    // inverse_mills itself is floored strictly above zero; the scaled
    // correction can flush to zero when the factor sigma*k < 1 multiplies
    // a subnormal, so only nonnegativity is representable for the product.
    CHECK(inverse_mills(stats.q) > 0.0);
    const double bg_correction = design.sigma * k * inverse_mills(stats.q);
    CHECK(bg_correction >= 0.0);
    CHECK(umvcue(design, stats) <= t1);
    if (bg_correction > 1e-13 * std::max(1.0, std::abs(t1))) {
      CHECK(umvcue(design, stats) < t1);
    }
    const double sigma1 =
        design.sigma * std::sqrt(static_cast<double>(design.n2) /
                                 (static_cast<double>(design.n1) *
                                  (design.n1 + design.n2)));
    CHECK(inverse_mills((stats.t1 - stats.t2) / sigma1) > 0.0);
    const double rb_correction =
        sigma1 * inverse_mills((stats.t1 - stats.t2) / sigma1);
    CHECK(rb_correction >= 0.0);
    CHECK(single_stage_rb(design, stats) >= t1);
    if (rb_correction > 1e-13 * std::max(1.0, std::abs(t1))) {
      CHECK(single_stage_rb(design, stats) > t1);
    }
  }
}

TEST_CASE("rb correction is (n2/n1) times the negated umvcue correction") {
  std::mt19937_64 rng(22);
  std::uniform_int_distribution<int> ns(1, 25);
  std::uniform_real_distribution<double> sig(0.2, 3.0);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const TrialDesign design{ns(rng), ns(rng), sig(rng)};
    const TwoStageObservation obs = make_obs(val(rng), val(rng), val(rng));
    const SufficientStatistics stats = reduce(design, obs);
    const double t1 = stats.t1;
    const double predicted =
        t1 + static_cast<double>(design.n2) / design.n1 *
                 (t1 - umvcue(design, stats));
    const double actual = single_stage_rb(design, stats);
    check_abs(actual, predicted, 1e-9 * std::max(1.0, std::abs(actual)));
  }
}

TEST_CASE("location and permutation equivariance spot fuzz") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> ns(1, 25);
  std::uniform_real_distribution<double> sig(0.2, 3.0);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  for (int rep = 0; rep < 500; ++rep) {
    const TrialDesign design{ns(rng), ns(rng), sig(rng)};
    const double x1 = val(rng);
    const double x2 = val(rng);
    if (x1 == x2) {
      continue;
    }
    const double y = val(rng);
    const double b = shift(rng);
    const TwoStageObservation obs = make_obs(x1, x2, y);
    const TwoStageObservation shifted = make_obs(x1 + b, x2 + b, y + b);
    const TwoStageObservation swapped{x2, x1, 3 - obs.selected, y};
    for (EstimatorId id : kAllEstimators) {
      const double base = estimate(id, design, obs);
      check_abs(estimate(id, design, shifted), base + b, 1e-9);
      CHECK(estimate(id, design, swapped) == base);
    }
  }
}

TEST_CASE("improvement identities hold bitwise") {
  std::mt19937_64 rng(24);
  std::uniform_int_distribution<int> ns(1, 25);
  std::uniform_real_distribution<double> sig(0.2, 3.0);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  for (int rep = 0; rep < 2000; ++rep) {
    const TrialDesign design{ns(rng), ns(rng), sig(rng)};
    const TwoStageObservation obs = make_obs(val(rng), val(rng), val(rng));
    const SufficientStatistics stats = reduce(design, obs);
    CHECK(umvcue_improved(design, obs) ==
          improve_equivariant(
              [&](double d1, double d2) { return psi_bg(design, d1, d2); },
              design, obs));
    CHECK(single_stage_improved(design, obs) ==
          improve_equivariant(
              [&](double d1, double d2) { return psi_zero(design, d1, d2); },
              design, obs));
    const double bg_improved = umvcue_improved(design, obs);
    const double ss_improved = single_stage_improved(design, obs);
    const double pooled = pooled_mean(design, obs);
    // The unimproved branch is t1 + psi(d1,d2). For psi_bg that expression
    // *is* the definition of the base estimator, so equality is bitwise;
    // for psi_zero it equals the winner mean xbar_s only in exact
    // arithmetic (t1 - rho*d2 = xbar_s), so rounding slack is needed there.
    const bool bg_ok =
        bg_improved == pooled || bg_improved == umvcue(design, stats);
    const double ss_base = single_stage(stats);
    const bool ss_ok =
        ss_improved == pooled ||
        std::abs(ss_improved - ss_base) <=
            1e-13 * std::max(1.0, std::abs(ss_base));
    CHECK(bg_ok);
    CHECK(ss_ok);
  }
}

TEST_CASE("all seven estimators are finite at the degenerate origin") {
  const TrialDesign design{1, 1, 1.0};
  const TwoStageObservation obs = make_obs(0.0, 0.0, 0.0);
  for (EstimatorId id : kAllEstimators) {
    const double value = estimate(id, design, obs);
    INFO("estimator ", to_string(id), " value ", value);
    CHECK(std::isfinite(value));
  }
  CHECK(estimate(EstimatorId::MLE, design, obs) == 0.0);
}

TEST_CASE("estimate dispatch matches the direct calls") {
  const TrialDesign design{7, 3, 1.4};
  const TwoStageObservation obs = make_obs(0.8, -0.3, 1.1);
  const SufficientStatistics stats = reduce(design, obs);
  CHECK(estimate(EstimatorId::MLE, design, obs) == mle(stats));
  CHECK(estimate(EstimatorId::UMVCUE, design, obs) == umvcue(design, stats));
  CHECK(estimate(EstimatorId::UMVCUE_IMPROVED, design, obs) ==
        umvcue_improved(design, obs));
  CHECK(estimate(EstimatorId::SINGLE_STAGE, design, obs) ==
        single_stage(stats));
  CHECK(estimate(EstimatorId::SINGLE_STAGE_IMPROVED, design, obs) ==
        single_stage_improved(design, obs));
  CHECK(estimate(EstimatorId::SINGLE_STAGE_RB, design, obs) ==
        single_stage_rb(design, stats));
  CHECK(estimate(EstimatorId::DELTA1, design, obs) == delta1(design, stats));
}

TEST_CASE("psi shift functions match their estimator definitions") {
  const TrialDesign design{5, 5, 1.0};
  const TwoStageObservation obs = make_obs(1.0, 0.0, 2.0);
  const SufficientStatistics stats = reduce(design, obs);
  check_abs(stats.t1 + psi_bg(design, stats.d1, stats.d2),
            umvcue(design, stats), 1e-15);
  CHECK(stats.t1 + psi_zero(design, stats.d1, stats.d2) ==
        single_stage(stats));
}
