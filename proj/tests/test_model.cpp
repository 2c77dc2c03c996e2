#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "dtl/model.hpp"
#include "dtl/rng.hpp"

using namespace dtl;

namespace {

void check_abs(double actual, double expected, double tol) {
  INFO("actual ", actual, " expected ", expected, " tol ", tol);
  CHECK(std::abs(actual - expected) <= tol);
}

}  // namespace

TEST_CASE("design validation") {
  CHECK_NOTHROW(validate(TrialDesign{1, 1, 0.5}));
  CHECK_THROWS_AS(validate(TrialDesign{0, 5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(TrialDesign{5, 0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(TrialDesign{5, 5, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(validate(TrialDesign{5, 5, -1.0}), std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate(TrialDesign{5, 5, inf}), std::invalid_argument);
}

TEST_CASE("parameter point accessors") {
  const ParameterPoint p{3.0, 1.0};
  CHECK(p.theta1() == 1.0);
  CHECK(p.theta2() == 3.0);
  CHECK(p.theta() == 2.0);
  const ParameterPoint q{-1.0, -1.0};
  CHECK(q.theta() == 0.0);
  const ParameterPoint r{-2.0, 5.0};
  CHECK(r.theta1() == -2.0);
  CHECK(r.theta2() == 5.0);
  CHECK(r.theta() == 7.0);
}

TEST_CASE("selection rule with tie to arm 1") {
  CHECK(select_arm(1.0, 0.0) == 1);
  CHECK(select_arm(0.0, 1.0) == 2);
  CHECK(select_arm(2.5, 2.5) == 1);
  CHECK(select_arm(-3.0, -3.0) == 1);
}

TEST_CASE("reduce on the growth-trial summary data") {
  const TrialDesign design{40, 26, 1000.0};
  const TwoStageObservation obs{3846.05, 3710.775, 1, 3925.846};
  const SufficientStatistics stats = reduce(design, obs);
  CHECK(stats.xbar_s == 3846.05);
  CHECK(stats.xbar_loser == 3710.775);
  check_abs(stats.d1, -135.275, 1e-9);
  check_abs(stats.d2, 79.796, 1e-9);
  check_abs(stats.t1, 3877.4847878787879, 1e-9);
  CHECK(stats.t2 == 3710.775);
  check_abs(stats.w, 40.0 / 66.0, 1e-15);
}

TEST_CASE("reduce on a toy design") {
  const TrialDesign design{5, 5, 1.0};
  const TwoStageObservation obs{1.0, 0.0, 1, 2.0};
  const SufficientStatistics stats = reduce(design, obs);
  CHECK(stats.xbar_s == 1.0);
  CHECK(stats.xbar_loser == 0.0);
  CHECK(stats.d1 == -1.0);
  CHECK(stats.d2 == 1.0);
  CHECK(stats.t1 == 1.5);
  CHECK(stats.t2 == 0.0);
  // q = sqrt(n1/(n2*(n1+n2))) * (n2*d2 - (n1+n2)*d1)/sigma = 15/sqrt(10)
  check_abs(stats.q, 4.743416490252568998, 1e-14);
  CHECK(stats.w == 0.5);
}

TEST_CASE("reduce on an arm-2 selection") {
  const TrialDesign design{5, 5, 1.0};
  const TwoStageObservation obs{0.0, 1.0, 2, 2.0};
  const SufficientStatistics stats = reduce(design, obs);
  CHECK(stats.xbar_s == 1.0);
  CHECK(stats.xbar_loser == 0.0);
  CHECK(stats.d1 == -1.0);
  CHECK(stats.t1 == 1.5);
}

TEST_CASE("reduce on fully degenerate equal data") {
  const TrialDesign design{3, 4, 2.0};
  const TwoStageObservation obs{2.0, 2.0, 1, 2.0};
  const SufficientStatistics stats = reduce(design, obs);
  CHECK(stats.d1 == 0.0);
  CHECK(stats.d2 == 0.0);
  CHECK(stats.t1 == 2.0);
  CHECK(stats.t2 == 2.0);
  CHECK(stats.q == 0.0);
}

TEST_CASE("reduce rejects inconsistent or invalid selection") {
  const TrialDesign design{5, 5, 1.0};
  CHECK_THROWS_AS(reduce(design, TwoStageObservation{1.0, 0.0, 2, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(reduce(design, TwoStageObservation{0.0, 1.0, 1, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(reduce(design, TwoStageObservation{1.0, 1.0, 2, 2.0}),
                  std::invalid_argument);  // tie must select arm 1
  CHECK_THROWS_AS(reduce(design, TwoStageObservation{1.0, 0.0, 3, 2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(reduce(design, TwoStageObservation{1.0, 0.0, 0, 2.0}),
                  std::invalid_argument);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(reduce(design, TwoStageObservation{nan, 0.0, 1, 2.0}),
                  std::invalid_argument);
}

TEST_CASE("reduce equivariance under shift and arm relabeling") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  std::uniform_int_distribution<int> ns(1, 25);
  for (int rep = 0; rep < 1000; ++rep) {
    const TrialDesign design{ns(rng), ns(rng), 1.3};
    const double x1 = val(rng);
    const double x2 = val(rng);
    if (x1 == x2) {
      continue;
    }
    const double y = val(rng);
    const double b = val(rng);
    const TwoStageObservation obs{x1, x2, select_arm(x1, x2), y};
    const SufficientStatistics base = reduce(design, obs);

    const TwoStageObservation swapped{x2, x1, 3 - obs.selected, y};
    const SufficientStatistics perm = reduce(design, swapped);
    CHECK(perm.xbar_s == base.xbar_s);
    CHECK(perm.d1 == base.d1);
    CHECK(perm.d2 == base.d2);
    CHECK(perm.t1 == base.t1);
    CHECK(perm.q == base.q);

    const TwoStageObservation shifted{x1 + b, x2 + b, obs.selected, y + b};
    const SufficientStatistics loc = reduce(design, shifted);
    check_abs(loc.d1, base.d1, 1e-12);
    check_abs(loc.d2, base.d2, 1e-12);
    check_abs(loc.t1, base.t1 + b, 1e-12);
    CHECK(base.d1 <= 0.0);
  }
}

TEST_CASE("stream hashing is reproducible and well distributed") {
  const StreamKey key{123, 4, 567, 0};
  CHECK(uniform_at(key, 0) == uniform_at(key, 0));
  CHECK(normal_at(key, 2) == normal_at(key, 2));
  CHECK(uniform_at(key, 0) != uniform_at(key, 1));
  const StreamKey other{123, 4, 568, 0};
  CHECK(normal_at(key, 0) != normal_at(other, 0));

  double sum = 0.0;
  double sum_sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const StreamKey k{9, 0, static_cast<std::uint64_t>(i), 0};
    const double z = normal_at(k, 0);
    sum += z;
    sum_sq += z * z;
    const double u = uniform_at(k, 5);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  check_abs(sum / n, 0.0, 0.01);        // ~4.5 sigma at 2e5 draws
  check_abs(sum_sq / n, 1.0, 0.015);
}

TEST_CASE("sample_observation replays and respects the design") {
  const TrialDesign design{5, 8, 2.0};
  const ParameterPoint truth{0.3, -0.2};
  const StreamKey key{77, 1, 42, 0};
  const TwoStageObservation a = sample_observation(design, truth, key);
  const TwoStageObservation b = sample_observation(design, truth, key);
  CHECK(a.xbar1 == b.xbar1);
  CHECK(a.xbar2 == b.xbar2);
  CHECK(a.ybar == b.ybar);
  CHECK(a.selected == b.selected);
  CHECK(a.selected == select_arm(a.xbar1, a.xbar2));

  const StreamKey next{77, 1, 43, 0};
  const TwoStageObservation c = sample_observation(design, truth, next);
  CHECK(a.xbar1 != c.xbar1);
}

TEST_CASE("sample_observation collapses onto the truth as sigma vanishes") {
  const TrialDesign design{5, 5, 1e-12};
  const ParameterPoint truth{1.0, 2.0};
  const StreamKey key{5, 0, 0, 0};
  const TwoStageObservation obs = sample_observation(design, truth, key);
  check_abs(obs.xbar1, 1.0, 1e-10);
  check_abs(obs.xbar2, 2.0, 1e-10);
  CHECK(obs.selected == 2);
  check_abs(obs.ybar, 2.0, 1e-10);
}

TEST_CASE("selection is a fair coin at equal means") {
  const TrialDesign design{5, 5, 1.0};
  const ParameterPoint truth{0.0, 0.0};
  int arm1 = 0;
  const int reps = 200000;
  for (int r = 0; r < reps; ++r) {
    const StreamKey key{2024, 0, static_cast<std::uint64_t>(r), 0};
    if (sample_observation(design, truth, key).selected == 1) {
      ++arm1;
    }
  }
  // SE = 0.5/sqrt(2e5) ~ 0.0011; allow ~3.6 SE.
  check_abs(static_cast<double>(arm1) / reps, 0.5, 0.004);
}

TEST_CASE("sampled stage-1 means have the right moments") {
  const TrialDesign design{4, 9, 2.0};
  const ParameterPoint truth{1.0, 1.0};
  double sum1 = 0.0;
  double sumsq1 = 0.0;
  const int reps = 100000;
  for (int r = 0; r < reps; ++r) {
    const StreamKey key{31, 0, static_cast<std::uint64_t>(r), 0};
    const TwoStageObservation obs = sample_observation(design, truth, key);
    sum1 += obs.xbar1;
    sumsq1 += obs.xbar1 * obs.xbar1;
  }
  const double mean = sum1 / reps;
  const double var = sumsq1 / reps - mean * mean;
  check_abs(mean, 1.0, 0.015);   // SD = 1, ~4.7 SE
  check_abs(var, 1.0, 0.025);    // sigma^2/n1 = 1
}
