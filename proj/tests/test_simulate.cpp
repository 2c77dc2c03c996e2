#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include <doctest.h>

#include "dtl/estimators.hpp"
#include "dtl/model.hpp"
#include "dtl/simulate.hpp"
#include "dtl/theory.hpp"

using namespace dtl;

namespace {

void check_abs(double actual, double expected, double tol) {
  INFO("actual ", actual, " expected ", expected, " tol ", tol);
  CHECK(std::abs(actual - expected) <= tol);
}

SweepConfig small_config() {
  SweepConfig config;
  config.design = TrialDesign{5, 5, 1.0};
  config.theta_grid = {0.0, 1.0};
  config.replications = 20000;
  config.seed = 7;
  config.estimator_set.assign(kAllEstimators.begin(), kAllEstimators.end());
  config.crn = true;
  return config;
}

}  // namespace

TEST_CASE("sweep config validation") {
  SweepConfig config = small_config();
  CHECK_NOTHROW(validate(config));

  SweepConfig empty_grid = small_config();
  empty_grid.theta_grid.clear();
  CHECK_THROWS_AS(validate(empty_grid), std::invalid_argument);

  SweepConfig unsorted = small_config();
  unsorted.theta_grid = {1.0, 0.5};
  CHECK_THROWS_AS(validate(unsorted), std::invalid_argument);

  SweepConfig negative_theta = small_config();
  negative_theta.theta_grid = {-0.5, 0.0};
  CHECK_THROWS_AS(validate(negative_theta), std::invalid_argument);

  SweepConfig few_reps = small_config();
  few_reps.replications = 999;
  CHECK_THROWS_AS(validate(few_reps), std::invalid_argument);

  SweepConfig no_estimators = small_config();
  no_estimators.estimator_set.clear();
  CHECK_THROWS_AS(validate(no_estimators), std::invalid_argument);

  SweepConfig bad_design = small_config();
  bad_design.design.sigma = 0.0;
  CHECK_THROWS_AS(validate(bad_design), std::invalid_argument);
}

TEST_CASE("run_sweep is bitwise deterministic for any thread count") {
  const SweepConfig config = small_config();
  const RiskCurve a = run_sweep(config);
  const RiskCurve b = run_sweep(config);

  const char* saved = std::getenv("DTL_THREADS");
  const std::string saved_value = saved ? saved : "";
  setenv("DTL_THREADS", "4", 1);
  const RiskCurve c = run_sweep(config);
  if (saved) {
    setenv("DTL_THREADS", saved_value.c_str(), 1);
  } else {
    unsetenv("DTL_THREADS");
  }

  REQUIRE(a.cells.size() == b.cells.size());
  REQUIRE(a.cells.size() == c.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].mse == b.cells[i].mse);
    CHECK(a.cells[i].bias == b.cells[i].bias);
    CHECK(a.cells[i].mse_standard_error == b.cells[i].mse_standard_error);
    CHECK(a.cells[i].bias_standard_error == b.cells[i].bias_standard_error);
    CHECK(a.cells[i].mse == c.cells[i].mse);
    CHECK(a.cells[i].bias == c.cells[i].bias);
    CHECK(a.cells[i].mse_standard_error == c.cells[i].mse_standard_error);
    CHECK(a.cells[i].bias_standard_error == c.cells[i].bias_standard_error);
  }
}

TEST_CASE("sweep cells carry provenance and a theta-major layout") {
  const SweepConfig config = small_config();
  const RiskCurve curve = run_sweep(config);
  CHECK(curve.seed == config.seed);
  CHECK(curve.replications == config.replications);
  CHECK(curve.crn == config.crn);
  CHECK(curve.design.n1 == 5);
  REQUIRE(curve.cells.size() == config.theta_grid.size() * 7);
  for (std::size_t ti = 0; ti < config.theta_grid.size(); ++ti) {
    for (std::size_t e = 0; e < 7; ++e) {
      const RiskCell& cell = curve.cells[ti * 7 + e];
      CHECK(cell.theta == config.theta_grid[ti]);
      CHECK(cell.estimator == config.estimator_set[e]);
      CHECK(cell.mse >= 0.0);
      CHECK(cell.mse_standard_error > 0.0);
      CHECK(cell.bias_standard_error > 0.0);
      // bias^2 <= mse (Jensen, holds for the MC estimates exactly).
      CHECK(cell.bias * cell.bias <= cell.mse + 1e-15);
    }
  }
}

TEST_CASE("monte carlo agrees with the exact quadrature within 4 SE") {
  SweepConfig config = small_config();
  config.replications = 50000;
  const RiskCurve curve = run_sweep(config);
  QuadratureSpec spec;
  for (const RiskCell& cell : curve.cells) {
    const RiskResult exact =
        risk_quadrature(config.design, cell.theta, cell.estimator, spec);
    INFO("theta ", cell.theta, " estimator ", to_string(cell.estimator));
    CHECK(std::abs(cell.mse - exact.mse) <=
          4.0 * cell.mse_standard_error);
    CHECK(std::abs(cell.bias - exact.bias) <=
          4.0 * cell.bias_standard_error);
  }
}

TEST_CASE("a large design sends every estimator's risk to zero") {
  SweepConfig config;
  config.design = TrialDesign{200, 200, 1.0};
  config.theta_grid = {0.0, 0.5};
  config.replications = 2000;
  config.seed = 3;
  config.estimator_set.assign(kAllEstimators.begin(), kAllEstimators.end());
  const RiskCurve curve = run_sweep(config);
  for (const RiskCell& cell : curve.cells) {
    CHECK(cell.mse < 0.01);
  }
}

TEST_CASE("common random numbers shrink the paired-difference variance") {
  const TrialDesign design{5, 5, 1.0};
  const ParameterPoint truth{0.0, 0.5};
  const int reps = 5000;
  const auto paired_variance = [&](bool crn) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int r = 0; r < reps; ++r) {
      const std::uint64_t rep = static_cast<std::uint64_t>(r);
      const std::uint64_t lane_base =
          crn ? 0 : static_cast<std::uint64_t>(EstimatorId::SINGLE_STAGE) + 1;
      const std::uint64_t lane_improved =
          crn ? 0
              : static_cast<std::uint64_t>(
                    EstimatorId::SINGLE_STAGE_IMPROVED) +
                    1;
      const TwoStageObservation obs_base =
          sample_observation(design, truth, StreamKey{5, 0, rep, lane_base});
      const TwoStageObservation obs_improved = sample_observation(
          design, truth, StreamKey{5, 0, rep, lane_improved});
      const double mu_base = obs_base.selected == 1 ? truth.mu1 : truth.mu2;
      const double mu_improved =
          obs_improved.selected == 1 ? truth.mu1 : truth.mu2;
      const double eb =
          estimate(EstimatorId::SINGLE_STAGE, design, obs_base) - mu_base;
      const double ei = estimate(EstimatorId::SINGLE_STAGE_IMPROVED, design,
                                 obs_improved) -
                        mu_improved;
      const double diff = eb * eb - ei * ei;
      sum += diff;
      sum_sq += diff * diff;
    }
    const double mean = sum / reps;
    return sum_sq / reps - mean * mean;
  };
  CHECK(paired_variance(true) < paired_variance(false));
}

TEST_CASE("improvement table matches the exact percentages") {
  const std::vector<TrialDesign> designs = {{5, 5, 1.0}, {10, 15, 1.0}};
  const std::vector<double> grid = {0.0, 0.5, 2.0};
  const ImprovementTable table =
      improvement_table(EstimatorId::SINGLE_STAGE,
                        EstimatorId::SINGLE_STAGE_IMPROVED, designs, grid,
                        200000, 11);
  REQUIRE(table.cells.size() == 3);
  REQUIRE(table.cells[0].size() == 2);
  // Exact (quadrature) percentages; 2e5 CRN replications land well inside
  // +-0.5 of them.
  const double expected[3][2] = {
      {13.0334, 18.0226}, {15.0389, 21.2760}, {3.8673, 2.0497}};
  for (std::size_t ti = 0; ti < 3; ++ti) {
    for (std::size_t di = 0; di < 2; ++di) {
      INFO("theta ", grid[ti], " design ", di);
      check_abs(table.cells[ti][di], expected[ti][di], 0.5);
      CHECK(table.cells[ti][di] >= -0.5);  // raw values, no clipping
    }
  }
  CHECK(table.base == EstimatorId::SINGLE_STAGE);
  CHECK(table.improved == EstimatorId::SINGLE_STAGE_IMPROVED);
  CHECK(table.replications == 200000);
}

TEST_CASE("figure data has the documented shape and ordering") {
  SweepConfig config;
  config.design = TrialDesign{1, 1, 1.0};  // n1, n2 overridden per design
  config.theta_grid = {0.0, 0.5};
  config.replications = 20000;
  config.seed = 5;
  config.estimator_set = {EstimatorId::MLE};  // ignored: fixed set
  const std::vector<FigureRow> rows = figure_data(config);

  const int designs[6][2] = {{5, 5}, {10, 10}, {5, 10},
                             {10, 15}, {10, 5}, {15, 10}};
  REQUIRE(rows.size() == 6u * 2u * 5u * 2u);
  std::size_t idx = 0;
  for (const auto& dn : designs) {
    for (double theta : config.theta_grid) {
      for (EstimatorId id : kFigureEstimators) {
        CHECK(rows[idx].design.n1 == dn[0]);
        CHECK(rows[idx].design.n2 == dn[1]);
        CHECK(rows[idx].theta == theta);
        CHECK(rows[idx].estimator == id);
        CHECK(rows[idx].metric == "mse");
        CHECK(rows[idx + 1].metric == "bias");
        CHECK(rows[idx + 1].estimator == id);
        idx += 2;
      }
    }
  }

  // The improved unbiased estimator never loses to its base within noise.
  for (std::size_t i = 0; i < rows.size(); i += 20) {
    // Within one (design, theta) block: mse rows at offsets 2 (umvcue) and
    // 4 (umvcue_improved).
    const FigureRow& bg = rows[i + 2];
    const FigureRow& bg_improved = rows[i + 4];
    REQUIRE(bg.estimator == EstimatorId::UMVCUE);
    REQUIRE(bg_improved.estimator == EstimatorId::UMVCUE_IMPROVED);
    CHECK(bg_improved.value <= bg.value + 3.0 * bg.se);
  }
}

TEST_CASE("sigma scales the whole figure dataset") {
  SweepConfig config;
  config.design = TrialDesign{1, 1, 2.0};
  config.theta_grid = {0.0};
  config.replications = 1000;
  config.seed = 5;
  config.estimator_set = {EstimatorId::MLE};
  const std::vector<FigureRow> rows = figure_data(config);
  for (const FigureRow& row : rows) {
    CHECK(row.design.sigma == 2.0);
  }
}
