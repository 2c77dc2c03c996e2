#pragma once

// Seeded, common-random-numbers Monte Carlo estimation of MSE and bias
// across theta grids and designs. Results are a pure function of the
// configuration: streams are counter-based and partial sums are reduced in
// fixed chunk order, so output is bitwise identical for any thread count.

#include <cstdint>
#include <string>
#include <vector>

#include "dtl/estimators.hpp"
#include "dtl/model.hpp"

namespace dtl {

struct SweepConfig {
  TrialDesign design;
  std::vector<double> theta_grid;      // nonempty, sorted ascending
  std::int64_t replications = 1000000;  // >= 1000
  std::uint64_t seed = 0;
  std::vector<EstimatorId> estimator_set;
  bool crn = true;  // share draws across estimators within a replication
};
// Throws std::invalid_argument on grid/replication/estimator-set violations.
void validate(const SweepConfig& config);

struct RiskCell {
  double theta;
  EstimatorId estimator;
  double mse;
  double bias;
  double mse_standard_error;   // SD of squared errors / sqrt(R)
  double bias_standard_error;  // SD of errors / sqrt(R)
};

struct RiskCurve {
  TrialDesign design;  // provenance
  std::uint64_t seed = 0;
  std::int64_t replications = 0;
  bool crn = true;
  std::vector<RiskCell> cells;  // theta-major, estimator_set order within
};

RiskCurve run_sweep(const SweepConfig& config);

// Percentage risk improvement 100*(mse(base) - mse(improved))/mse(base) per
// (theta, design) cell, from common-random-numbers sweeps.
struct ImprovementTable {
  EstimatorId base;
  EstimatorId improved;
  std::vector<double> theta_grid;
  std::vector<TrialDesign> designs;
  std::vector<std::vector<double>> cells;  // cells[theta_index][design_index]
  std::int64_t replications = 0;
  std::uint64_t seed = 0;
};

ImprovementTable improvement_table(EstimatorId base, EstimatorId improved,
                                   const std::vector<TrialDesign>& designs,
                                   const std::vector<double>& theta_grid,
                                   std::int64_t replications,
                                   std::uint64_t seed);

// Long-format dataset behind the risk/bias figures: the five figure
// estimators {mle, umvcue, umvcue_improved, single_stage_rb, delta1} on the
// six designs {(5,5),(10,10),(5,10),(10,15),(10,5),(15,10)}, using
// config's sigma, theta grid, replications, seed, and crn flag. Rows are
// ordered design-major, then theta, then estimator, with the mse row
// preceding the bias row.
struct FigureRow {
  TrialDesign design;
  double theta;
  EstimatorId estimator;
  std::string metric;  // "mse" or "bias"
  double value;
  double se;
};
std::vector<FigureRow> figure_data(const SweepConfig& config);

inline constexpr std::array<EstimatorId, 5> kFigureEstimators = {
    EstimatorId::MLE, EstimatorId::UMVCUE, EstimatorId::UMVCUE_IMPROVED,
    EstimatorId::SINGLE_STAGE_RB, EstimatorId::DELTA1};

// Worker count: DTL_THREADS if set (>=1), else hardware concurrency.
int default_thread_count();

}  // namespace dtl
