#include "dtl/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace dtl {

namespace {

constexpr std::int64_t kChunkSize = 4096;

struct Accumulator {
  double sum_e = 0.0;   // sum of errors
  double sum_e2 = 0.0;  // sum of squared errors
  double sum_e4 = 0.0;  // sum of fourth powers (SE of the MSE)
};

}  // namespace

int default_thread_count() {
  if (const char* env = std::getenv("DTL_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) {
      return v;
    }
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void validate(const SweepConfig& config) {
  validate(config.design);
  if (config.theta_grid.empty()) {
    throw std::invalid_argument("SweepConfig: theta_grid must be nonempty");
  }
  double prev = -1.0;
  for (double theta : config.theta_grid) {
    if (!std::isfinite(theta) || theta < 0.0) {
      throw std::invalid_argument(
          "SweepConfig: theta values must be finite and >= 0");
    }
    if (theta < prev) {
      throw std::invalid_argument(
          "SweepConfig: theta_grid must be sorted ascending");
    }
    prev = theta;
  }
  if (config.replications < 1000) {
    throw std::invalid_argument("SweepConfig: replications must be >= 1000");
  }
  if (config.estimator_set.empty()) {
    throw std::invalid_argument("SweepConfig: estimator_set must be nonempty");
  }
}

RiskCurve run_sweep(const SweepConfig& config) {
  validate(config);
  const std::int64_t reps = config.replications;
  const std::int64_t nchunks = (reps + kChunkSize - 1) / kChunkSize;
  const std::size_t ne = config.estimator_set.size();

  RiskCurve curve;
  curve.design = config.design;
  curve.seed = config.seed;
  curve.replications = reps;
  curve.crn = config.crn;
  curve.cells.reserve(config.theta_grid.size() * ne);

  const int threads = std::max(
      1, std::min<int>(default_thread_count(), static_cast<int>(nchunks)));

  for (std::size_t ti = 0; ti < config.theta_grid.size(); ++ti) {
    const double theta = config.theta_grid[ti];
    const ParameterPoint truth{0.0, theta};

    // Per-chunk partial sums; chunks are claimed by an atomic counter but
    // reduced in chunk-index order, so totals are bitwise independent of
    // the thread count and of scheduling.
    std::vector<Accumulator> partials(static_cast<std::size_t>(nchunks) * ne);
    std::atomic<std::int64_t> next_chunk{0};

    const auto worker = [&]() {
      std::vector<Accumulator> local(ne);
      for (;;) {
        const std::int64_t chunk = next_chunk.fetch_add(1);
        if (chunk >= nchunks) {
          return;
        }
        const std::int64_t lo = chunk * kChunkSize;
        const std::int64_t hi = std::min(reps, lo + kChunkSize);
        std::fill(local.begin(), local.end(), Accumulator{});
        for (std::int64_t r = lo; r < hi; ++r) {
          if (config.crn) {
            const StreamKey key{config.seed, ti, static_cast<std::uint64_t>(r),
                                0};
            const TwoStageObservation obs =
                sample_observation(config.design, truth, key);
            const double mu_s = obs.selected == 1 ? truth.mu1 : truth.mu2;
            for (std::size_t e = 0; e < ne; ++e) {
              const double err =
                  estimate(config.estimator_set[e], config.design, obs) - mu_s;
              const double sq = err * err;
              local[e].sum_e += err;
              local[e].sum_e2 += sq;
              local[e].sum_e4 += sq * sq;
            }
          } else {
            for (std::size_t e = 0; e < ne; ++e) {
              const std::uint64_t lane =
                  static_cast<std::uint64_t>(config.estimator_set[e]) + 1;
              const StreamKey key{config.seed, ti,
                                  static_cast<std::uint64_t>(r), lane};
              const TwoStageObservation obs =
                  sample_observation(config.design, truth, key);
              const double mu_s = obs.selected == 1 ? truth.mu1 : truth.mu2;
              const double err =
                  estimate(config.estimator_set[e], config.design, obs) - mu_s;
              const double sq = err * err;
              local[e].sum_e += err;
              local[e].sum_e2 += sq;
              local[e].sum_e4 += sq * sq;
            }
          }
        }
        for (std::size_t e = 0; e < ne; ++e) {
          partials[static_cast<std::size_t>(chunk) * ne + e] = local[e];
        }
      }
    };

    if (threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(threads);
      for (int t = 0; t < threads; ++t) {
        pool.emplace_back(worker);
      }
      for (std::thread& t : pool) {
        t.join();
      }
    }

    for (std::size_t e = 0; e < ne; ++e) {
      Accumulator total;
      for (std::int64_t chunk = 0; chunk < nchunks; ++chunk) {
        const Accumulator& p = partials[static_cast<std::size_t>(chunk) * ne + e];
        total.sum_e += p.sum_e;
        total.sum_e2 += p.sum_e2;
        total.sum_e4 += p.sum_e4;
      }
      const double r = static_cast<double>(reps);
      const double mse = total.sum_e2 / r;
      const double bias = total.sum_e / r;
      const double var_sq = std::max(0.0, total.sum_e4 / r - mse * mse);
      const double var_e = std::max(0.0, mse - bias * bias);
      RiskCell cell;
      cell.theta = theta;
      cell.estimator = config.estimator_set[e];
      cell.mse = mse;
      cell.bias = bias;
      cell.mse_standard_error = std::sqrt(var_sq / r);
      cell.bias_standard_error = std::sqrt(var_e / r);
      curve.cells.push_back(cell);
    }
  }
  return curve;
}

ImprovementTable improvement_table(EstimatorId base, EstimatorId improved,
                                   const std::vector<TrialDesign>& designs,
                                   const std::vector<double>& theta_grid,
                                   std::int64_t replications,
                                   std::uint64_t seed) {
  if (designs.empty()) {
    throw std::invalid_argument("improvement_table: designs must be nonempty");
  }
  ImprovementTable table;
  table.base = base;
  table.improved = improved;
  table.theta_grid = theta_grid;
  table.designs = designs;
  table.replications = replications;
  table.seed = seed;
  table.cells.assign(theta_grid.size(),
                     std::vector<double>(designs.size(), 0.0));
  for (std::size_t di = 0; di < designs.size(); ++di) {
    SweepConfig config;
    config.design = designs[di];
    config.theta_grid = theta_grid;
    config.replications = replications;
    config.seed = seed;
    config.estimator_set = {base, improved};
    config.crn = true;
    const RiskCurve curve = run_sweep(config);
    for (std::size_t ti = 0; ti < theta_grid.size(); ++ti) {
      const double mse_base = curve.cells[2 * ti].mse;
      const double mse_improved = curve.cells[2 * ti + 1].mse;
      table.cells[ti][di] = 100.0 * (mse_base - mse_improved) / mse_base;
    }
  }
  return table;
}

std::vector<FigureRow> figure_data(const SweepConfig& config) {
  static const std::array<std::pair<int, int>, 6> kFigureDesigns = {
      {{5, 5}, {10, 10}, {5, 10}, {10, 15}, {10, 5}, {15, 10}}};
  std::vector<FigureRow> rows;
  for (const auto& [n1, n2] : kFigureDesigns) {
    SweepConfig cfg = config;
    cfg.design = TrialDesign{n1, n2, config.design.sigma};
    cfg.estimator_set.assign(kFigureEstimators.begin(),
                             kFigureEstimators.end());
    const RiskCurve curve = run_sweep(cfg);
    for (const RiskCell& cell : curve.cells) {
      rows.push_back(FigureRow{cfg.design, cell.theta, cell.estimator, "mse",
                               cell.mse, cell.mse_standard_error});
      rows.push_back(FigureRow{cfg.design, cell.theta, cell.estimator, "bias",
                               cell.bias, cell.bias_standard_error});
    }
  }
  return rows;
}

}  // namespace dtl
