// Command-line interface: estimate (real data), simulate (risk sweep),
// table1 (improvement table), figures (risk/bias curves for the five
// headline estimators over six designs), verify (self-checks).
//
// Exit codes: 0 success, 1 usage or data error, 2 verification failure.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtl/csvio.hpp"
#include "dtl/estimators.hpp"
#include "dtl/model.hpp"
#include "dtl/simulate.hpp"
#include "dtl/verify.hpp"

namespace {

std::vector<double> build_theta_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("--theta-step must be > 0");
  }
  if (hi < lo) {
    throw std::invalid_argument("--theta-max must be >= --theta-min");
  }
  std::vector<double> grid;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi + 0.5 * step) {
      break;
    }
    grid.push_back(std::min(v, hi));
  }
  return grid;
}

std::vector<dtl::EstimatorId> parse_estimator_list(const std::string& csv) {
  std::vector<dtl::EstimatorId> ids;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) {
      ids.push_back(dtl::estimator_from_string(token));
    }
  }
  if (ids.empty()) {
    throw std::invalid_argument("--estimators must name at least one estimator");
  }
  return ids;
}

int run_estimate(const std::string& data_path, bool sigma_given, double sigma,
                 const std::string& policy_str, const std::string& json_path) {
  dtl::SigmaPolicy policy = dtl::SigmaPolicy::kPooledStage1;
  if (policy_str == "fixed") {
    if (!sigma_given) {
      throw std::invalid_argument("--sigma-policy fixed requires --sigma");
    }
    policy = dtl::SigmaPolicy::kFixed;
  } else if (policy_str == "pooled-stage1") {
    if (sigma_given) {
      throw std::invalid_argument(
          "--sigma conflicts with --sigma-policy pooled-stage1");
    }
  } else if (policy_str.empty()) {
    policy = sigma_given ? dtl::SigmaPolicy::kFixed
                         : dtl::SigmaPolicy::kPooledStage1;
  } else {
    throw std::invalid_argument("unknown sigma policy '" + policy_str +
                                "' (expected fixed or pooled-stage1)");
  }
  const dtl::TrialDataset dataset = dtl::ingest_csv_file(data_path);
  const dtl::EstimateReport report =
      dtl::estimate_command(dataset, policy, sigma);
  dtl::write_report_text(report, std::cout);
  if (!json_path.empty()) {
    dtl::write_file_atomic(json_path, dtl::report_to_json(report));
    std::cout << "wrote " << json_path << '\n';
  }
  return 0;
}

int run_simulate(const dtl::SweepConfig& config, const std::string& out_path) {
  const dtl::RiskCurve curve = dtl::run_sweep(config);
  std::ostringstream buffer;
  dtl::write_risk_curve_csv(curve, buffer);
  dtl::write_file_atomic(out_path, buffer.str());
  std::cout << "wrote " << out_path << " (" << curve.cells.size()
            << " cells, " << config.replications << " replications each)\n";
  return 0;
}

int run_table1(std::int64_t reps, std::uint64_t seed,
               const std::string& out_path) {
  const std::vector<dtl::TrialDesign> designs = {
      {5, 5, 1.0}, {10, 5, 1.0}, {10, 10, 1.0}, {10, 15, 1.0}};
  const std::vector<double> grid = {0.0, 0.05, 0.1, 0.2, 0.3, 0.5,
                                    1.0, 1.5,  2.0, 2.5, 3.0};
  const dtl::ImprovementTable table = dtl::improvement_table(
      dtl::EstimatorId::SINGLE_STAGE, dtl::EstimatorId::SINGLE_STAGE_IMPROVED,
      designs, grid, reps, seed);
  std::ostringstream buffer;
  dtl::write_improvement_csv(table, buffer);
  dtl::write_file_atomic(out_path, buffer.str());

  std::cout << "percentage MSE improvement of the improved single-stage "
               "estimator over the single-stage estimator\n";
  std::cout << "theta ";
  for (const dtl::TrialDesign& d : designs) {
    std::cout << std::setw(9) << ("(" + std::to_string(d.n1) + ";" +
                                  std::to_string(d.n2) + ")");
  }
  std::cout << '\n' << std::fixed << std::setprecision(2);
  for (std::size_t ti = 0; ti < grid.size(); ++ti) {
    std::cout << std::setw(5) << grid[ti] << ' ';
    for (double cell : table.cells[ti]) {
      std::cout << std::setw(9) << cell;
    }
    std::cout << '\n';
  }
  std::cout.unsetf(std::ios_base::floatfield);
  std::cout << "wrote " << out_path << '\n';
  return 0;
}

int run_figures(const dtl::SweepConfig& config, const std::string& out_path) {
  const std::vector<dtl::FigureRow> rows = dtl::figure_data(config);
  std::ostringstream buffer;
  dtl::write_figure_csv(rows, config.replications, config.seed, buffer);
  dtl::write_file_atomic(out_path, buffer.str());
  std::cout << "wrote " << out_path << " (" << rows.size() << " rows: 6 "
            << "designs x " << config.theta_grid.size() << " theta values x 5 "
            << "estimators x {mse,bias})\n";
  return 0;
}

int run_verify(const std::string& json_path) {
  const std::vector<dtl::CheckResult> results = dtl::run_verification();
  bool all_pass = true;
  for (const dtl::CheckResult& r : results) {
    all_pass = all_pass && r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << ' ' << r.name << "  (residual "
              << dtl::format_sig6(r.residual) << ", tolerance "
              << dtl::format_sig6(r.tolerance) << ")\n      " << r.details
              << '\n';
  }
  std::cout << (all_pass ? "all checks passed" : "CHECKS FAILED") << '\n';
  if (!json_path.empty()) {
    nlohmann::json j = nlohmann::json::array();
    for (const dtl::CheckResult& r : results) {
      j.push_back({{"name", r.name},
                   {"pass", r.pass},
                   {"residual", r.residual},
                   {"tolerance", r.tolerance},
                   {"details", r.details}});
    }
    dtl::write_file_atomic(json_path, j.dump(2));
    std::cout << "wrote " << json_path << '\n';
  }
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "two-stage drop-the-losers design: estimation, exact risk, simulation"};
  app.require_subcommand(1);

  // ---- estimate ----
  auto* est = app.add_subcommand(
      "estimate", "evaluate all seven estimators on a trial dataset");
  std::string data_path;
  double fixed_sigma = 0.0;
  std::string policy_str;
  std::string json_path;
  est->add_option("--data", data_path, "trial CSV (stage,arm,value)")
      ->required();
  auto* sigma_opt = est->add_option(
      "--sigma", fixed_sigma, "known common sigma (implies fixed policy)");
  est->add_option("--sigma-policy", policy_str,
                  "fixed | pooled-stage1 (default: pooled-stage1, or fixed "
                  "when --sigma is given)");
  est->add_option("--json", json_path, "also write a JSON report here");

  // ---- simulate ----
  auto* sim = app.add_subcommand(
      "simulate", "Monte Carlo risk/bias sweep over a theta grid");
  dtl::SweepConfig sim_config;
  sim_config.design = dtl::TrialDesign{5, 5, 1.0};
  sim_config.replications = 10000;
  sim_config.seed = 1;
  double theta_min = 0.0;
  double theta_max = 3.0;
  double theta_step = 0.1;
  std::string estimators_csv =
      "mle,umvcue,umvcue_improved,single_stage_rb,delta1";
  std::string sim_out = "risk_curve.csv";
  sim->add_option("--n1", sim_config.design.n1, "stage-1 group size per arm");
  sim->add_option("--n2", sim_config.design.n2, "stage-2 group size");
  sim->add_option("--sigma", sim_config.design.sigma, "known common sigma");
  sim->add_option("--theta-min", theta_min, "smallest mean gap");
  sim->add_option("--theta-max", theta_max, "largest mean gap");
  sim->add_option("--theta-step", theta_step, "grid step (> 0)");
  sim->add_option("--reps", sim_config.replications,
                  "Monte Carlo replications per theta (>= 1000)");
  sim->add_option("--seed", sim_config.seed, "stream seed");
  sim->add_option("--estimators", estimators_csv,
                  "comma-separated estimator names");
  sim->add_flag("--crn,!--no-crn", sim_config.crn,
                "share random numbers across estimators (default on)");
  sim->add_option("--out", sim_out, "output CSV path");

  // ---- table1 ----
  auto* tab = app.add_subcommand(
      "table1",
      "percentage MSE improvement of the improved single-stage estimator, "
      "11 mean gaps x 4 designs");
  std::int64_t tab_reps = 1000000;
  std::uint64_t tab_seed = 1;
  std::string tab_out = "table1.csv";
  tab->add_option("--reps", tab_reps, "replications per cell (default 10^6)");
  tab->add_option("--seed", tab_seed, "stream seed");
  tab->add_option("--out", tab_out, "output CSV path");

  // ---- figures ----
  auto* fig = app.add_subcommand(
      "figures", "risk/bias curves for 5 estimators over 6 designs");
  dtl::SweepConfig fig_config;
  fig_config.design = dtl::TrialDesign{5, 5, 1.0};
  fig_config.replications = 10000;
  fig_config.seed = 1;
  double fig_min = 0.0;
  double fig_max = 3.0;
  double fig_step = 0.1;
  std::string fig_out = "figures.csv";
  fig->add_option("--sigma", fig_config.design.sigma, "known common sigma");
  fig->add_option("--theta-min", fig_min, "smallest mean gap");
  fig->add_option("--theta-max", fig_max, "largest mean gap");
  fig->add_option("--theta-step", fig_step, "grid step (> 0)");
  fig->add_option("--reps", fig_config.replications,
                  "replications per theta (>= 1000)");
  fig->add_option("--seed", fig_config.seed, "stream seed");
  fig->add_flag("--crn,!--no-crn", fig_config.crn,
                "share random numbers across estimators (default on)");
  fig->add_option("--out", fig_out, "output CSV path");

  // ---- verify ----
  auto* ver = app.add_subcommand(
      "verify", "run the self-verification suite (exit 2 on failure)");
  std::string ver_out;
  ver->add_option("--out", ver_out, "write a JSON check report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*est) {
      return run_estimate(data_path, sigma_opt->count() > 0, fixed_sigma,
                          policy_str, json_path);
    }
    if (*sim) {
      sim_config.theta_grid = build_theta_grid(theta_min, theta_max,
                                               theta_step);
      sim_config.estimator_set = parse_estimator_list(estimators_csv);
      return run_simulate(sim_config, sim_out);
    }
    if (*tab) {
      return run_table1(tab_reps, tab_seed, tab_out);
    }
    if (*fig) {
      fig_config.theta_grid = build_theta_grid(fig_min, fig_max, fig_step);
      return run_figures(fig_config, fig_out);
    }
    if (*ver) {
      return run_verify(ver_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
