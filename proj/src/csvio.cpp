#include "dtl/csvio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "dtl/gauss.hpp"

namespace dtl {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Splits one line into fields, honoring double-quoted fields with ""
// escapes (RFC-4180 style).
std::vector<std::string> split_fields(const std::string& line,
                                      std::size_t lineno) {
  std::vector<std::string> fields;
  std::string current;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        current += ch;
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(trim(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  if (in_quotes) {
    throw std::runtime_error("unterminated quoted field at line " +
                             std::to_string(lineno));
  }
  fields.push_back(trim(current));
  return fields;
}

double parse_value(const std::string& token, std::size_t lineno) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) {
    throw std::runtime_error("non-numeric value '" + token + "' at line " +
                             std::to_string(lineno));
  }
  return value;
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

void check_shape(const TrialDataset& dataset) {
  if (dataset.stage1_arm1.empty() || dataset.stage1_arm2.empty()) {
    throw std::runtime_error("dataset has no stage-1 rows for one or both arms");
  }
  if (dataset.stage1_arm1.size() != dataset.stage1_arm2.size()) {
    throw std::runtime_error(
        "ragged stage-1 arms: arm 1 has " +
        std::to_string(dataset.stage1_arm1.size()) + " values, arm 2 has " +
        std::to_string(dataset.stage1_arm2.size()));
  }
  if (dataset.stage2.empty()) {
    throw std::runtime_error("dataset has no stage-2 rows");
  }
}

}  // namespace

TrialDataset ingest_csv(std::istream& in) {
  TrialDataset dataset;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  // -1 = no stage-2 row yet; 0 = 'S'; 1/2 = numeral label.
  int stage2_label = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (trim(line).empty()) {
      continue;
    }
    if (line[0] == '#') {
      dataset.metadata.push_back(line);
      continue;
    }
    const std::vector<std::string> fields = split_fields(line, lineno);
    if (!header_seen) {
      if (fields.size() != 3 || lower(fields[0]) != "stage" ||
          lower(fields[1]) != "arm" || lower(fields[2]) != "value") {
        throw std::runtime_error(
            "expected header 'stage,arm,value' at line " +
            std::to_string(lineno));
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw std::runtime_error("expected 3 fields at line " +
                               std::to_string(lineno) + ", found " +
                               std::to_string(fields.size()));
    }
    const std::string& stage = fields[0];
    const std::string& arm = fields[1];
    const double value = parse_value(fields[2], lineno);
    if (stage == "1") {
      if (arm == "1") {
        dataset.stage1_arm1.push_back(value);
      } else if (arm == "2") {
        dataset.stage1_arm2.push_back(value);
      } else {
        throw std::runtime_error("unrecognized stage-1 arm '" + arm +
                                 "' at line " + std::to_string(lineno) +
                                 " (expected 1 or 2)");
      }
    } else if (stage == "2") {
      int label;
      if (arm == "S" || arm == "s") {
        label = 0;
      } else if (arm == "1") {
        label = 1;
      } else if (arm == "2") {
        label = 2;
      } else {
        throw std::runtime_error("unrecognized stage-2 arm '" + arm +
                                 "' at line " + std::to_string(lineno) +
                                 " (expected 1, 2, or S)");
      }
      if (stage2_label == -1) {
        stage2_label = label;
      } else if (stage2_label != label) {
        if (stage2_label > 0 && label > 0) {
          throw std::runtime_error(
              "stage-2 rows present for both arms (lines up to " +
              std::to_string(lineno) + "); the design continues one arm only");
        }
        throw std::runtime_error("inconsistent stage-2 arm labels at line " +
                                 std::to_string(lineno));
      }
      dataset.stage2.push_back(value);
    } else {
      throw std::runtime_error("unrecognized stage '" + stage + "' at line " +
                               std::to_string(lineno) + " (expected 1 or 2)");
    }
  }
  if (!header_seen) {
    throw std::runtime_error("expected header 'stage,arm,value' (file has none)");
  }
  dataset.stage2_arm_label = std::max(stage2_label, 0);
  check_shape(dataset);
  return dataset;
}

TrialDataset ingest_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  return ingest_csv(in);
}

std::string serialize_csv(const TrialDataset& dataset) {
  std::ostringstream out;
  for (const std::string& comment : dataset.metadata) {
    out << comment << '\n';
  }
  out << "stage,arm,value\n";
  for (double v : dataset.stage1_arm1) {
    out << "1,1," << format_full(v) << '\n';
  }
  for (double v : dataset.stage1_arm2) {
    out << "1,2," << format_full(v) << '\n';
  }
  const std::string label = dataset.stage2_arm_label == 0
                                ? "S"
                                : std::to_string(dataset.stage2_arm_label);
  for (double v : dataset.stage2) {
    out << "2," << label << ',' << format_full(v) << '\n';
  }
  return out.str();
}

double pooled_stage1_sd(const TrialDataset& dataset) {
  check_shape(dataset);
  const std::size_t n1 = dataset.stage1_arm1.size();
  if (n1 < 2) {
    throw std::invalid_argument(
        "pooled stage-1 SD needs at least 2 subjects per arm; "
        "supply sigma explicitly");
  }
  const double m1 = mean_of(dataset.stage1_arm1);
  const double m2 = mean_of(dataset.stage1_arm2);
  double ss = 0.0;
  for (double x : dataset.stage1_arm1) {
    ss += (x - m1) * (x - m1);
  }
  for (double x : dataset.stage1_arm2) {
    ss += (x - m2) * (x - m2);
  }
  return std::sqrt(ss / static_cast<double>(2 * n1 - 2));
}

EstimateReport estimate_command(const TrialDataset& dataset, SigmaPolicy policy,
                                double fixed_sigma) {
  check_shape(dataset);
  EstimateReport report;
  const double m1 = mean_of(dataset.stage1_arm1);
  const double m2 = mean_of(dataset.stage1_arm2);
  const int selected = select_arm(m1, m2);
  if (dataset.stage2_arm_label != 0 && dataset.stage2_arm_label != selected) {
    throw std::runtime_error(
        "stage-2 arm label (" + std::to_string(dataset.stage2_arm_label) +
        ") disagrees with the stage-1 selection (arm " +
        std::to_string(selected) + ")");
  }
  double sigma = 0.0;
  if (policy == SigmaPolicy::kFixed) {
    if (!std::isfinite(fixed_sigma) || fixed_sigma <= 0.0) {
      throw std::invalid_argument("fixed sigma must be positive and finite");
    }
    sigma = fixed_sigma;
    report.sigma_source = "fixed (user-supplied)";
  } else {
    sigma = pooled_stage1_sd(dataset);
    report.sigma_source = "pooled stage-1 sample SD";
  }
  report.design = TrialDesign{static_cast<int>(dataset.stage1_arm1.size()),
                              static_cast<int>(dataset.stage2.size()), sigma};
  report.obs = TwoStageObservation{m1, m2, selected, mean_of(dataset.stage2)};
  report.stats = reduce(report.design, report.obs);
  report.sigma_used = sigma;
  report.values.reserve(kAllEstimators.size());
  for (EstimatorId id : kAllEstimators) {
    report.values.emplace_back(id, estimate(id, report.design, report.obs));
  }
  return report;
}

double solve_sigma_for_umvcue(int n1, int n2, double d1, double d2, double t1,
                              double target) {
  if (n1 < 1 || n2 < 1) {
    throw std::invalid_argument("group sizes must be >= 1");
  }
  if (!std::isfinite(d1) || !std::isfinite(d2) || !std::isfinite(t1) ||
      !std::isfinite(target)) {
    throw std::invalid_argument("inputs must be finite");
  }
  const double gap = t1 - target;
  if (gap <= 0.0) {
    throw std::invalid_argument(
        "target must lie strictly below t1 (the correction is negative)");
  }
  const double k = std::sqrt(static_cast<double>(n1) /
                             (static_cast<double>(n2) * (n1 + n2)));
  const double xi = n2 * d2 - static_cast<double>(n1 + n2) * d1;
  // correction(sigma) = sigma * k * IM(k*xi/sigma) is strictly increasing
  // in sigma, so the root brackets by halving/doubling from 1.
  const auto correction = [&](double sigma) {
    return sigma * k * inverse_mills(k * xi / sigma);
  };
  double lo = 1.0;
  double hi = 1.0;
  int guard = 0;
  while (correction(lo) > gap) {
    lo *= 0.5;
    if (++guard > 1000) {
      throw std::runtime_error("no sigma attains the requested estimate");
    }
  }
  guard = 0;
  while (correction(hi) < gap) {
    hi *= 2.0;
    if (++guard > 1000) {
      throw std::runtime_error("no sigma attains the requested estimate");
    }
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (correction(mid) < gap) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::string format_sig6(double x) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.6g", x);
  return buffer;
}

std::string format_full(double x) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), x);
  if (ec != std::errc{}) {
    throw std::runtime_error("format_full: conversion failed");
  }
  return std::string(buffer, ptr);
}

namespace {

constexpr const char* kRiskHeader =
    "n1,n2,sigma,theta,estimator,metric,value,se,reps,seed";

void write_risk_row(std::ostream& out, const TrialDesign& design, double theta,
                    EstimatorId id, const char* metric, double value, double se,
                    std::int64_t reps, std::uint64_t seed) {
  out << design.n1 << ',' << design.n2 << ',' << format_full(design.sigma)
      << ',' << format_full(theta) << ',' << to_string(id) << ',' << metric
      << ',' << format_full(value) << ',' << format_full(se) << ',' << reps
      << ',' << seed << '\n';
}

}  // namespace

void write_risk_curve_csv(const RiskCurve& curve, std::ostream& out) {
  out << kRiskHeader << '\n';
  for (const RiskCell& cell : curve.cells) {
    write_risk_row(out, curve.design, cell.theta, cell.estimator, "mse",
                   cell.mse, cell.mse_standard_error, curve.replications,
                   curve.seed);
    write_risk_row(out, curve.design, cell.theta, cell.estimator, "bias",
                   cell.bias, cell.bias_standard_error, curve.replications,
                   curve.seed);
  }
}

void write_figure_csv(const std::vector<FigureRow>& rows,
                      std::int64_t replications, std::uint64_t seed,
                      std::ostream& out) {
  out << kRiskHeader << '\n';
  for (const FigureRow& row : rows) {
    out << row.design.n1 << ',' << row.design.n2 << ','
        << format_full(row.design.sigma) << ',' << format_full(row.theta) << ','
        << to_string(row.estimator) << ',' << row.metric << ','
        << format_full(row.value) << ',' << format_full(row.se) << ','
        << replications << ',' << seed << '\n';
  }
}

void write_improvement_csv(const ImprovementTable& table, std::ostream& out) {
  out << "# percentage MSE improvement of " << to_string(table.improved)
      << " over " << to_string(table.base) << '\n';
  out << "# replications=" << table.replications << " seed=" << table.seed
      << " (common random numbers)\n";
  out << "theta";
  for (const TrialDesign& d : table.designs) {
    out << ",imp_" << d.n1 << '_' << d.n2;
  }
  out << '\n';
  for (std::size_t ti = 0; ti < table.theta_grid.size(); ++ti) {
    out << format_full(table.theta_grid[ti]);
    for (double cell : table.cells[ti]) {
      out << ',' << format_full(cell);
    }
    out << '\n';
  }
}

void write_report_text(const EstimateReport& report, std::ostream& out) {
  const TrialDesign& d = report.design;
  out << "two-stage drop-the-losers estimate report\n";
  out << "  design: n1 = " << d.n1 << " per arm (stage 1), n2 = " << d.n2
      << " (stage 2)\n";
  out << "  sigma = " << format_sig6(report.sigma_used) << "  ["
      << report.sigma_source << "]\n";
  out << "  stage-1 means: arm 1 = " << format_sig6(report.obs.xbar1)
      << ", arm 2 = " << format_sig6(report.obs.xbar2) << '\n';
  out << "  selected arm: " << report.obs.selected
      << "   stage-2 mean: " << format_sig6(report.obs.ybar) << '\n';
  out << "estimates of the selected-arm mean:\n";
  for (const auto& [id, value] : report.values) {
    std::string name(to_string(id));
    name.resize(24, ' ');
    out << "  " << name << format_sig6(value) << '\n';
  }
}

std::string report_to_json(const EstimateReport& report) {
  nlohmann::json j;
  j["design"] = {{"n1", report.design.n1},
                 {"n2", report.design.n2},
                 {"sigma", report.design.sigma}};
  j["sigma_used"] = report.sigma_used;
  j["sigma_source"] = report.sigma_source;
  j["observation"] = {{"xbar1", report.obs.xbar1},
                      {"xbar2", report.obs.xbar2},
                      {"selected", report.obs.selected},
                      {"ybar", report.obs.ybar}};
  j["statistics"] = {{"xbar_s", report.stats.xbar_s},
                     {"xbar_loser", report.stats.xbar_loser},
                     {"d1", report.stats.d1},
                     {"d2", report.stats.d2},
                     {"t1", report.stats.t1},
                     {"t2", report.stats.t2},
                     {"q", report.stats.q},
                     {"w", report.stats.w}};
  nlohmann::json estimates = nlohmann::json::object();
  for (const auto& [id, value] : report.values) {
    estimates[to_string(id)] = value;
  }
  j["estimates"] = estimates;
  return j.dump(2);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open for writing: " + tmp);
    }
    out << content;
    out.flush();
    if (!out) {
      throw std::runtime_error("write failed: " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace dtl
