#pragma once

// Trial-data ingestion, the sigma policy for the real-data workflow, and
// serialization of reports, tables, and figure-data files. All CSV output
// is RFC-4180-style, '.' decimal separator, locale-independent; numeric
// fields are written with shortest round-trip precision so that
// ingest(serialize(dataset)) == dataset exactly.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dtl/estimators.hpp"
#include "dtl/model.hpp"
#include "dtl/simulate.hpp"

namespace dtl {

// Per-subject responses of one two-stage trial. Input schema:
// header "stage,arm,value"; stage in {1,2}; arm in {1,2} for stage 1 and
// 'S' (or a single consistent numeral) for stage 2. Comment lines starting
// with '#' are preserved as metadata.
struct TrialDataset {
  std::vector<double> stage1_arm1;
  std::vector<double> stage1_arm2;
  std::vector<double> stage2;
  std::vector<std::string> metadata;  // '#' comment lines, verbatim
  int stage2_arm_label = 0;           // 0 = 'S'/unlabeled, else 1 or 2

  bool operator==(const TrialDataset&) const = default;
};

// Parses the schema above. Distinct errors for: missing/invalid header,
// ragged stage-1 arms, stage-2 rows present for both arms, non-numeric
// values, unrecognized stage/arm tokens, and empty stage lists.
TrialDataset ingest_csv(std::istream& in);
TrialDataset ingest_csv_file(const std::string& path);

// Emits the same schema (comments first, then header, stage-1 arm 1,
// stage-1 arm 2, stage-2 rows).
std::string serialize_csv(const TrialDataset& dataset);

enum class SigmaPolicy {
  kFixed,         // caller-supplied sigma
  kPooledStage1,  // pooled sample SD of the two stage-1 arms (default)
};

struct EstimateReport {
  TrialDesign design;
  TwoStageObservation obs;
  SufficientStatistics stats;
  double sigma_used = 0.0;
  std::string sigma_source;  // human-readable annotation
  std::vector<std::pair<EstimatorId, double>> values;  // all seven
};

// Computes means, selects the arm, reduces, and evaluates all seven
// estimators. Throws on nonpositive fixed sigma, on n1 == 1 under the
// pooled policy (SD undefined), and on a stage-2 numeral label that
// contradicts the stage-1 selection.
EstimateReport estimate_command(const TrialDataset& dataset,
                                SigmaPolicy policy, double fixed_sigma = 0.0);

// Pooled sample SD of the two stage-1 arms (2*n1 - 2 denominator).
double pooled_stage1_sd(const TrialDataset& dataset);

// Solves umvcue = target for sigma by bisection (the real-data table omits
// its sigma; this recovers the implied value). Requires t1 > target.
double solve_sigma_for_umvcue(int n1, int n2, double d1, double d2, double t1,
                              double target);

// 6-significant-digit human rendering and shortest round-trip rendering.
std::string format_sig6(double x);
std::string format_full(double x);

// CSV emitters. Risk-curve rows: n1,n2,sigma,theta,estimator,metric,value,
// se,reps,seed (one mse row then one bias row per cell). The figure-data
// CSV uses the identical schema so a single-design sweep slices out of it.
void write_risk_curve_csv(const RiskCurve& curve, std::ostream& out);
void write_figure_csv(const std::vector<FigureRow>& rows,
                      std::int64_t replications, std::uint64_t seed,
                      std::ostream& out);
void write_improvement_csv(const ImprovementTable& table, std::ostream& out);

// Human-readable estimate report (6 significant digits).
void write_report_text(const EstimateReport& report, std::ostream& out);
// Machine-readable report (full precision).
std::string report_to_json(const EstimateReport& report);

// Writes content to path via a temp file + rename (atomic on POSIX).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace dtl
