// Python bindings for the two-stage drop-the-losers library: the data
// model, the seven estimators, the improvement transform, exact-risk
// quadrature, the Monte Carlo sweep engine, trial-data ingestion, and the
// self-verification suite.

#include <pybind11/functional.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dtl/csvio.hpp"
#include "dtl/estimators.hpp"
#include "dtl/gauss.hpp"
#include "dtl/model.hpp"
#include "dtl/rng.hpp"
#include "dtl/simulate.hpp"
#include "dtl/theory.hpp"
#include "dtl/verify.hpp"

namespace py = pybind11;
using namespace dtl;

PYBIND11_MODULE(_dtl_core, m) {
  m.doc() =
      "Two-stage drop-the-losers design with two Gaussian arms: estimators "
      "of the selected treatment mean, exact risk/bias quadrature, and a "
      "deterministic Monte Carlo engine.";

  // --- data model ---------------------------------------------------------
  py::class_<TrialDesign>(m, "TrialDesign")
      .def(py::init([](int n1, int n2, double sigma) {
             TrialDesign d{n1, n2, sigma};
             validate(d);
             return d;
           }),
           py::arg("n1"), py::arg("n2"), py::arg("sigma") = 1.0)
      .def_readwrite("n1", &TrialDesign::n1)
      .def_readwrite("n2", &TrialDesign::n2)
      .def_readwrite("sigma", &TrialDesign::sigma)
      .def("__repr__", [](const TrialDesign& d) {
        std::ostringstream out;
        out << "TrialDesign(n1=" << d.n1 << ", n2=" << d.n2
            << ", sigma=" << d.sigma << ")";
        return out.str();
      });

  py::class_<ParameterPoint>(m, "ParameterPoint")
      .def(py::init([](double mu1, double mu2) {
             return ParameterPoint{mu1, mu2};
           }),
           py::arg("mu1") = 0.0, py::arg("mu2") = 0.0)
      .def_readwrite("mu1", &ParameterPoint::mu1)
      .def_readwrite("mu2", &ParameterPoint::mu2)
      .def("theta1", &ParameterPoint::theta1)
      .def("theta2", &ParameterPoint::theta2)
      .def("theta", &ParameterPoint::theta);

  py::class_<TwoStageObservation>(m, "TwoStageObservation")
      .def(py::init([](double xbar1, double xbar2, int selected, double ybar) {
             return TwoStageObservation{xbar1, xbar2, selected, ybar};
           }),
           py::arg("xbar1"), py::arg("xbar2"), py::arg("selected"),
           py::arg("ybar"))
      .def_readwrite("xbar1", &TwoStageObservation::xbar1)
      .def_readwrite("xbar2", &TwoStageObservation::xbar2)
      .def_readwrite("selected", &TwoStageObservation::selected)
      .def_readwrite("ybar", &TwoStageObservation::ybar);

  py::class_<SufficientStatistics>(m, "SufficientStatistics")
      .def_readonly("xbar_s", &SufficientStatistics::xbar_s)
      .def_readonly("xbar_loser", &SufficientStatistics::xbar_loser)
      .def_readonly("d1", &SufficientStatistics::d1)
      .def_readonly("d2", &SufficientStatistics::d2)
      .def_readonly("t1", &SufficientStatistics::t1)
      .def_readonly("t2", &SufficientStatistics::t2)
      .def_readonly("q", &SufficientStatistics::q)
      .def_readonly("w", &SufficientStatistics::w);

  py::class_<StreamKey>(m, "StreamKey")
      .def(py::init([](std::uint64_t seed, std::uint64_t theta_index,
                       std::uint64_t rep_index, std::uint64_t lane) {
             return StreamKey{seed, theta_index, rep_index, lane};
           }),
           py::arg("seed") = 0, py::arg("theta_index") = 0,
           py::arg("rep_index") = 0, py::arg("lane") = 0)
      .def_readwrite("seed", &StreamKey::seed)
      .def_readwrite("theta_index", &StreamKey::theta_index)
      .def_readwrite("rep_index", &StreamKey::rep_index)
      .def_readwrite("lane", &StreamKey::lane);

  m.def("select_arm", &select_arm, py::arg("xbar1"), py::arg("xbar2"),
        "Stage-1 selection: the arm with the larger mean; ties go to arm 1.");
  m.def("reduce", &reduce, py::arg("design"), py::arg("obs"),
        "Sufficient statistics (xbar_s, d1, d2, t1, t2, q, w) of one trial.");
  m.def("sample_observation", &sample_observation, py::arg("design"),
        py::arg("truth"), py::arg("stream"),
        "Deterministic draw of one trial at the given truth and stream key.");
  m.def("uniform_at", &uniform_at, py::arg("stream"), py::arg("draw"));
  m.def("normal_at", &normal_at, py::arg("stream"), py::arg("position"));

  // --- estimators ----------------------------------------------------------
  py::enum_<EstimatorId>(m, "EstimatorId")
      .value("MLE", EstimatorId::MLE)
      .value("UMVCUE", EstimatorId::UMVCUE)
      .value("UMVCUE_IMPROVED", EstimatorId::UMVCUE_IMPROVED)
      .value("SINGLE_STAGE", EstimatorId::SINGLE_STAGE)
      .value("SINGLE_STAGE_IMPROVED", EstimatorId::SINGLE_STAGE_IMPROVED)
      .value("SINGLE_STAGE_RB", EstimatorId::SINGLE_STAGE_RB)
      .value("DELTA1", EstimatorId::DELTA1);
  m.attr("ALL_ESTIMATORS") =
      std::vector<EstimatorId>(kAllEstimators.begin(), kAllEstimators.end());
  m.attr("FIGURE_ESTIMATORS") = std::vector<EstimatorId>(
      kFigureEstimators.begin(), kFigureEstimators.end());
  m.def("estimator_name",
        [](EstimatorId id) { return std::string(to_string(id)); });
  m.def("estimator_from_string", &estimator_from_string, py::arg("name"));

  m.def("mle", &mle, py::arg("stats"));
  m.def("umvcue", &umvcue, py::arg("design"), py::arg("stats"));
  m.def("pooled_mean", &pooled_mean, py::arg("design"), py::arg("obs"));
  m.def("improve_equivariant", &improve_equivariant, py::arg("psi"),
        py::arg("design"), py::arg("obs"),
        "Risk-improvement transform of the equivariant estimator "
        "t1 + psi(d1, d2); psi may be any Python callable.");
  m.def("umvcue_improved", &umvcue_improved, py::arg("design"),
        py::arg("obs"));
  m.def("single_stage", &single_stage, py::arg("stats"));
  m.def("single_stage_improved", &single_stage_improved, py::arg("design"),
        py::arg("obs"));
  m.def("single_stage_rb", &single_stage_rb, py::arg("design"),
        py::arg("stats"));
  m.def("delta1", &delta1, py::arg("design"), py::arg("stats"));
  m.def("estimate", &estimate, py::arg("id"), py::arg("design"),
        py::arg("obs"), "Dispatch by estimator id; reduces obs internally.");
  m.def("psi_bg", &psi_bg, py::arg("design"), py::arg("d1"), py::arg("d2"));
  m.def("psi_zero", &psi_zero, py::arg("design"), py::arg("d1"),
        py::arg("d2"));

  // --- Gaussian kernel ------------------------------------------------------
  py::class_<QuadratureSpec>(m, "QuadratureSpec")
      .def(py::init([](int node_count, double truncation_halfwidth) {
             QuadratureSpec spec{node_count, truncation_halfwidth};
             validate(spec);
             return spec;
           }),
           py::arg("node_count") = QuadratureSpec{}.node_count,
           py::arg("truncation_halfwidth") =
               QuadratureSpec{}.truncation_halfwidth)
      .def_readwrite("node_count", &QuadratureSpec::node_count)
      .def_readwrite("truncation_halfwidth",
                     &QuadratureSpec::truncation_halfwidth);

  py::class_<IdentityTriple>(m, "IdentityTriple")
      .def_readonly("i0", &IdentityTriple::i0)
      .def_readonly("i1", &IdentityTriple::i1)
      .def_readonly("i2", &IdentityTriple::i2);
  m.def("std_normal_pdf", &std_normal_pdf, py::arg("x"));
  m.def("std_normal_cdf", &std_normal_cdf, py::arg("x"));
  m.def("inverse_mills", &inverse_mills, py::arg("z"),
        "phi(z)/Phi(z), stable over the full double range.");
  m.def("phi_phi_moments", &phi_phi_moments, py::arg("a"), py::arg("b"),
        "Closed forms of E[Phi(aZ+b)], E[Z phi(aZ+b)], E[Z^2 Phi(aZ+b)].");

  // --- theory oracles -------------------------------------------------------
  py::class_<TheoryContext>(m, "TheoryContext")
      .def(py::init<const TrialDesign&, double>(), py::arg("design"),
           py::arg("theta"))
      .def_readonly("design", &TheoryContext::design)
      .def_readonly("theta", &TheoryContext::theta)
      .def_readonly("sigma_star_sq", &TheoryContext::sigma_star_sq)
      .def_readonly("rho", &TheoryContext::rho);

  py::class_<BayesPrior>(m, "BayesPrior")
      .def(py::init([](double m_) {
             BayesPrior p{m_};
             validate(p);
             return p;
           }),
           py::arg("m") = 1.0)
      .def_readwrite("m", &BayesPrior::m);

  py::class_<PsiBounds>(m, "PsiBounds")
      .def_readonly("inf", &PsiBounds::inf)
      .def_readonly("sup", &PsiBounds::sup);

  py::class_<RiskResult>(m, "RiskResult")
      .def_readonly("mse", &RiskResult::mse)
      .def_readonly("bias", &RiskResult::bias);

  m.def("density_U", &density_U, py::arg("ctx"), py::arg("u"));
  m.def("second_moment_U", &second_moment_U, py::arg("ctx"));
  m.def("cond_density_S1", &cond_density_S1, py::arg("ctx"), py::arg("d1"),
        py::arg("d2"), py::arg("s"));
  m.def("cond_expect_S1", &cond_expect_S1, py::arg("ctx"), py::arg("d1"),
        py::arg("d2"));
  m.def("psi_theta", &psi_theta, py::arg("ctx"), py::arg("d1"),
        py::arg("d2"));
  m.def("psi_bounds", &psi_bounds, py::arg("design"), py::arg("d1"),
        py::arg("d2"));
  m.def("bayes_estimate", &bayes_estimate, py::arg("prior"), py::arg("design"),
        py::arg("stats"));
  m.def("risk_quadrature", &risk_quadrature, py::arg("design"),
        py::arg("theta"), py::arg("id"),
        py::arg("spec") = QuadratureSpec{},
        "Exact (deterministic-quadrature) MSE and bias at truth (0, theta).");
  m.def("conditional_bias_quadrature", &conditional_bias_quadrature,
        py::arg("design"), py::arg("mu1"), py::arg("mu2"), py::arg("id"),
        py::arg("arm"), py::arg("spec") = QuadratureSpec{});
  m.def("conditional_risk_R1", &conditional_risk_R1, py::arg("ctx"),
        py::arg("d1"), py::arg("d2"), py::arg("c"));
  m.def("improvement_region_probability", &improvement_region_probability,
        py::arg("design"), py::arg("theta"),
        py::arg("spec") = QuadratureSpec{});

  // --- simulation engine -----------------------------------------------------
  py::class_<SweepConfig>(m, "SweepConfig")
      .def(py::init([](const TrialDesign& design,
                       const std::vector<double>& theta_grid,
                       std::int64_t replications, std::uint64_t seed,
                       const std::vector<EstimatorId>& estimator_set,
                       bool crn) {
             SweepConfig c{design, theta_grid, replications, seed,
                           estimator_set, crn};
             return c;
           }),
           py::arg("design"), py::arg("theta_grid"),
           py::arg("replications") = 1000000, py::arg("seed") = 0,
           py::arg("estimator_set") =
               std::vector<EstimatorId>(kAllEstimators.begin(),
                                        kAllEstimators.end()),
           py::arg("crn") = true)
      .def_readwrite("design", &SweepConfig::design)
      .def_readwrite("theta_grid", &SweepConfig::theta_grid)
      .def_readwrite("replications", &SweepConfig::replications)
      .def_readwrite("seed", &SweepConfig::seed)
      .def_readwrite("estimator_set", &SweepConfig::estimator_set)
      .def_readwrite("crn", &SweepConfig::crn);

  py::class_<RiskCell>(m, "RiskCell")
      .def_readonly("theta", &RiskCell::theta)
      .def_readonly("estimator", &RiskCell::estimator)
      .def_readonly("mse", &RiskCell::mse)
      .def_readonly("bias", &RiskCell::bias)
      .def_readonly("mse_standard_error", &RiskCell::mse_standard_error)
      .def_readonly("bias_standard_error", &RiskCell::bias_standard_error);

  py::class_<RiskCurve>(m, "RiskCurve")
      .def_readonly("design", &RiskCurve::design)
      .def_readonly("seed", &RiskCurve::seed)
      .def_readonly("replications", &RiskCurve::replications)
      .def_readonly("crn", &RiskCurve::crn)
      .def_readonly("cells", &RiskCurve::cells);

  py::class_<ImprovementTable>(m, "ImprovementTable")
      .def_readonly("base", &ImprovementTable::base)
      .def_readonly("improved", &ImprovementTable::improved)
      .def_readonly("theta_grid", &ImprovementTable::theta_grid)
      .def_readonly("designs", &ImprovementTable::designs)
      .def_readonly("cells", &ImprovementTable::cells)
      .def_readonly("replications", &ImprovementTable::replications)
      .def_readonly("seed", &ImprovementTable::seed);

  py::class_<FigureRow>(m, "FigureRow")
      .def_readonly("design", &FigureRow::design)
      .def_readonly("theta", &FigureRow::theta)
      .def_readonly("estimator", &FigureRow::estimator)
      .def_readonly("metric", &FigureRow::metric)
      .def_readonly("value", &FigureRow::value)
      .def_readonly("se", &FigureRow::se);

  m.def("run_sweep", &run_sweep, py::arg("config"),
        py::call_guard<py::gil_scoped_release>(),
        "Monte Carlo MSE/bias sweep; bitwise deterministic in (config).");
  m.def("improvement_table", &improvement_table, py::arg("base"),
        py::arg("improved"), py::arg("designs"), py::arg("theta_grid"),
        py::arg("replications"), py::arg("seed"),
        py::call_guard<py::gil_scoped_release>());
  m.def("figure_data", &figure_data, py::arg("config"),
        py::call_guard<py::gil_scoped_release>());
  m.def("default_thread_count", &default_thread_count);

  // --- trial data and reports -------------------------------------------------
  py::class_<TrialDataset>(m, "TrialDataset")
      .def(py::init<>())
      .def_readwrite("stage1_arm1", &TrialDataset::stage1_arm1)
      .def_readwrite("stage1_arm2", &TrialDataset::stage1_arm2)
      .def_readwrite("stage2", &TrialDataset::stage2)
      .def_readwrite("metadata", &TrialDataset::metadata)
      .def_readwrite("stage2_arm_label", &TrialDataset::stage2_arm_label)
      .def(py::self == py::self);

  py::enum_<SigmaPolicy>(m, "SigmaPolicy")
      .value("FIXED", SigmaPolicy::kFixed)
      .value("POOLED_STAGE1", SigmaPolicy::kPooledStage1);

  py::class_<EstimateReport>(m, "EstimateReport")
      .def_readonly("design", &EstimateReport::design)
      .def_readonly("obs", &EstimateReport::obs)
      .def_readonly("stats", &EstimateReport::stats)
      .def_readonly("sigma_used", &EstimateReport::sigma_used)
      .def_readonly("sigma_source", &EstimateReport::sigma_source)
      .def_readonly("values", &EstimateReport::values);

  m.def("ingest_csv_file", &ingest_csv_file, py::arg("path"));
  m.def(
      "ingest_csv_text",
      [](const std::string& text) {
        std::istringstream in(text);
        return ingest_csv(in);
      },
      py::arg("text"));
  m.def("serialize_csv", &serialize_csv, py::arg("dataset"));
  m.def("estimate_command", &estimate_command, py::arg("dataset"),
        py::arg("policy"), py::arg("fixed_sigma") = 0.0);
  m.def("pooled_stage1_sd", &pooled_stage1_sd, py::arg("dataset"));
  m.def("solve_sigma_for_umvcue", &solve_sigma_for_umvcue, py::arg("n1"),
        py::arg("n2"), py::arg("d1"), py::arg("d2"), py::arg("t1"),
        py::arg("target"));
  m.def("format_sig6", &format_sig6, py::arg("x"));
  m.def("format_full", &format_full, py::arg("x"));
  m.def("risk_curve_csv", [](const RiskCurve& curve) {
    std::ostringstream out;
    write_risk_curve_csv(curve, out);
    return out.str();
  });
  m.def("figure_csv",
        [](const std::vector<FigureRow>& rows, std::int64_t replications,
           std::uint64_t seed) {
          std::ostringstream out;
          write_figure_csv(rows, replications, seed, out);
          return out.str();
        },
        py::arg("rows"), py::arg("replications"), py::arg("seed"));
  m.def("improvement_csv", [](const ImprovementTable& table) {
    std::ostringstream out;
    write_improvement_csv(table, out);
    return out.str();
  });
  m.def("report_text", [](const EstimateReport& report) {
    std::ostringstream out;
    write_report_text(report, out);
    return out.str();
  });
  m.def("report_to_json", &report_to_json, py::arg("report"));
  m.def("write_file_atomic", &write_file_atomic, py::arg("path"),
        py::arg("content"));

  // --- verification ------------------------------------------------------------
  py::class_<CheckResult>(m, "CheckResult")
      .def_readonly("name", &CheckResult::name)
      .def_readonly("pass_", &CheckResult::pass)
      .def_readonly("residual", &CheckResult::residual)
      .def_readonly("tolerance", &CheckResult::tolerance)
      .def_readonly("details", &CheckResult::details);
  m.def("run_verification", &run_verification,
        py::call_guard<py::gil_scoped_release>(),
        "Runs the full self-verification suite; deterministic.");
}
