#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyadic/dyad.hpp"
#include "dyadic/regression.hpp"
#include "dyadic/simulation.hpp"
#include "dyadic/variance.hpp"

namespace dyadic {

/// Standard-error methods selectable from the command line.
enum class SeChoice { hc0, hc2, cluster_dyad, dyadic };

const char* to_string(SeChoice c);
SeChoice parse_se_choice(const std::string& name);
std::vector<SeChoice> parse_se_list(const std::string& comma_separated);

struct FitRequest {
  Family family = Family::linear;
  std::vector<SeChoice> methods = {SeChoice::hc0, SeChoice::hc2, SeChoice::cluster_dyad, SeChoice::dyadic};
  bool psd_truncate = false;
};

struct FitReportRow {
  std::string predictor;
  double coefficient = 0.0;
  std::vector<double> se;  // one per requested method, same order
};

struct FitReport {
  FitRequest request;
  RegressionFit fit;
  std::vector<std::string> predictors;
  std::vector<VcovEstimate> vcov;  // one per requested method
  std::vector<PsdDiagnostic> diagnostics;
  std::size_t n_units = 0;
  std::size_t n_dyads = 0;
  std::size_t n_rows = 0;

  std::vector<FitReportRow> rows() const;
};

/// Fits the requested family (WLS when the data carry weights) and every
/// requested estimator from that one fit. hc2 with logistic is a DataError.
FitReport run_fit(const DyadDataset& data, const FitRequest& request);

/// {meta, coefficients, se_by_method, vcov_by_method, diagnostics}
nlohmann::json fit_report_json(const FitReport& report, const nlohmann::json& meta = nlohmann::json::object());

/// Fixed-width table, 6 significant digits.
void print_fit_table(std::ostream& out, const FitReport& report);

nlohmann::json simulation_report_json(const SimulationReport& report);

/// Long format: n_units,replicate,coefficient,method,se (plus a header).
void write_simulation_long_csv(std::ostream& out, const std::vector<SimulationReport>& reports);

void print_simulation_summary(std::ostream& out, const SimulationReport& report);

}  // namespace dyadic
