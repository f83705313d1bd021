#include "dyadic/report.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "dyadic/errors.hpp"

namespace dyadic {

using nlohmann::json;

const char* to_string(SeChoice c) {
  switch (c) {
    case SeChoice::hc0: return "hc0";
    case SeChoice::hc2: return "hc2";
    case SeChoice::cluster_dyad: return "cluster-dyad";
    case SeChoice::dyadic: return "dyadic";
  }
  return "unknown";
}

SeChoice parse_se_choice(const std::string& name) {
  if (name == "hc0") return SeChoice::hc0;
  if (name == "hc2") return SeChoice::hc2;
  if (name == "cluster-dyad") return SeChoice::cluster_dyad;
  if (name == "dyadic") return SeChoice::dyadic;
  throw DataError("unknown standard-error method '" + name + "' (expected hc0, hc2, cluster-dyad, dyadic)");
}

std::vector<SeChoice> parse_se_list(const std::string& comma_separated) {
  std::vector<SeChoice> out;
  std::stringstream ss(comma_separated);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const SeChoice c = parse_se_choice(item);
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  if (out.empty()) throw DataError("no standard-error methods requested");
  return out;
}

std::vector<FitReportRow> FitReport::rows() const {
  std::vector<FitReportRow> out;
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    FitReportRow row{predictors[j], fit.beta[static_cast<Eigen::Index>(j)], {}};
    for (const auto& v : vcov) row.se.push_back(v.se[static_cast<Eigen::Index>(j)]);
    out.push_back(std::move(row));
  }
  return out;
}

FitReport run_fit(const DyadDataset& data, const FitRequest& request) {
  if (request.family == Family::logistic &&
      std::find(request.methods.begin(), request.methods.end(), SeChoice::hc2) != request.methods.end()) {
    throw DataError("hc2 is only available for the linear family");
  }
  FitReport report;
  report.request = request;
  if (request.family == Family::logistic) {
    report.fit = fit_logistic(data);
  } else {
    report.fit = data.has_nonunit_weights() ? fit_wls(data) : fit_ols(data);
  }
  report.predictors = data.regressor_names();
  report.n_units = data.n_units();
  report.n_dyads = data.n_dyads();
  report.n_rows = data.n_rows();

  for (SeChoice m : request.methods) {
    VcovEstimate v;
    switch (m) {
      case SeChoice::hc0: v = vcov_hc0(report.fit, data); break;
      case SeChoice::hc2: v = vcov_hc2(report.fit, data); break;
      case SeChoice::cluster_dyad: v = vcov_cluster(report.fit, data, dyad_grouping(data), "dyad"); break;
      case SeChoice::dyadic:
        v = request.family == Family::logistic ? vcov_dyadic_logistic(report.fit, data)
            : report.fit.weighted()            ? vcov_dyadic_weighted(report.fit, data)
                                               : vcov_dyadic_decomposed(report.fit, data);
        break;
    }
    report.diagnostics.push_back(psd_check(v));
    if (request.psd_truncate && !v.psd_ok) v = truncate_to_psd(v);
    report.vcov.push_back(std::move(v));
  }
  return report;
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json summary_json(const DistributionSummary& s) {
  return {{"nonfinite", s.nonfinite}, {"mean", s.mean}, {"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"q3", s.q3}, {"max", s.max}};
}

}  // namespace

json fit_report_json(const FitReport& report, const json& meta) {
  json out;
  out["meta"] = meta;
  out["meta"]["family"] = to_string(report.request.family);
  out["meta"]["weighted"] = report.fit.weighted();
  out["meta"]["n_units"] = report.n_units;
  out["meta"]["n_dyads"] = report.n_dyads;
  out["meta"]["n_rows"] = report.n_rows;
  out["meta"]["iterations"] = report.fit.iterations;

  out["coefficients"] = {{"names", report.predictors}, {"values", vector_json(report.fit.beta)}};

  json se = json::object();
  json vcov = json::object();
  json diag = json::object();
  for (std::size_t m = 0; m < report.vcov.size(); ++m) {
    const std::string key = to_string(report.request.methods[m]);
    const VcovEstimate& v = report.vcov[m];
    const PsdDiagnostic& d = report.diagnostics[m];
    se[key] = vector_json(v.se);
    vcov[key] = matrix_json(v.matrix);
    diag[key] = {{"method_tag", v.tag()},
                 {"min_eigenvalue", d.min_eigenvalue},
                 {"max_eigenvalue", d.max_eigenvalue},
                 {"psd_ok", d.psd_ok},
                 {"negative_diagonals", d.negative_diagonals},
                 {"truncated", v.truncated}};
  }
  out["se_by_method"] = std::move(se);
  out["vcov_by_method"] = std::move(vcov);
  out["diagnostics"] = std::move(diag);
  return out;
}

void print_fit_table(std::ostream& out, const FitReport& report) {
  std::size_t name_width = 9;
  for (const auto& p : report.predictors) name_width = std::max(name_width, p.size());
  const int col = 16;
  auto header = [](SeChoice m) -> std::string {
    switch (m) {
      case SeChoice::hc0: return "HC0 S.E.";
      case SeChoice::hc2: return "HC2 S.E.";
      case SeChoice::cluster_dyad: return "Naive Cluster";
      case SeChoice::dyadic: return "Dyadic Cluster";
    }
    return "";
  };

  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::left << std::setw(static_cast<int>(name_width)) << "Predictor" << std::right << std::setw(col)
      << "Coef.";
  for (SeChoice m : report.request.methods) out << std::setw(col) << header(m);
  out << '\n';
  out << std::setprecision(6);
  for (const auto& row : report.rows()) {
    out << std::left << std::setw(static_cast<int>(name_width)) << row.predictor << std::right << std::setw(col)
        << row.coefficient;
    for (double s : row.se) out << std::setw(col) << s;
    out << '\n';
  }
  out << "N units = " << report.n_units << ", dyads = " << report.n_dyads << ", rows = " << report.n_rows
      << ", family = " << to_string(report.request.family) << (report.fit.weighted() ? " (weighted)" : "")
      << '\n';
  for (std::size_t m = 0; m < report.vcov.size(); ++m) {
    if (!report.diagnostics[m].psd_ok) {
      out << "warning: " << to_string(report.request.methods[m])
          << " covariance is not positive semi-definite (min eigenvalue "
          << report.diagnostics[m].min_eigenvalue << ")"
          << (report.vcov[m].truncated ? "; negative eigenvalues truncated" : "") << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

json simulation_report_json(const SimulationReport& report) {
  const SimulationConfig& c = report.config;
  json out;
  out["config"] = {{"n_units", c.n_units},
                   {"t_per_dyad", c.t_per_dyad},
                   {"beta0", c.beta0},
                   {"beta1", c.beta1},
                   {"beta2", c.beta2},
                   {"regressor_distribution", to_string(c.regressor_distribution)},
                   {"error_distribution", to_string(c.error_distribution)},
                   {"replicates", c.replicates},
                   {"seed", c.seed}};
  out["misspecification"] = report.misspecification;
  out["rows_per_replicate"] = dyad_count(c.n_units) * c.t_per_dyad;

  json summary = json::array();
  for (const CoefficientSummary& s : report.summary) {
    json se = json::object();
    for (SeMethod m : kSeMethods) se[to_string(m)] = summary_json(s.se[static_cast<int>(m)]);
    summary.push_back({{"coefficient", s.name},
                       {"target", s.target},
                       {"mean_estimate", s.mean_estimate},
                       {"empirical_sd", s.empirical_sd},
                       {"se", std::move(se)}});
  }
  out["summary"] = std::move(summary);

  json reps = json::array();
  for (const ReplicateResult& r : report.replicates) {
    json se = json::object();
    for (SeMethod m : kSeMethods) {
      const auto& v = r.se[static_cast<int>(m)];
      se[to_string(m)] = {v[0], v[1]};
    }
    reps.push_back({{"replicate", r.replicate}, {"beta", {r.beta[0], r.beta[1]}}, {"se", std::move(se)}});
  }
  out["replicates"] = std::move(reps);
  return out;
}

void write_simulation_long_csv(std::ostream& out, const std::vector<SimulationReport>& reports) {
  out << "n_units,replicate,coefficient,method,se\n";
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (const SimulationReport& rep : reports) {
    for (const ReplicateResult& r : rep.replicates) {
      for (int c = 0; c < 2; ++c) {
        for (SeMethod m : kSeMethods) {
          out << rep.config.n_units << ',' << r.replicate << ',' << rep.summary[c].name << ',' << to_string(m)
              << ',' << r.se[static_cast<int>(m)][c] << '\n';
        }
      }
    }
  }
  out.precision(precision);
}

void print_simulation_summary(std::ostream& out, const SimulationReport& report) {
  const SimulationConfig& c = report.config;
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << "N = " << c.n_units << ", T = " << c.t_per_dyad << ", dyads = " << dyad_count(c.n_units)
      << ", rows/replicate = " << dyad_count(c.n_units) * c.t_per_dyad << ", replicates = " << c.replicates
      << (report.misspecification ? ", misspecified (beta2 = " + std::to_string(c.beta2) + ")" : "") << '\n';
  out << std::left << std::setw(13) << "coefficient" << std::setw(20) << "method" << std::right << std::setw(12)
      << "target" << std::setw(12) << "emp. SD" << std::setw(12) << "mean SE" << std::setw(12) << "median SE"
      << std::setw(12) << "SE/SD" << '\n'
      << std::setprecision(6);
  for (const CoefficientSummary& s : report.summary) {
    for (SeMethod m : kSeMethods) {
      const auto& d = s.se[static_cast<int>(m)];
      out << std::left << std::setw(13) << s.name << std::setw(20) << to_string(m) << std::right << std::setw(12)
          << s.target << std::setw(12) << s.empirical_sd << std::setw(12) << d.mean << std::setw(12) << d.median
          << std::setw(12) << d.mean / s.empirical_sd;
      if (d.nonfinite > 0) out << "  (" << d.nonfinite << " non-finite)";
      out << '\n';
    }
  }
  out.flags(flags);
  out.precision(precision);
}

}  // namespace dyadic
