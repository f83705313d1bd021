// dyadreg: regression with dyadic cluster-robust standard errors.
//
//   dyadreg fit data.csv --units i,j --outcome y [--regressors a,b|rest] ...
//   dyadreg simulate --n-units 20,50 --t 1 --replicates 500 --seed 7 ...
//   dyadreg generate --n-units 20 --t 2 --seed 7 --out sample.csv
//
// Exit codes: 0 success, 2 data error, 3 numerical error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dyadic/csv_io.hpp"
#include "dyadic/errors.hpp"
#include "dyadic/report.hpp"
#include "dyadic/simulation.hpp"

namespace {

constexpr int kDataError = 2;
constexpr int kNumericalError = 3;

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw dyadic::DataError("cannot write '" + path + "'");
  out << content;
}

struct FitArgs {
  std::string input;
  std::string units;
  std::string outcome;
  std::string regressors = "rest";
  std::string time;
  std::string weights;
  std::string family = "linear";
  std::string se = "hc0,hc2,cluster-dyad,dyadic";
  std::string json_path;
  bool directed = false;
  bool psd_truncate = false;
  bool no_intercept = false;
};

int cmd_fit(const FitArgs& a) {
  dyadic::CsvSchema schema;
  const auto units = split(a.units);
  if (units.size() != 2) throw dyadic::DataError("--units expects two column names, e.g. --units ccode1,ccode2");
  schema.unit_i = units[0];
  schema.unit_j = units[1];
  schema.outcome = a.outcome;
  if (a.regressors != "rest") schema.regressors = split(a.regressors);
  if (!a.time.empty()) schema.time = a.time;
  if (!a.weights.empty()) schema.weight = a.weights;
  schema.intercept = !a.no_intercept;
  schema.directed = a.directed;

  const dyadic::IngestResult in = dyadic::ingest_csv(a.input, schema);

  dyadic::FitRequest request;
  if (a.family == "linear") {
    request.family = dyadic::Family::linear;
  } else if (a.family == "logistic") {
    request.family = dyadic::Family::logistic;
  } else {
    throw dyadic::DataError("--family must be linear or logistic");
  }
  request.methods = dyadic::parse_se_list(a.se);
  request.psd_truncate = a.psd_truncate;

  const dyadic::FitReport report = dyadic::run_fit(in.data, request);
  dyadic::print_fit_table(std::cout, report);

  if (!a.json_path.empty()) {
    nlohmann::json meta = {{"tool", "dyadreg"},
                           {"input", a.input},
                           {"directed", a.directed},
                           {"unit_labels", in.unit_labels}};
    write_file(a.json_path, dyadic::fit_report_json(report, meta).dump(2) + "\n");
  }
  return 0;
}

struct SimulateArgs {
  std::string n_units = "20,50,100,150";
  std::size_t t = 1;
  std::size_t replicates = 500;
  std::uint64_t seed = 20170101;
  double beta0 = 0.0;
  double beta1 = 1.0;
  double beta2 = 0.0;
  std::string regressor_dist = "normal";
  std::string error_dist = "normal";
  unsigned threads = 0;
  std::string json_path = "simulation.json";
  std::string csv_path = "simulation_long.csv";
};

int cmd_simulate(const SimulateArgs& a) {
  std::vector<dyadic::SimulationReport> reports;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& n : split(a.n_units)) {
    dyadic::SimulationConfig cfg;
    std::size_t pos = 0;
    try {
      cfg.n_units = std::stoul(n, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != n.size()) throw dyadic::DataError("--n-units: '" + n + "' is not a count");
    cfg.t_per_dyad = a.t;
    cfg.replicates = a.replicates;
    cfg.seed = a.seed;
    cfg.beta0 = a.beta0;
    cfg.beta1 = a.beta1;
    cfg.beta2 = a.beta2;
    cfg.regressor_distribution = dyadic::parse_distribution(a.regressor_dist);
    cfg.error_distribution = dyadic::parse_distribution(a.error_dist);
    cfg.threads = a.threads;
    cfg.validate();

    auto report = cfg.beta2 != 0.0 ? dyadic::run_misspecification_study(cfg) : dyadic::run_monte_carlo(cfg);
    dyadic::print_simulation_summary(std::cout, report);
    std::cout << '\n';
    runs.push_back(dyadic::simulation_report_json(report));
    reports.push_back(std::move(report));
  }
  write_file(a.json_path, nlohmann::json{{"meta", {{"tool", "dyadreg"}}}, {"runs", runs}}.dump(2) + "\n");
  std::ostringstream csv;
  dyadic::write_simulation_long_csv(csv, reports);
  write_file(a.csv_path, csv.str());
  std::cout << "wrote " << a.json_path << " and " << a.csv_path << '\n';
  return 0;
}

struct GenerateArgs {
  std::size_t n_units = 20;
  std::size_t t = 1;
  std::uint64_t seed = 20170101;
  std::uint64_t replicate = 0;
  double beta0 = 0.0;
  double beta1 = 1.0;
  double beta2 = 0.0;
  std::string out = "-";
};

int cmd_generate(const GenerateArgs& a) {
  dyadic::SimulationConfig cfg;
  cfg.n_units = a.n_units;
  cfg.t_per_dyad = a.t;
  cfg.beta0 = a.beta0;
  cfg.beta1 = a.beta1;
  cfg.beta2 = a.beta2;
  const auto sample = dyadic::generate_dyadic_sample(cfg, dyadic::replicate_seed(a.seed, a.replicate));
  std::ostringstream csv;
  dyadic::write_csv(csv, sample.data);
  if (a.out == "-") {
    std::cout << csv.str();
  } else {
    write_file(a.out, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regression on dyadic data with dyadic cluster-robust standard errors"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model to a dyadic CSV file and report standard errors");
  fit_cmd->add_option("input", fit.input, "CSV file with a header row")->required();
  fit_cmd->add_option("--units", fit.units, "The two unit columns, comma separated")->required();
  fit_cmd->add_option("--outcome", fit.outcome, "Outcome column")->required();
  fit_cmd->add_option("--regressors", fit.regressors, "Regressor columns, comma separated, or 'rest'");
  fit_cmd->add_option("--time", fit.time, "Integer time column for repeated dyads");
  fit_cmd->add_option("--weights", fit.weights, "Positive weight column");
  fit_cmd->add_option("--family", fit.family, "linear or logistic")->check(CLI::IsMember({"linear", "logistic"}));
  fit_cmd->add_option("--se", fit.se, "Comma-separated subset of hc0,hc2,cluster-dyad,dyadic");
  fit_cmd->add_option("--json", fit.json_path, "Write the full report as JSON");
  fit_cmd->add_flag("--directed", fit.directed,
                    "Rows are (sender, receiver); both directions become repeated observations of the pair");
  fit_cmd->add_flag("--psd-truncate", fit.psd_truncate, "Clip negative eigenvalues of indefinite estimates");
  fit_cmd->add_flag("--no-intercept", fit.no_intercept, "Do not add an intercept column");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of standard-error calibration");
  sim_cmd->add_option("--n-units", sim.n_units, "Comma-separated list of unit counts");
  sim_cmd->add_option("--t", sim.t, "Observations per dyad")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--replicates", sim.replicates, "Replicates per unit count")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim.seed, "Base RNG seed");
  sim_cmd->add_option("--beta0", sim.beta0);
  sim_cmd->add_option("--beta1", sim.beta1);
  sim_cmd->add_option("--beta2", sim.beta2, "Coefficient on (X_i - X_j)^2 omitted from the fitted model");
  sim_cmd->add_option("--regressor-dist", sim.regressor_dist, "normal, uniform or bimodal");
  sim_cmd->add_option("--error-dist", sim.error_dist, "normal, uniform, bimodal or point_mass");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
  sim_cmd->add_option("--json", sim.json_path, "Report output path");
  sim_cmd->add_option("--csv", sim.csv_path, "Long-format SE output path");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write one simulated dataset as CSV");
  gen_cmd->add_option("--n-units", gen.n_units)->check(CLI::Range(3, 100000));
  gen_cmd->add_option("--t", gen.t)->check(CLI::PositiveNumber);
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_option("--replicate", gen.replicate, "Replicate stream index");
  gen_cmd->add_option("--beta0", gen.beta0);
  gen_cmd->add_option("--beta1", gen.beta1);
  gen_cmd->add_option("--beta2", gen.beta2);
  gen_cmd->add_option("--out", gen.out, "Output path, '-' for stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit_cmd) return cmd_fit(fit);
    if (*sim_cmd) return cmd_simulate(sim);
    if (*gen_cmd) return cmd_generate(gen);
  } catch (const dyadic::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const dyadic::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    if (*sim_cmd) std::cerr << "run 'dyadreg simulate --help' for usage\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
