#include <doctest.h>

#include <random>
#include <sstream>

#include "dyadic/errors.hpp"
#include "dyadic/report.hpp"
#include "dyadic/simulation.hpp"
#include "support.hpp"

using namespace dyadic;
using doctest::Approx;

TEST_CASE("se method parsing") {
  CHECK(parse_se_list("hc0,dyadic") == std::vector<SeChoice>{SeChoice::hc0, SeChoice::dyadic});
  CHECK(parse_se_list("dyadic,dyadic,") == std::vector<SeChoice>{SeChoice::dyadic});
  CHECK_THROWS_AS(parse_se_list("hc3"), DataError);
  CHECK_THROWS_AS(parse_se_list(""), DataError);
}

TEST_CASE("run_fit") {
  SimulationConfig cfg;
  cfg.n_units = 50;
  cfg.t_per_dyad = 2;
  const auto sample = generate_dyadic_sample(cfg, replicate_seed(2024, 0));

  SUBCASE("standard errors order as hc0 <= naive cluster <= dyadic for the slope") {
    const FitReport report = run_fit(sample.data, {});
    const auto rows = report.rows();
    REQUIRE(rows.size() == 2);
    const auto& slope = rows[1];
    CHECK(slope.predictor == "absdiff");
    REQUIRE(slope.se.size() == 4);  // hc0, hc2, cluster-dyad, dyadic
    CHECK(slope.se[0] <= slope.se[2]);
    CHECK(slope.se[2] <= slope.se[3]);
  }
  SUBCASE("intercept-only linear fit reports the sample mean") {
    const DyadDataset data = sample.data.with_design(Eigen::MatrixXd::Ones(sample.data.x().rows(), 1));
    const FitReport report = run_fit(data, {});
    CHECK(report.fit.beta[0] == Approx(data.y().mean()).epsilon(1e-12));
  }
  SUBCASE("hc2 with the logistic family is rejected") {
    FitRequest req;
    req.family = Family::logistic;
    CHECK_THROWS_AS(run_fit(sample.data, req), DataError);
  }
}

TEST_CASE("weighted logistic fit on repeated dyads") {
  std::mt19937_64 rng(31);
  testing::RandomSpec spec;
  spec.n_units = 15;
  spec.t_max = 3;
  spec.ragged = true;
  spec.logistic = true;
  spec.weighted = true;
  const DyadDataset data = testing::random_dataset(rng, spec);

  FitRequest req;
  req.family = Family::logistic;
  req.methods = {SeChoice::hc0, SeChoice::cluster_dyad, SeChoice::dyadic};
  const FitReport report = run_fit(data, req);
  CHECK(report.fit.family == Family::logistic);
  CHECK(report.fit.weighted());
  const Eigen::MatrixXd oracle = testing::dyadic_indicator_oracle(report.fit, data);
  CHECK(testing::rel_frobenius(report.vcov[2].matrix, oracle) <= 1e-9);
}

TEST_CASE("fit report JSON") {
  SimulationConfig cfg;
  cfg.n_units = 12;
  const auto sample = generate_dyadic_sample(cfg, 5);
  const FitReport report = run_fit(sample.data, {});
  const auto j = fit_report_json(report, {{"input", "memory"}});
  for (const char* key : {"meta", "coefficients", "se_by_method", "vcov_by_method", "diagnostics"}) {
    CHECK(j.contains(key));
  }
  CHECK(j["meta"]["input"] == "memory");
  CHECK(j["meta"]["n_dyads"] == 66);
  CHECK(j["diagnostics"]["cluster-dyad"]["method_tag"] == "cluster(dyad)");

  // Parse the serialized text back and recompute each se from its vcov.
  const auto parsed = nlohmann::json::parse(j.dump());
  for (const auto& [method, matrix] : parsed["vcov_by_method"].items()) {
    const auto& se = parsed["se_by_method"][method];
    for (std::size_t c = 0; c < matrix.size(); ++c) {
      const double v = matrix[c][c].get<double>();
      CHECK(std::sqrt(v) == Approx(se[c].get<double>()).epsilon(1e-12));
    }
  }
  CHECK(parsed["coefficients"]["values"][1].get<double>() == report.fit.beta[1]);
}

TEST_CASE("fit table layout") {
  SimulationConfig cfg;
  cfg.n_units = 10;
  const auto sample = generate_dyadic_sample(cfg, 5);
  std::ostringstream out;
  print_fit_table(out, run_fit(sample.data, {}));
  const std::string s = out.str();
  for (const char* h : {"Predictor", "Coef.", "HC0 S.E.", "HC2 S.E.", "Naive Cluster", "Dyadic Cluster", "absdiff"}) {
    CHECK(s.find(h) != std::string::npos);
  }
}

TEST_CASE("simulation exports") {
  SimulationConfig cfg;
  cfg.n_units = 8;
  cfg.replicates = 5;
  const auto rep = run_monte_carlo(cfg);
  std::ostringstream csv;
  write_simulation_long_csv(csv, {rep});
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "n_units,replicate,coefficient,method,se");
  int count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 5 * 2 * 3);

  const auto j = simulation_report_json(rep);
  CHECK(j["replicates"].size() == 5);
  CHECK(j["rows_per_replicate"] == 28);
  CHECK(j["summary"][1]["coefficient"] == "absdiff");
}
