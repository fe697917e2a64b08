#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "smc/io_json.hpp"
#include "smc/validation.hpp"

using namespace smc;

namespace {

ExperimentConfig small_test_config() {
  ExperimentConfig cfg;
  cfg.kernel = oracles::two_state_test_kernel();
  cfg.i0 = 0;
  cfg.horizon_m = 400;
  cfg.replications = 200;
  cfg.seq_horizon = 5;
  cfg.seed = 11;
  cfg.coordinates = {{Target::kernel, 0, 1, 1},
                     {Target::kernel, 0, 1, 2},
                     {Target::renewal, 0, 0, 2}};
  return cfg;
}

}  // namespace

TEST_CASE("deterministic kernel: zero deviations, zero covariance, full coverage") {
  ExperimentConfig cfg;
  cfg.kernel = oracles::alternating_kernel();
  cfg.i0 = 0;
  cfg.horizon_m = 9;
  cfg.replications = 40;
  cfg.seq_horizon = 6;
  cfg.seed = 5;
  cfg.partition = PartitionUD::from_up_labels(cfg.kernel.states(), {"a"});
  cfg.coordinates = {{Target::kernel, 0, 1, 1},
                     {Target::renewal, 0, 0, 3},
                     {Target::distribution, 0, 1, 2},
                     {Target::reliability, 0, 0, 2}};
  const auto rep = run_clt_experiment(cfg);
  CHECK(rep.dropped == 0);
  CHECK(rep.periodic_warning);  // period 3
  for (double d : rep.deviations) CHECK(d == 0.0);
  for (const auto& cr : rep.coordinates) {
    CHECK(cr.emp_var == 0.0);
    CHECK(cr.theory_var == 0.0);
    CHECK(cr.coverage == 1.0);
    CHECK(cr.var_ok);
    CHECK(cr.coverage_ok);
  }
  for (const auto& b : rep.blocks) {
    for (double v : b.emp_cov) CHECK(v == 0.0);
    for (double v : b.theory_cov) CHECK(v == 0.0);
    CHECK(b.cov_ok);
  }
  CHECK(rep.all_ok);
}

TEST_CASE("experiment reports are deterministic and thread-count independent") {
  auto cfg = small_test_config();
  const auto r1 = run_clt_experiment(cfg);
  const auto r2 = run_clt_experiment(cfg);
  CHECK(r1.deviations == r2.deviations);
  CHECK(r1.kept == r2.kept);
  cfg.threads = 3;
  const auto r3 = run_clt_experiment(cfg);
  CHECK(r1.deviations == r3.deviations);
  for (std::size_t c = 0; c < r1.coordinates.size(); ++c) {
    CHECK(r1.coordinates[c].emp_var == r3.coordinates[c].emp_var);
    CHECK(r1.coordinates[c].coverage == r3.coordinates[c].coverage);
  }
}

TEST_CASE("no replications are dropped for healthy horizons") {
  auto cfg = small_test_config();
  cfg.horizon_m = 100;
  const auto rep = run_clt_experiment(cfg);
  CHECK(rep.dropped == 0);
  CHECK(rep.kept == cfg.replications);
}

TEST_CASE("desk-scale experiment lands near the theoretical variance") {
  auto cfg = small_test_config();
  cfg.horizon_m = 2000;
  cfg.replications = 400;
  cfg.tol.var_rel = 0.25;  // smoke scale, wide band
  const auto rep = run_clt_experiment(cfg);
  CHECK(rep.coordinates[0].theory_var == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(std::abs(rep.coordinates[0].emp_var - 0.625) < 0.25 * 0.625);
  // replication-mean CLT bound: |mean| < 3 sqrt(V/R)
  CHECK(std::abs(rep.coordinates[0].mean_dev) <
        3.0 * std::sqrt(0.625 / rep.kept) + 3.0 / std::sqrt(cfg.horizon_m));
}

TEST_CASE("coverage at a lax level stays inside the binomial band") {
  auto cfg = small_test_config();
  cfg.horizon_m = 1000;
  cfg.replications = 500;
  cfg.coordinates = {{Target::kernel, 0, 1, 1}};
  const auto rates = run_coverage(cfg, 0.5);
  REQUIRE(rates.size() == 1);
  CHECK(rates[0] > 0.5 - 0.08);
  CHECK(rates[0] < 0.5 + 0.08);
}

TEST_CASE("three-state tables match Monte Carlo variances") {
  // guards the cross-state coupling in the table assembly; the two-state
  // acceptance kernel alone cannot see it
  ExperimentConfig cfg;
  cfg.kernel = oracles::random_kernel(424242, 3, 2);
  cfg.i0 = 0;
  cfg.horizon_m = 4000;
  cfg.replications = 1500;
  cfg.seq_horizon = 4;
  cfg.seed = 31337;
  cfg.partition = PartitionUD{{0, 1}, {2}};
  cfg.coordinates = {{Target::kernel, 0, 1, 1},
                     {Target::renewal, 0, 1, 3},
                     {Target::renewal, 2, 0, 2},
                     {Target::distribution, 0, 2, 3},
                     {Target::distribution, 1, 1, 4},
                     {Target::reliability, 0, 0, 2},
                     {Target::reliability, 1, 0, 3}};
  const auto rep = run_clt_experiment(cfg);
  CHECK(rep.dropped == 0);
  for (const auto& cr : rep.coordinates) {
    INFO("target ", target_name(cr.coord.target), " i=", cr.coord.i, " j=", cr.coord.j,
         " k=", cr.coord.k, " emp=", cr.emp_var, " theory=", cr.theory_var);
    REQUIRE(cr.theory_var > 1e-4);  // coordinates chosen to be genuinely random
    CHECK(std::abs(cr.emp_var - cr.theory_var) < 0.20 * cr.theory_var);
  }
}

TEST_CASE("consistency sweep medians decrease") {
  ExperimentConfig cfg;
  cfg.kernel = oracles::two_state_test_kernel();
  cfg.i0 = 0;
  cfg.seq_horizon = 5;
  cfg.seed = 77;
  cfg.partition = PartitionUD::from_up_labels(cfg.kernel.states(), {"a"});
  const auto rep = run_consistency_sweep(cfg, {300, 3000, 30000}, 7);
  REQUIRE(rep.points.size() == 3);
  for (const auto& [name, dec] : rep.strictly_decreasing) {
    INFO("target ", name);
    CHECK(dec);
  }
  // deterministic kernel: error zero from one full cycle on
  ExperimentConfig det;
  det.kernel = oracles::alternating_kernel();
  det.i0 = 0;
  det.seq_horizon = 6;
  det.seed = 3;
  const auto drep = run_consistency_sweep(det, {3, 9, 27}, 3);
  for (const auto& p : drep.points) {
    CHECK(p.median_sup_error.at("q") == 0.0);
    CHECK(p.median_sup_error.at("psi") == 0.0);
    CHECK(p.median_sup_error.at("P") == 0.0);
  }
}

TEST_CASE("validation report serializes and mentions every coordinate") {
  auto cfg = small_test_config();
  cfg.replications = 40;
  const auto rep = run_clt_experiment(cfg);
  std::stringstream json_out, csv_out;
  save_validation_report_json(cfg, rep, cfg.kernel.states(), json_out);
  save_deviations_csv(cfg, rep, cfg.kernel.states(), csv_out);
  const std::string doc = json_out.str();
  CHECK(doc.find("\"emp_var\"") != std::string::npos);
  CHECK(doc.find("\"theory_var\"") != std::string::npos);
  std::string header;
  std::getline(csv_out, header);
  CHECK(header == "rep,q:a:b:1,q:a:b:2,psi:a:a:2");
  int lines = 0;
  std::string line;
  while (std::getline(csv_out, line)) ++lines;
  CHECK(lines == rep.kept);
}

TEST_CASE("experiment rejects reducible kernels and empty coordinate lists") {
  ExperimentConfig cfg = small_test_config();
  cfg.kernel = oracles::block_diagonal_kernel();
  CHECK_THROWS_AS(run_clt_experiment(cfg), NotIrreducible);
  cfg = small_test_config();
  cfg.coordinates.clear();
  CHECK_THROWS_AS(run_clt_experiment(cfg), Error);
}
