#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smc/asymptotics.hpp"
#include "smc/kernel.hpp"

namespace smc {

/// Coordinate of an estimator to track: (i,j,k) for q/psi/P, (i,k) for R
/// (j is ignored there).
struct Coordinate {
  Target target = Target::kernel;
  int i = 0;
  int j = 0;
  int k = 0;
};

struct Tolerances {
  double var_rel = 0.10;        // empirical variance vs table diagonal
  double cov_abs = 0.0625;      // off-diagonal absolute tolerance
  double skew_abs = 0.15;
  double ex_kurt_abs = 0.30;
  double coverage_lo = 0.93;
  double coverage_hi = 0.97;
};

struct ExperimentConfig {
  SemiMarkovKernel kernel;
  int i0 = 0;
  long long horizon_m = 5000;
  int replications = 2000;
  int seq_horizon = 5;
  std::vector<Coordinate> coordinates;
  std::optional<PartitionUD> partition;
  std::uint64_t seed = 1;
  double level = 0.95;
  int threads = 0;  // 0 = library default
  Tolerances tol;
};

struct CoordinateReport {
  Coordinate coord;
  double truth = 0.0;          // true value of the estimated quantity
  double mean_dev = 0.0;       // mean of sqrt(M)(theta_hat - theta)
  double emp_var = 0.0;
  double theory_var = 0.0;
  double skewness = 0.0;       // of the standardized deviations
  double ex_kurtosis = 0.0;
  double coverage = 0.0;       // plug-in CI coverage at the configured level
  bool var_ok = false;
  bool moments_ok = false;
  bool coverage_ok = false;
};

/// Per-target block: empirical vs theoretical covariance over that target's
/// coordinates, row-major, in coordinate order.
struct TargetBlock {
  Target target = Target::kernel;
  std::vector<int> coord_pos;  // positions into ExperimentConfig::coordinates
  std::vector<double> emp_cov;
  std::vector<double> theory_cov;
  double max_abs_dev = 0.0;
  double max_rel_dev = 0.0;
  bool cov_ok = false;
};

struct ValidationReport {
  int requested = 0;
  int kept = 0;
  int dropped = 0;
  bool periodic_warning = false;
  std::vector<CoordinateReport> coordinates;
  std::vector<TargetBlock> blocks;
  /// Deviations per kept replication, row-major over coordinates; exported as
  /// the flat CSV for external plotting.
  std::vector<int> kept_reps;
  std::vector<double> deviations;
  bool all_ok = false;
};

/// Simulates `replications` independent paths with deterministic child seeds,
/// forms sqrt(M)-scaled deviations at the configured coordinates, and
/// compares empirical moments and covariances with the theoretical tables.
/// Replications whose estimators lack data are dropped and counted.
ValidationReport run_clt_experiment(const ExperimentConfig& cfg);

struct SweepPoint {
  long long horizon_m = 0;
  /// Median (over seeds) sup-error per target, order: q, psi, P, R (R only
  /// when a partition is configured).
  std::map<std::string, double> median_sup_error;
};

struct SweepReport {
  std::vector<SweepPoint> points;
  std::map<std::string, bool> strictly_decreasing;
};

/// Consistency sweep over an increasing horizon list; `seeds` replications
/// per horizon, medians of sup-errors.
SweepReport run_consistency_sweep(const ExperimentConfig& cfg,
                                  const std::vector<long long>& horizons, int seeds);

/// Coverage rates of the plug-in confidence intervals per coordinate.
std::vector<double> run_coverage(const ExperimentConfig& cfg, double level);

const char* target_name(Target t);
Target target_from_name(const std::string& name);

}  // namespace smc
