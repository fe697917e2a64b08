#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "smc/asymptotics.hpp"
#include "smc/chain.hpp"
#include "smc/estimators.hpp"
#include "smc/kernel.hpp"
#include "smc/validation.hpp"

namespace smc {

/// Kernel spec document: {"states": [...], "k_max": n, "entries":
/// [{"from","to","k","p"}, ...]}; unlisted entries are zero. Validates on
/// load and throws ParseError / InvalidKernel with a field diagnostic.
SemiMarkovKernel load_kernel_json(std::istream& in, const std::string& origin = "<stream>");
SemiMarkovKernel load_kernel_file(const std::string& path);
void save_kernel_json(const SemiMarkovKernel& kernel, std::ostream& out);

/// Estimate dump: sparse q_hat triplets, dense psi/P arrays per lag, R over
/// the up-set, counts and visited flags.
void save_estimate_json(const EstimateBundle& bundle, std::ostream& out);

/// Exact solver output: chain summary, assumption report, psi, P and
/// optionally R evaluated at the true kernel.
struct ExactSolution {
  StateSpace states;
  int seq_horizon = 0;
  ChainSummary summary;
  AssumptionReport assumptions;
  MatrixSequence psi;
  MatrixSequence p;
  std::optional<ReliabilityEstimate> r;
};
ExactSolution solve_exact(const SemiMarkovKernel& kernel, int horizon,
                          const std::optional<PartitionUD>& partition);
void save_exact_json(const ExactSolution& sol, std::ostream& out);

/// Covariance document: index list plus row-major symmetric matrix, or just
/// the diagonal.
void save_covariance_json(const CovarianceTable& table, const StateSpace& states,
                          bool diagonal_only, std::ostream& out);

void save_validation_report_json(const ExperimentConfig& cfg, const ValidationReport& report,
                                 const StateSpace& states, std::ostream& out);
/// Flat per-replication deviations, one column per coordinate.
void save_deviations_csv(const ExperimentConfig& cfg, const ValidationReport& report,
                         const StateSpace& states, std::ostream& out);

void save_sweep_report_json(const SweepReport& report, std::ostream& out);

}  // namespace smc
