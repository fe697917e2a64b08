#pragma once

#include <optional>
#include <vector>

#include "smc/kernel.hpp"
#include "smc/matrix_seq.hpp"
#include "smc/seq_ops.hpp"
#include "smc/trajectory.hpp"

namespace smc {

/// Empirical kernel built from one trajectory:
///   q_hat_ij(k) = #{n <= N : J_{n-1}=i, J_n=j, X_n=k} / N_i.
/// Rows of states never departed from are flagged unvisited and left zero;
/// downstream operations that need full rows raise UnvisitedState.
struct KernelEstimate {
  StateSpace states;
  MatrixSequence q;               // horizon = largest observed sojourn
  std::vector<bool> visited;      // per state: departed at least once
  JumpCounts counts;
  long long horizon_m = 0;

  bool all_visited() const;
};

struct ReliabilityEstimate {
  PartitionUD partition;
  VectorSequence values;  // R_hat_i(k) for i in U
};

/// q_hat, psi_hat, P_hat (and R_hat when a partition is given) from a single
/// path, all on the same output horizon.
struct EstimateBundle {
  KernelEstimate kernel;
  MatrixSequence psi;
  std::optional<MatrixSequence> p;
  std::optional<ReliabilityEstimate> r;
  int seq_horizon = 0;
};

/// Throws EmptyTrajectory when the path has no jumps.
KernelEstimate estimate_kernel(const Trajectory& t);

/// psi_hat = (deltaI - q_hat)^(-1) under convolution; requires q_hat(0) = 0.
MatrixSequence estimate_psi(const MatrixSequence& q_hat, int horizon);

/// P_hat = psi_hat * S q_hat. Requires every state visited (unit row masses);
/// rows of the result are probability vectors up to accumulated rounding.
MatrixSequence estimate_distribution(const KernelEstimate& est, const MatrixSequence& psi_hat,
                                     int horizon);

/// R_hat = psi_hat_UU * (S q_hat)_U. Requires every state of U visited. The
/// restriction happens before the inversion; restricting psi_hat afterwards
/// would be a different (wrong) object.
ReliabilityEstimate estimate_reliability(const KernelEstimate& est, const PartitionUD& partition,
                                         int horizon);

/// Default output horizon: 2 * |E| * k_max, enough room for the renewal
/// sequences to mix past the kernel support.
int default_seq_horizon(int n_states, int k_max);

/// Full pipeline over one trajectory: kernel, psi, distribution, and the
/// reliability estimate when a partition is given. Propagates UnvisitedState.
EstimateBundle estimate_bundle(const Trajectory& t, int horizon,
                               const std::optional<PartitionUD>& partition);

}  // namespace smc
