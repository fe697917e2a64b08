#pragma once

#include <string>
#include <vector>

#include "smc/matrix_seq.hpp"
#include "smc/state_space.hpp"

namespace smc {

/// Discrete-time semi-Markov kernel q_ij(k): the probability that from state
/// i the next jump lands in j after a sojourn of exactly k steps. Support is
/// truncated at k_max; entries beyond are exactly zero by construction.
///
/// Invariants (checked by validate / on load):
///   q_ij(0) = 0,  all entries in [0,1],  sum_j sum_k q_ij(k) = 1 per row.
class SemiMarkovKernel {
 public:
  SemiMarkovKernel() = default;
  SemiMarkovKernel(StateSpace states, MatrixSequence q);

  const StateSpace& states() const { return states_; }
  int size() const { return states_.size(); }
  int k_max() const { return q_.horizon(); }
  const MatrixSequence& q() const { return q_; }

  double operator()(int i, int j, int k) const { return q_.at_ext(i, j, k); }

  /// Throws InvalidKernel on any invariant violation (tolerance 1e-12 on row
  /// masses).
  void validate() const;

 private:
  StateSpace states_;
  MatrixSequence q_;
};

struct KernelEntry {
  std::string from;
  std::string to;
  int k = 0;
  double p = 0.0;
};

/// Convenience builder from sparse entries; unlisted entries are zero.
SemiMarkovKernel make_kernel(std::vector<std::string> labels, int k_max,
                             const std::vector<KernelEntry>& entries);

}  // namespace smc
