#pragma once

#include <vector>

#include "smc/kernel.hpp"

namespace smc {

/// Stationary summary of the chain behind a kernel:
///   nu           invariant probability of the embedded jump chain,
///   mean_sojourn E_i X_1 = sum_j sum_k k q_ij(k),
///   m_bar        sum_i nu_i E_i X_1,
///   mu           mean recurrence time of each state, mu_ii = m_bar / nu_i.
/// The identity m_bar = mu_ii * nu_i holds for every state by construction.
struct ChainSummary {
  std::vector<double> nu;
  std::vector<double> mean_sojourn;
  double m_bar = 0.0;
  std::vector<double> mu;
};

struct AssumptionReport {
  bool irreducible = false;
  bool aperiodic = false;
  bool positive_recurrent = false;
  /// Aperiodicity is decided from return-time supports observed up to this
  /// lag; a period longer than k_checked would go unnoticed.
  int k_checked = 0;
};

/// Embedded jump-chain transition matrix q^J_ij = sum_k q_ij(k), row-major.
std::vector<double> embedded_matrix(const SemiMarkovKernel& kernel);

/// Solves nu q^J = nu (normalization row replacement, pivoted elimination)
/// and derives the sojourn/recurrence summary. Throws NotIrreducible when the
/// embedded chain is reducible.
ChainSummary summarize(const SemiMarkovKernel& kernel);

/// Irreducibility via reachability closure of the support graph; aperiodicity
/// via the gcd of diagonal supports of the convolution powers up to
/// k_checked = 4 * |E| * k_max (boolean support arithmetic, no magnitudes).
/// Positive recurrence is automatic for a finite irreducible chain with
/// bounded sojourns and is reported accordingly.
AssumptionReport check_assumptions(const SemiMarkovKernel& kernel);

}  // namespace smc
