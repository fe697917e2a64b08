#pragma once

#include <utility>
#include <vector>

#include "smc/chain.hpp"
#include "smc/estimators.hpp"
#include "smc/kernel.hpp"
#include "smc/state_space.hpp"

namespace smc {

enum class Target { kernel, renewal, distribution, reliability };

/// Truncated asymptotic covariance matrix of sqrt(M)-scaled estimator
/// deviations. Indexed by (i,j,k) triples for kernel/renewal/distribution
/// targets and by (i,k) pairs over the up-set for the reliability target.
/// Index layout is fixed: triples flatten as ((i*dim)+j)*(horizon+1)+k,
/// pairs as u*(horizon+1)+k with u the position inside `up`.
class CovarianceTable {
 public:
  CovarianceTable() = default;
  CovarianceTable(Target target, int dim, int horizon, std::vector<int> up = {});

  Target target() const { return target_; }
  int dim() const { return dim_; }
  int horizon() const { return horizon_; }
  const std::vector<int>& up() const { return up_; }

  int size() const { return n_; }
  double& entry(int a, int b) { return m_[static_cast<std::size_t>(a) * n_ + b]; }
  double entry(int a, int b) const { return m_[static_cast<std::size_t>(a) * n_ + b]; }

  int flat(int i, int j, int k) const { return (i * dim_ + j) * (horizon_ + 1) + k; }
  int flat_up(int u, int k) const { return u * (horizon_ + 1) + k; }

  const std::vector<double>& data() const { return m_; }
  std::vector<double>& data() { return m_; }

 private:
  Target target_ = Target::kernel;
  int dim_ = 0;
  int horizon_ = -1;
  std::vector<int> up_;
  int n_ = 0;
  std::vector<double> m_;
};

// ---------------------------------------------------------------------------
// Covariance tables, assembled from the generic sequence operations. Each
// table groups its accumulation per source row, so a deterministic kernel
// (all entries 0 or 1) cancels to exact floating-point zeros.
// ---------------------------------------------------------------------------

/// V^q: block-diagonal across departure states,
///   V_{(i,j,k),(i',j',k')} = mu_ii 1{i=i'} q_ij(k) (1{j=j',k=k'} - q_i'j'(k')).
CovarianceTable cov_kernel(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                           int horizon, Exec exec = Exec::parallel);

/// V^psi: weighted tensor squares of psi * delta^e * psi over unit sequences
/// e, minus the per-row mean terms psi * q^i * psi.
CovarianceTable cov_renewal(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                            int horizon, Exec exec = Exec::parallel);

/// V^P: same structure with inner sequences
///   psi * delta^e * psi * Sq + psi * S delta^e.
CovarianceTable cov_distribution(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                                 int horizon, Exec exec = Exec::parallel);

/// V^R over U x [0,K]: the up-restricted analogue plus the extra square sum
/// over jumps from U into D.
CovarianceTable cov_reliability(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                                const PartitionUD& partition, int horizon,
                                Exec exec = Exec::parallel);

// ---------------------------------------------------------------------------
// One-dimensional variances, implemented independently of the tables (scalar
// sequence arithmetic, no shared tensor code). The table diagonals must agree
// with these; that cross-check is part of the test suite.
// ---------------------------------------------------------------------------

/// v^q(i,j,k) = mu_ii q_ij(k) (1 - q_ij(k)).
double var_kernel_1d(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                     int i, int j, int k);

double var_renewal_1d(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                      int i, int j, int k, int horizon);

double var_distribution_1d(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                           int i, int j, int k, int horizon);

double var_reliability_1d(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                          const PartitionUD& partition, int i_up, int k, int horizon);

// ---------------------------------------------------------------------------
// Plug-in evaluation and confidence intervals.
// ---------------------------------------------------------------------------

/// Summary evaluated at estimated quantities: mu_ii <- M / N_i,
/// nu_i <- N_i / N, m_bar <- M / N. Throws UnvisitedState if a state was
/// never departed from.
ChainSummary plug_in_summary(const KernelEstimate& est);

/// Kernel view of an estimate (for feeding the covariance builders). Requires
/// all states visited so that rows are proper distributions.
SemiMarkovKernel plug_in_kernel(const KernelEstimate& est);

/// Covariance table with q replaced by q_hat and mu_ii by M / N_i(M).
CovarianceTable plug_in(Target target, const KernelEstimate& est, int horizon,
                        const std::optional<PartitionUD>& partition = {},
                        Exec exec = Exec::parallel);

/// Standard normal quantile, rational approximation plus one Halley
/// refinement; absolute error well below 1e-8 on (0,1).
double normal_quantile(double p);

/// estimate +- z_{(1+level)/2} sqrt(variance / M). Throws BadLevel unless
/// 0 < level < 1, and on negative variance.
std::pair<double, double> confidence_interval(double estimate, double variance,
                                              long long horizon_m, double level);

}  // namespace smc
