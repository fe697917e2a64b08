#include "smc/estimators.hpp"

#include <algorithm>
#include <string>

namespace smc {

bool KernelEstimate::all_visited() const {
  return std::all_of(visited.begin(), visited.end(), [](bool v) { return v; });
}

int default_seq_horizon(int n_states, int k_max) { return 2 * n_states * k_max; }

KernelEstimate estimate_kernel(const Trajectory& t) {
  if (t.jumps() == 0) throw EmptyTrajectory("no jumps observed; cannot estimate");
  const int n = t.states.size();
  const long long max_x = *std::max_element(t.sojourn.begin(), t.sojourn.end());

  KernelEstimate est;
  est.states = t.states;
  est.horizon_m = t.horizon;
  est.q = MatrixSequence(n, static_cast<int>(std::max<long long>(max_x, 1)));
  est.counts = counts(t);
  est.visited.assign(n, false);

  int prev = t.initial;
  for (long long m = 0; m < t.jumps(); ++m) {
    est.q.at(prev, t.jump_state[m], static_cast<int>(t.sojourn[m])) += 1.0;
    prev = t.jump_state[m];
  }
  for (int i = 0; i < n; ++i) {
    const long long ni = est.counts.per_state[i];
    if (ni == 0) continue;  // row stays zero, flagged below
    est.visited[i] = true;
    for (int j = 0; j < n; ++j) {
      for (int k = 1; k <= est.q.horizon(); ++k) {
        est.q.at(i, j, k) /= static_cast<double>(ni);
      }
    }
  }
  return est;
}

MatrixSequence estimate_psi(const MatrixSequence& q_hat, int horizon) {
  return conv_inverse_of_delta_minus(q_hat, horizon);
}

namespace {

std::string first_unvisited(const KernelEstimate& est, const std::vector<int>* subset) {
  if (subset == nullptr) {
    for (int i = 0; i < est.states.size(); ++i) {
      if (!est.visited[i]) return est.states.label(i);
    }
  } else {
    for (int i : *subset) {
      if (!est.visited[i]) return est.states.label(i);
    }
  }
  return {};
}

}  // namespace

MatrixSequence estimate_distribution(const KernelEstimate& est, const MatrixSequence& psi_hat,
                                     int horizon) {
  if (auto miss = first_unvisited(est, nullptr); !miss.empty()) {
    throw UnvisitedState("state '" + miss + "' never departed from; row mass undefined");
  }
  const auto sq = survival(est.q, std::vector<double>(est.states.size(), 1.0), horizon);
  return convolve(psi_hat, sq, horizon);
}

ReliabilityEstimate estimate_reliability(const KernelEstimate& est, const PartitionUD& partition,
                                         int horizon) {
  if (partition.up.empty()) throw EmptySubset("partition up-set is empty");
  if (partition.down.empty()) throw EmptySubset("partition down-set is empty");
  if (auto miss = first_unvisited(est, &partition.up); !miss.empty()) {
    throw UnvisitedState("up-state '" + miss + "' never departed from");
  }
  // Restriction first, inversion second; the order matters.
  const auto q_uu = restrict_to(est.q, partition.up);
  const auto psi_uu = conv_inverse_of_delta_minus(q_uu, horizon);
  // Row masses: exactly 1 for visited rows, 0 for flagged-empty rows. Down
  // rows only contribute diagonal entries we discard after the restriction.
  std::vector<double> mass(est.states.size(), 0.0);
  for (int i = 0; i < est.states.size(); ++i) mass[i] = est.visited[i] ? 1.0 : 0.0;
  const auto sq = survival(est.q, mass, horizon);
  ReliabilityEstimate rel;
  rel.partition = partition;
  rel.values = convolve_mv(psi_uu, diag_restrict(sq, partition.up), horizon);
  return rel;
}

EstimateBundle estimate_bundle(const Trajectory& t, int horizon,
                               const std::optional<PartitionUD>& partition) {
  EstimateBundle b;
  b.seq_horizon = horizon;
  b.kernel = estimate_kernel(t);
  b.psi = estimate_psi(b.kernel.q, horizon);
  b.p = estimate_distribution(b.kernel, b.psi, horizon);
  if (partition) b.r = estimate_reliability(b.kernel, *partition, horizon);
  return b;
}

}  // namespace smc
