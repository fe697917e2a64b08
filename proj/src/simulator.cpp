#include "smc/simulator.hpp"

#include <algorithm>

#include "smc/rng.hpp"

namespace smc {

namespace {

// Flattened row law: destination/sojourn pairs in (j, k) order with their
// cumulative probabilities, for inverse-CDF sampling.
struct RowSampler {
  std::vector<int> to;
  std::vector<long long> sojourn;
  std::vector<double> cum;

  int pick(double u) const {
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;  // guard the u ~ 1 edge against rounding
    return static_cast<int>(it - cum.begin());
  }
};

std::vector<RowSampler> build_samplers(const SemiMarkovKernel& kernel) {
  const int n = kernel.size();
  std::vector<RowSampler> rows(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 1; k <= kernel.k_max(); ++k) {
        const double p = kernel(i, j, k);
        if (p <= 0.0) continue;
        acc += p;
        rows[i].to.push_back(j);
        rows[i].sojourn.push_back(k);
        rows[i].cum.push_back(acc);
      }
    }
    if (!rows[i].cum.empty()) rows[i].cum.back() = 1.0;
  }
  return rows;
}

}  // namespace

Trajectory simulate(const SemiMarkovKernel& kernel, int i0, long long horizon,
                    std::uint64_t seed) {
  if (i0 < 0 || i0 >= kernel.size()) {
    throw Error("initial state index " + std::to_string(i0) + " out of range");
  }
  if (horizon < 0) throw Error("horizon must be >= 0");

  const auto rows = build_samplers(kernel);
  SplitMix64 rng(seed);

  Trajectory t;
  t.states = kernel.states();
  t.initial = i0;
  t.horizon = horizon;

  int cur = i0;
  long long now = 0;
  while (true) {
    const RowSampler& row = rows[cur];
    const int pick = row.pick(rng.next_unit());
    const long long x = row.sojourn[pick];
    if (now + x > horizon) {
      t.discarded_sojourn = x;
      break;
    }
    now += x;
    cur = row.to[pick];
    t.jump_state.push_back(cur);
    t.sojourn.push_back(x);
    t.cum_time.push_back(now);
  }
  return t;
}

}  // namespace smc
