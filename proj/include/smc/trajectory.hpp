#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "smc/state_space.hpp"

namespace smc {

/// One sampled Markov renewal path up to horizon M: jump states J_n, sojourns
/// X_n >= 1 and cumulative times S_n = S_{n-1} + X_n <= M. The (discarded)
/// first jump that would have crossed M is kept as a diagnostic; it is not
/// part of the path and not serialized.
struct Trajectory {
  StateSpace states;
  int initial = 0;  // J_0
  std::vector<int> jump_state;      // J_1..J_N
  std::vector<long long> sojourn;   // X_1..X_N
  std::vector<long long> cum_time;  // S_1..S_N
  long long horizon = 0;            // M
  std::optional<long long> discarded_sojourn;

  long long jumps() const { return static_cast<long long>(jump_state.size()); }
};

struct JumpCounts {
  long long total = 0;                 // N(M)
  std::vector<long long> per_state;    // N_i(M), visits of J_{n-1}
};

/// Exact jump counts: N_i(M) counts departures from i, N = sum_i N_i.
JumpCounts counts(const Trajectory& t);

/// State occupied at time k: Z_k = J_{N(k)} with N(k) = max{n : S_n <= k}.
/// Throws TimeBeyondHorizon for k > M.
int semi_markov_state(const Trajectory& t, long long k);

/// CSV round-trip, header "n,state,sojourn,cumtime"; row 0 is the initial
/// state with sojourn 0. The horizon is not part of the file; the loader
/// takes it explicitly (default: the last cumulative time).
void save_trajectory_csv(const Trajectory& t, std::ostream& out);
Trajectory load_trajectory_csv(std::istream& in, std::optional<long long> horizon = {});

}  // namespace smc
