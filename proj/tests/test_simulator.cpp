#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "smc/chain.hpp"
#include "smc/simulator.hpp"

using namespace smc;

TEST_CASE("deterministic kernel unrolls by hand") {
  const auto alt = oracles::alternating_kernel();
  const auto t = simulate(alt, 0, 7, 123);
  REQUIRE(t.jumps() == 5);
  const std::vector<int> states{1, 0, 1, 0, 1};
  const std::vector<long long> cums{1, 3, 4, 6, 7};
  for (int n = 0; n < 5; ++n) {
    CHECK(t.jump_state[n] == states[n]);
    CHECK(t.cum_time[n] == cums[n]);
  }
  // the next sojourn would have crossed the horizon
  REQUIRE(t.discarded_sojourn.has_value());
  CHECK(t.cum_time.back() + *t.discarded_sojourn > t.horizon);
}

TEST_CASE("zero horizon yields an empty jump list") {
  const auto t = simulate(oracles::two_state_test_kernel(), 0, 0, 9);
  CHECK(t.jumps() == 0);
  CHECK(counts(t).total == 0);
}

TEST_CASE("a jump landing exactly on the horizon counts") {
  const auto t = simulate(oracles::alternating_kernel(), 0, 1, 5);
  REQUIRE(t.jumps() == 1);
  CHECK(t.cum_time[0] == 1);
}

TEST_CASE("jump counts from the hand-unrolled path") {
  const auto t = simulate(oracles::alternating_kernel(), 0, 7, 1);
  const auto c = counts(t);
  CHECK(c.total == 5);
  CHECK(c.per_state[0] == 3);
  CHECK(c.per_state[1] == 2);

  const auto t1 = simulate(oracles::alternating_kernel(), 0, 1, 1);
  const auto c1 = counts(t1);
  CHECK(c1.total == 1);
  CHECK(c1.per_state[0] == 1);
  CHECK(c1.per_state[1] == 0);
}

TEST_CASE("counts sum to the jump total for random paths") {
  const auto kernel = oracles::random_kernel(31, 3, 4);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = simulate(kernel, 1, 500, seed);
    const auto c = counts(t);
    long long sum = 0;
    for (long long x : c.per_state) sum += x;
    CHECK(sum == c.total);
    CHECK(c.total == t.jumps());
    for (long long n = 0; n < t.jumps(); ++n) CHECK(t.cum_time[n] <= t.horizon);
  }
}

TEST_CASE("occupied state by time") {
  const auto t = simulate(oracles::alternating_kernel(), 0, 7, 2);
  CHECK(semi_markov_state(t, 0) == 0);  // Z_0 = J_0
  CHECK(semi_markov_state(t, 1) == 1);
  CHECK(semi_markov_state(t, 2) == 1);
  CHECK(semi_markov_state(t, 3) == 0);
  CHECK(semi_markov_state(t, 7) == 1);
  CHECK_THROWS_AS(semi_markov_state(t, 8), TimeBeyondHorizon);
}

TEST_CASE("identical seeds reproduce the trajectory bit for bit") {
  const auto kernel = oracles::two_state_test_kernel();
  const auto t1 = simulate(kernel, 0, 2000, 987654321);
  const auto t2 = simulate(kernel, 0, 2000, 987654321);
  CHECK(t1.jump_state == t2.jump_state);
  CHECK(t1.sojourn == t2.sojourn);
  CHECK(t1.cum_time == t2.cum_time);
  const auto t3 = simulate(kernel, 0, 2000, 987654322);
  CHECK(t1.sojourn != t3.sojourn);  // astronomically unlikely to collide
}

TEST_CASE("visit frequencies converge to the recurrence rates") {
  const auto kernel = oracles::two_state_test_kernel();
  const auto s = summarize(kernel);
  const long long m = 100000;
  const auto t = simulate(kernel, 0, m, 20240811);
  const auto c = counts(t);
  for (int i = 0; i < 2; ++i) {
    const double rate = static_cast<double>(c.per_state[i]) / static_cast<double>(m);
    CHECK(std::abs(rate - 1.0 / s.mu[i]) < 0.02);
  }
}

TEST_CASE("trajectory CSV round-trips") {
  const auto kernel = oracles::two_state_test_kernel();
  const auto t = simulate(kernel, 0, 300, 5);
  std::stringstream buf;
  save_trajectory_csv(t, buf);
  const auto back = load_trajectory_csv(buf, t.horizon);
  CHECK(back.initial == t.initial);
  CHECK(back.jump_state == t.jump_state);
  CHECK(back.sojourn == t.sojourn);
  CHECK(back.cum_time == t.cum_time);
  CHECK(back.horizon == t.horizon);
}

TEST_CASE("trajectory CSV rejects malformed input") {
  {
    std::stringstream buf("nope\n");
    CHECK_THROWS_AS(load_trajectory_csv(buf), ParseError);
  }
  {
    std::stringstream buf("n,state,sojourn,cumtime\n0,a,0,0\n1,b,2,1\n");
    CHECK_THROWS_AS(load_trajectory_csv(buf), ParseError);  // cumtime mismatch
  }
  {
    std::stringstream buf("n,state,sojourn,cumtime\n0,a,1,0\n");
    CHECK_THROWS_AS(load_trajectory_csv(buf), ParseError);  // initial sojourn
  }
  {
    std::stringstream buf("n,state,sojourn,cumtime\n0,a,0,0\n1,b,x,1\n");
    CHECK_THROWS_AS(load_trajectory_csv(buf), ParseError);  // non-numeric
  }
}
