#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "smc/rng.hpp"
#include "smc/seq_ops.hpp"

using namespace smc;

namespace {

MatrixSequence random_seq(std::uint64_t seed, int dim, int horizon, bool zero_at_origin) {
  SplitMix64 rng(seed);
  MatrixSequence a(dim, horizon);
  for (int k = zero_at_origin ? 1 : 0; k <= horizon; ++k) {
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) a.at(i, j, k) = rng.next_unit() - 0.3;
    }
  }
  return a;
}

double max_abs_diff(const MatrixSequence& a, const MatrixSequence& b) {
  double m = 0.0;
  for (std::size_t t = 0; t < a.data().size(); ++t) {
    m = std::max(m, std::abs(a.data()[t] - b.data()[t]));
  }
  return m;
}

}  // namespace

TEST_CASE("delta identity is a two-sided convolution unit") {
  const auto a = random_seq(11, 3, 9, false);
  const auto d = MatrixSequence::delta_identity(3, 9);
  CHECK(max_abs_diff(convolve(a, d, 9), a) == 0.0);
  CHECK(max_abs_diff(convolve(d, a, 9), a) == 0.0);
}

TEST_CASE("two-jump convolution of the alternating kernel") {
  const auto alt = oracles::alternating_kernel();
  const auto qq = convolve(alt.q(), alt.q(), 6);
  CHECK(qq.at(0, 0, 3) == 1.0);  // a -> b at 1, back after 2
  for (int k = 0; k <= 2; ++k) {
    CHECK(qq.at(0, 0, k) == 0.0);
    CHECK(qq.at(0, 1, k) == 0.0);
  }
}

TEST_CASE("scalar sequences reduce to ordinary convolution") {
  MatrixSequence a(1, 4);
  a.at(0, 0, 1) = 1.0;  // [0,1,0,0,0]
  const auto c = convolve(a, a, 4);
  CHECK(c.at(0, 0, 0) == 0.0);
  CHECK(c.at(0, 0, 1) == 0.0);
  CHECK(c.at(0, 0, 2) == 1.0);
  CHECK(c.at(0, 0, 3) == 0.0);
}

TEST_CASE("convolution is associative") {
  for (std::uint64_t seed = 40; seed < 46; ++seed) {
    const auto a = random_seq(seed, 3, 8, false);
    const auto b = random_seq(seed + 1000, 3, 8, false);
    const auto c = random_seq(seed + 2000, 3, 8, false);
    const auto left = convolve(convolve(a, b, 8), c, 8);
    const auto right = convolve(a, convolve(b, c, 8), 8);
    CHECK(max_abs_diff(left, right) < 1e-12);
  }
}

TEST_CASE("convolution rejects mismatched dimensions") {
  CHECK_THROWS_AS(convolve(MatrixSequence(2, 3), MatrixSequence(3, 3), 3), DimensionMismatch);
}

TEST_CASE("n_fold base cases") {
  const auto a = random_seq(5, 2, 6, true);
  CHECK(max_abs_diff(n_fold(a, 0, 6), MatrixSequence::delta_identity(2, 6)) == 0.0);
  CHECK(max_abs_diff(n_fold(a, 1, 6), a) == 0.0);
}

TEST_CASE("n_fold of the alternating kernel enumerates two-jump paths") {
  const auto alt = oracles::alternating_kernel();
  const auto q2 = n_fold(alt.q(), 2, 3);
  CHECK(q2.at(0, 0, 3) == 1.0);  // a -> b at 1, back at 3
  CHECK(q2.at(1, 1, 3) == 1.0);  // b -> a at 2, back at 3
  // nothing else is reachable from a in exactly two jumps within 3 steps
  double other = 0.0;
  for (int j = 0; j < 2; ++j) {
    for (int k = 0; k <= 3; ++k) {
      if (!(j == 0 && k == 3)) other += std::abs(q2.at(0, j, k));
    }
  }
  CHECK(other == 0.0);
}

TEST_CASE("convolution powers vanish beyond the lag") {
  const auto kernel = oracles::random_kernel(77, 3, 3);
  for (int n = 0; n <= 6; ++n) {
    const auto qn = n_fold(kernel.q(), n, 6);
    for (int k = 0; k < n && k <= 6; ++k) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) CHECK(qn.at(i, j, k) == 0.0);
      }
    }
  }
}

TEST_CASE("renewal inverse: zero sequence gives the identity") {
  MatrixSequence zero(3, 5);
  CHECK(max_abs_diff(conv_inverse_of_delta_minus(zero, 5),
                     MatrixSequence::delta_identity(3, 5)) == 0.0);
}

TEST_CASE("renewal inverse of the alternating kernel has period-3 support") {
  const auto alt = oracles::alternating_kernel();
  const auto psi = conv_inverse_of_delta_minus(alt.q(), 9);
  for (int k = 0; k <= 9; ++k) {
    CHECK(psi.at(0, 0, k) == ((k % 3 == 0) ? 1.0 : 0.0));
    CHECK(psi.at(0, 1, k) == ((k % 3 == 1) ? 1.0 : 0.0));
  }
}

TEST_CASE("renewal inverse matches the Neumann sum and solves both renewal equations") {
  for (std::uint64_t seed = 50; seed < 60; ++seed) {
    const auto kernel = oracles::random_kernel(seed, 3, 4);
    const int K = 12;
    const auto& q = kernel.q();
    const auto psi = conv_inverse_of_delta_minus(q, K);
    CHECK(max_abs_diff(psi, oracles::neumann_inverse(q, K)) < 1e-12);

    // (deltaI - q) * psi = deltaI, both sides
    const auto d = MatrixSequence::delta_identity(3, K);
    MatrixSequence dmq = d;
    for (int k = 0; k <= std::min(K, q.horizon()); ++k) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) dmq.at(i, j, k) -= q.at(i, j, k);
      }
    }
    CHECK(max_abs_diff(convolve(dmq, psi, K), d) < 1e-12);
    CHECK(max_abs_diff(convolve(psi, dmq, K), d) < 1e-12);

    // psi = deltaI + q * psi = deltaI + psi * q
    auto lhs = convolve(q, psi, K);
    for (int i = 0; i < 3; ++i) lhs.at(i, i, 0) += 1.0;
    CHECK(max_abs_diff(psi, lhs) < 1e-12);
    auto rhs = convolve(psi, q, K);
    for (int i = 0; i < 3; ++i) rhs.at(i, i, 0) += 1.0;
    CHECK(max_abs_diff(psi, rhs) < 1e-12);
  }
}

TEST_CASE("renewal inverse rejects mass at lag zero") {
  MatrixSequence a(2, 3);
  a.at(0, 0, 0) = 0.1;
  CHECK_THROWS_AS(conv_inverse_of_delta_minus(a, 3), NonzeroAtZero);
}

TEST_CASE("survival of a kernel starts at one and exhausts") {
  const auto alt = oracles::alternating_kernel();
  const auto s = survival(alt.q(), {1.0, 1.0}, 5);
  CHECK(s.at(0, 0, 0) == 1.0);  // no mass at lag zero
  for (int k = 1; k <= 5; ++k) CHECK(s.at(0, 0, k) == 0.0);  // all mass at k = 1
  CHECK(s.at(1, 1, 1) == 1.0);
  CHECK(s.at(1, 1, 2) == 0.0);
  CHECK(s.at(0, 1, 3) == 0.0);  // off-diagonal stays zero
}

TEST_CASE("survival equals one minus the cumulative row mass") {
  for (std::uint64_t seed = 70; seed < 76; ++seed) {
    const auto kernel = oracles::random_kernel(seed, 3, 4);
    const int K = 9;
    const auto s = survival(kernel.q(), {1.0, 1.0, 1.0}, K);
    for (int i = 0; i < 3; ++i) {
      double prev = 2.0;
      for (int k = 0; k <= K; ++k) {
        double cum = 0.0;
        for (int j = 0; j < 3; ++j) {
          for (int kk = 0; kk <= std::min(k, kernel.k_max()); ++kk) cum += kernel(i, j, kk);
        }
        CHECK(std::abs(s.at(i, i, k) - (1.0 - cum)) < 1e-15);
        CHECK(s.at(i, i, k) <= prev);  // non-increasing
        CHECK(s.at(i, i, k) >= -1e-15);
        prev = s.at(i, i, k);
      }
    }
  }
}

TEST_CASE("survival detects an understated row mass") {
  const auto kernel = oracles::two_state_test_kernel();
  CHECK_THROWS_AS(survival(kernel.q(), {0.25, 1.0}, 4), NegativeTail);
}

TEST_CASE("restriction to the full space is the identity") {
  const auto a = random_seq(9, 3, 6, false);
  CHECK(max_abs_diff(restrict_to(a, {0, 1, 2}), a) == 0.0);
}

TEST_CASE("restriction projects a two-state kernel to a scalar sequence") {
  const auto kernel = oracles::two_state_test_kernel();
  const auto r = restrict_to(kernel.q(), {0});
  CHECK(r.dim() == 1);
  for (int k = 0; k <= kernel.k_max(); ++k) CHECK(r.at(0, 0, k) == kernel(0, 0, k));
}

TEST_CASE("restrict-then-invert differs from invert-then-restrict") {
  // Within U = {a} the alternating kernel has no transitions at all, while
  // the unrestricted renewal function returns to a through b at lag 3.
  const auto alt = oracles::alternating_kernel();
  const auto psi_uu = conv_inverse_of_delta_minus(restrict_to(alt.q(), {0}), 6);
  CHECK(max_abs_diff(psi_uu, MatrixSequence::delta_identity(1, 6)) == 0.0);
  const auto psi = conv_inverse_of_delta_minus(alt.q(), 6);
  CHECK(restrict_to(psi, {0}).at(0, 0, 3) == 1.0);
}

TEST_CASE("restriction rejects an empty subset") {
  const auto a = random_seq(3, 2, 3, false);
  CHECK_THROWS_AS(restrict_to(a, {}), EmptySubset);
  CHECK_THROWS_AS(diag_restrict(a, {}), EmptySubset);
}

TEST_CASE("parallel and serial paths are bit-identical") {
  for (std::uint64_t seed = 90; seed < 94; ++seed) {
    const auto a = random_seq(seed, 4, 20, false);
    const auto b = random_seq(seed + 500, 4, 20, false);
    CHECK(convolve(a, b, 20, Exec::parallel) == convolve(a, b, 20, Exec::serial));
    const auto kernel = oracles::random_kernel(seed, 3, 3);
    CHECK(survival(kernel.q(), {1.0, 1.0, 1.0}, 15, Exec::parallel) ==
          survival(kernel.q(), {1.0, 1.0, 1.0}, 15, Exec::serial));
    VectorSequence v(4, 20);
    SplitMix64 rng(seed);
    for (int i = 0; i < 4; ++i) {
      for (int k = 0; k <= 20; ++k) v.at(i, k) = rng.next_unit();
    }
    CHECK(convolve_mv(a, v, 20, Exec::parallel) == convolve_mv(a, v, 20, Exec::serial));
  }
}

TEST_CASE("convolve_mv equals row sums of the matrix-diagonal product") {
  const auto kernel = oracles::random_kernel(42, 3, 3);
  const int K = 8;
  const auto psi = conv_inverse_of_delta_minus(kernel.q(), K);
  const auto sq = survival(kernel.q(), {1.0, 1.0, 1.0}, K);
  const auto direct = convolve_mv(psi, diag_restrict(sq, {0, 1, 2}), K);
  const auto via_matrix = row_sums(convolve(psi, sq, K));
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k <= K; ++k) {
      CHECK(std::abs(direct.at(i, k) - via_matrix.at(i, k)) < 1e-14);
    }
  }
}
