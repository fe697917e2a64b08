#include "smc/chain.hpp"

#include <cmath>
#include <cstdint>
#include <numeric>

namespace smc {

namespace {

// Pivoted Gaussian elimination; the systems here are |E| x |E|.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    }
    if (std::abs(a[piv * n + col]) < 1e-14) {
      throw NotIrreducible("singular stationary system; embedded chain is reducible");
    }
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
    x[r] = acc / a[r * n + r];
  }
  return x;
}

bool is_irreducible(const std::vector<double>& qj, int n) {
  // Reachability closure of the support graph, from every vertex.
  std::vector<char> adj(n * n, 0);
  for (int i = 0; i < n * n; ++i) adj[i] = qj[i] > 0.0 ? 1 : 0;
  for (int via = 0; via < n; ++via) {
    for (int i = 0; i < n; ++i) {
      if (!adj[i * n + via]) continue;
      for (int j = 0; j < n; ++j) adj[i * n + j] = adj[i * n + j] | adj[via * n + j];
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && !adj[i * n + j]) return false;
    }
  }
  return true;
}

// Support of a lag sequence as a bit mask, one bit per lag.
struct BitSeq {
  std::vector<std::uint64_t> w;
  int bits = 0;

  explicit BitSeq(int nbits) : w((nbits + 63) / 64, 0), bits(nbits) {}
  void set(int k) { w[k >> 6] |= (std::uint64_t{1} << (k & 63)); }
  bool get(int k) const { return (w[k >> 6] >> (k & 63)) & 1; }

  // this |= other << shift, truncated at `bits`.
  void or_shifted(const BitSeq& other, int shift) {
    if (shift >= bits) return;
    const int word = shift >> 6, rem = shift & 63;
    for (int d = static_cast<int>(w.size()) - 1; d >= word; --d) {
      std::uint64_t v = other.w[d - word] << rem;
      if (rem && d - word - 1 >= 0) v |= other.w[d - word - 1] >> (64 - rem);
      w[d] |= v;
    }
    const int excess = static_cast<int>(w.size()) * 64 - bits;
    if (excess > 0) w.back() &= ~std::uint64_t{0} >> excess;
  }
  bool any() const {
    for (auto x : w) {
      if (x) return true;
    }
    return false;
  }
};

}  // namespace

std::vector<double> embedded_matrix(const SemiMarkovKernel& kernel) {
  const int n = kernel.size();
  std::vector<double> qj(n * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k <= kernel.k_max(); ++k) s += kernel(i, j, k);
      qj[i * n + j] = s;
    }
  }
  return qj;
}

ChainSummary summarize(const SemiMarkovKernel& kernel) {
  const int n = kernel.size();
  const auto qj = embedded_matrix(kernel);
  if (!is_irreducible(qj, n)) {
    throw NotIrreducible("embedded chain is reducible; invariant probability not unique");
  }
  // (q^J)^T nu = nu with the last equation replaced by sum nu = 1.
  std::vector<double> a(n * n, 0.0), b(n, 0.0);
  for (int r = 0; r < n - 1; ++r) {
    for (int c = 0; c < n; ++c) a[r * n + c] = qj[c * n + r] - (r == c ? 1.0 : 0.0);
  }
  for (int c = 0; c < n; ++c) a[(n - 1) * n + c] = 1.0;
  b[n - 1] = 1.0;

  ChainSummary s;
  s.nu = solve_dense(std::move(a), std::move(b));
  s.mean_sojourn.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 1; k <= kernel.k_max(); ++k) s.mean_sojourn[i] += k * kernel(i, j, k);
    }
  }
  s.m_bar = 0.0;
  for (int i = 0; i < n; ++i) s.m_bar += s.nu[i] * s.mean_sojourn[i];
  s.mu.assign(n, 0.0);
  for (int i = 0; i < n; ++i) s.mu[i] = s.m_bar / s.nu[i];
  return s;
}

AssumptionReport check_assumptions(const SemiMarkovKernel& kernel) {
  const int n = kernel.size();
  AssumptionReport rep;
  rep.irreducible = is_irreducible(embedded_matrix(kernel), n);
  rep.positive_recurrent = rep.irreducible;  // finite space, bounded sojourns
  rep.k_checked = 4 * n * kernel.k_max();
  const int bits = rep.k_checked + 1;

  // Boolean lag supports of the kernel and of its convolution powers.
  std::vector<BitSeq> base(n * n, BitSeq(bits));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 1; k <= kernel.k_max(); ++k) {
        if (kernel(i, j, k) > 0.0) base[i * n + j].set(k);
      }
    }
  }
  std::vector<long long> gcds(n, 0);
  std::vector<BitSeq> power = base;
  for (int step = 1; step <= rep.k_checked; ++step) {
    for (int i = 0; i < n; ++i) {
      for (int k = 1; k <= rep.k_checked; ++k) {
        if (power[i * n + i].get(k)) gcds[i] = std::gcd(gcds[i], static_cast<long long>(k));
      }
    }
    if (step == rep.k_checked) break;
    // next power = base (*) power, boolean convolution via shift-or
    std::vector<BitSeq> next(n * n, BitSeq(bits));
    bool anything = false;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        BitSeq& out = next[i * n + j];
        for (int u = 0; u < n; ++u) {
          const BitSeq& left = base[i * n + u];
          const BitSeq& right = power[u * n + j];
          for (int l = 1; l <= kernel.k_max(); ++l) {
            if (left.get(l)) out.or_shifted(right, l);
          }
        }
        anything = anything || out.any();
      }
    }
    if (!anything) break;
    power = std::move(next);
  }
  rep.aperiodic = rep.irreducible;
  for (int i = 0; i < n; ++i) {
    if (gcds[i] != 1) rep.aperiodic = false;
  }
  return rep;
}

}  // namespace smc
