#include "smc/seq_ops.hpp"

#include <algorithm>
#include <string>

namespace smc {

namespace {

void check_square_compat(const MatrixSequence& a, const MatrixSequence& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("sequence dimensions differ: " + std::to_string(a.dim()) +
                            " vs " + std::to_string(b.dim()));
  }
}

// One output lag of (a * b); entry loop order is fixed so the parallel and
// serial paths produce identical floating-point results.
void convolve_lag(const MatrixSequence& a, const MatrixSequence& b, int k, double* out) {
  const int n = a.dim();
  for (int idx = 0; idx < n * n; ++idx) out[idx] = 0.0;
  const int lmax = std::min(k, a.horizon());
  for (int l = 0; l <= lmax; ++l) {
    if (k - l > b.horizon()) continue;
    const double* al = a.lag(l);
    const double* bl = b.lag(k - l);
    for (int i = 0; i < n; ++i) {
      for (int u = 0; u < n; ++u) {
        const double aiu = al[i * n + u];
        if (aiu == 0.0) continue;
        const double* brow = bl + u * n;
        double* crow = out + i * n;
        for (int j = 0; j < n; ++j) crow[j] += aiu * brow[j];
      }
    }
  }
}

}  // namespace

MatrixSequence convolve(const MatrixSequence& a, const MatrixSequence& b, int horizon,
                        Exec exec) {
  check_square_compat(a, b);
  MatrixSequence c(a.dim(), horizon);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k <= horizon; ++k) convolve_lag(a, b, k, c.lag(k));
  } else {
    for (int k = 0; k <= horizon; ++k) convolve_lag(a, b, k, c.lag(k));
  }
  return c;
}

VectorSequence convolve_mv(const MatrixSequence& a, const VectorSequence& v, int horizon,
                           Exec exec) {
  if (a.dim() != v.dim()) {
    throw DimensionMismatch("matrix dim " + std::to_string(a.dim()) +
                            " vs vector dim " + std::to_string(v.dim()));
  }
  const int n = a.dim();
  VectorSequence out(n, horizon);
  auto one_lag = [&](int k) {
    const int lmax = std::min(k, a.horizon());
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int l = 0; l <= lmax; ++l) {
        if (k - l > v.horizon()) continue;
        const double* al = a.lag(l) + i * n;
        for (int u = 0; u < n; ++u) acc += al[u] * v.at(u, k - l);
      }
      out.at(i, k) = acc;
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int k = 0; k <= horizon; ++k) one_lag(k);
  } else {
    for (int k = 0; k <= horizon; ++k) one_lag(k);
  }
  return out;
}

MatrixSequence n_fold(const MatrixSequence& a, int n, int horizon, Exec exec) {
  if (n < 0) throw Error("n_fold needs n >= 0");
  MatrixSequence acc = MatrixSequence::delta_identity(a.dim(), horizon);
  for (int m = 0; m < n; ++m) acc = convolve(a, acc, horizon, exec);
  return acc;
}

MatrixSequence conv_inverse_of_delta_minus(const MatrixSequence& a, int horizon) {
  const int n = a.dim();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (a.at(i, j, 0) != 0.0) {
        throw NonzeroAtZero("conv inverse needs A(0) = 0; entry (" + std::to_string(i) +
                            "," + std::to_string(j) + ") is " + std::to_string(a.at(i, j, 0)));
      }
    }
  }
  // The recursion is sequential in k; each step is one small matrix product.
  MatrixSequence psi = MatrixSequence::delta_identity(n, horizon);
  for (int k = 1; k <= horizon; ++k) {
    double* pk = psi.lag(k);
    const int lmax = std::min(k, a.horizon());
    for (int l = 1; l <= lmax; ++l) {
      const double* al = a.lag(l);
      const double* pl = psi.lag(k - l);
      for (int i = 0; i < n; ++i) {
        for (int u = 0; u < n; ++u) {
          const double aiu = al[i * n + u];
          if (aiu == 0.0) continue;
          for (int j = 0; j < n; ++j) pk[i * n + j] += aiu * pl[u * n + j];
        }
      }
    }
  }
  return psi;
}

MatrixSequence survival(const MatrixSequence& a, const std::vector<double>& row_mass,
                        int horizon, Exec exec) {
  const int n = a.dim();
  if (static_cast<int>(row_mass.size()) != n) {
    throw DimensionMismatch("row_mass size " + std::to_string(row_mass.size()) +
                            " vs dim " + std::to_string(n));
  }
  MatrixSequence s(n, horizon);
  bool negative = false;
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static) reduction(|| : negative)
    for (int i = 0; i < n; ++i) {
      double cum = 0.0;
      for (int k = 0; k <= horizon; ++k) {
        if (k <= a.horizon()) {
          const double* ak = a.lag(k) + i * n;
          for (int j = 0; j < n; ++j) cum += ak[j];
        }
        const double tail = row_mass[i] - cum;
        if (tail < -1e-12) negative = true;
        s.at(i, i, k) = tail;
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      double cum = 0.0;
      for (int k = 0; k <= horizon; ++k) {
        if (k <= a.horizon()) {
          const double* ak = a.lag(k) + i * n;
          for (int j = 0; j < n; ++j) cum += ak[j];
        }
        const double tail = row_mass[i] - cum;
        if (tail < -1e-12) negative = true;
        s.at(i, i, k) = tail;
      }
    }
  }
  if (negative) throw NegativeTail("cumulative row mass exceeds the declared total");
  return s;
}

MatrixSequence restrict_to(const MatrixSequence& a, const std::vector<int>& subset) {
  if (subset.empty()) throw EmptySubset("restriction to an empty subset");
  const int m = static_cast<int>(subset.size());
  MatrixSequence r(m, a.horizon());
  for (int k = 0; k <= a.horizon(); ++k) {
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) r.at(i, j, k) = a.at(subset[i], subset[j], k);
    }
  }
  return r;
}

VectorSequence diag_restrict(const MatrixSequence& a, const std::vector<int>& subset) {
  if (subset.empty()) throw EmptySubset("diagonal restriction to an empty subset");
  const int m = static_cast<int>(subset.size());
  VectorSequence v(m, a.horizon());
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k <= a.horizon(); ++k) v.at(i, k) = a.at(subset[i], subset[i], k);
  }
  return v;
}

VectorSequence row_sums(const MatrixSequence& a) {
  const int n = a.dim();
  VectorSequence v(n, a.horizon());
  for (int k = 0; k <= a.horizon(); ++k) {
    const double* ak = a.lag(k);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += ak[i * n + j];
      v.at(i, k) = acc;
    }
  }
  return v;
}

}  // namespace smc
