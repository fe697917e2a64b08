#include "smc/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "smc/seq_ops.hpp"

namespace smc {

CovarianceTable::CovarianceTable(Target target, int dim, int horizon, std::vector<int> up)
    : target_(target), dim_(dim), horizon_(horizon), up_(std::move(up)) {
  n_ = (target == Target::reliability) ? static_cast<int>(up_.size()) * (horizon + 1)
                                       : dim * dim * (horizon + 1);
  m_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
}

// ---------------------------------------------------------------------------
// V^q
// ---------------------------------------------------------------------------

CovarianceTable cov_kernel(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                           int horizon, Exec exec) {
  const int n = kernel.size();
  CovarianceTable table(Target::kernel, n, horizon);
  auto fill_block = [&](int i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k <= horizon; ++k) {
        const double qe = kernel(i, j, k);
        if (qe == 0.0) continue;  // whole row/column of the block is zero
        const int a = table.flat(i, j, k);
        for (int j2 = 0; j2 < n; ++j2) {
          for (int k2 = 0; k2 <= horizon; ++k2) {
            const double same = (j == j2 && k == k2) ? 1.0 : 0.0;
            table.entry(a, table.flat(i, j2, k2)) =
                summary.mu[i] * qe * (same - kernel(i, j2, k2));
          }
        }
      }
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) fill_block(i);
  } else {
    for (int i = 0; i < n; ++i) fill_block(i);
  }
  return table;
}

double var_kernel_1d(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                     int i, int j, int k) {
  const double qe = kernel(i, j, k);
  return summary.mu[i] * qe * (1.0 - qe);
}

// ---------------------------------------------------------------------------
// Tensor assemblies. For each source row i~ the table gains
//   sum_{e~ in row} mu q_e~ (inner_e~)x(inner_e~)  -  mu (row mean)x(row mean),
// accumulated per row so that deterministic kernels cancel to exact zeros.
// The e~ sums run over the whole kernel support k~ <= k_max: the tail parts
// of the inner sequences do not vanish for k~ beyond an output lag.
// ---------------------------------------------------------------------------

namespace {

struct RowTerms {
  std::vector<double> weights;               // mu_ii * q_e~ per e~ in this row
  std::vector<std::vector<double>> inners;   // flattened inner vector per e~
  std::vector<double> mean;                  // flattened row-mean vector
  double mu = 0.0;
};

// Accumulates the grouped rank-one updates; parallel over output rows with a
// fixed inner order, bit-identical to the serial path.
CovarianceTable accumulate(Target target, int dim, int horizon, std::vector<int> up,
                           const std::vector<RowTerms>& rows, Exec exec) {
  CovarianceTable table(target, dim, horizon, std::move(up));
  const int nn = table.size();
  auto fill_row = [&](int a) {
    for (const RowTerms& row : rows) {
      for (std::size_t t = 0; t < row.weights.size(); ++t) {
        const double w = row.weights[t] * row.inners[t][a];
        if (w == 0.0) continue;
        const double* v = row.inners[t].data();
        for (int b = 0; b < nn; ++b) table.entry(a, b) += w * v[b];
      }
      const double w = row.mu * row.mean[a];
      if (w != 0.0) {
        const double* v = row.mean.data();
        for (int b = 0; b < nn; ++b) table.entry(a, b) -= w * v[b];
      }
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int a = 0; a < nn; ++a) fill_row(a);
  } else {
    for (int a = 0; a < nn; ++a) fill_row(a);
  }
  return table;
}

// data() of MatrixSequence is lag-major; tables are (i,j)-major. Reorder.
std::vector<double> flatten_table_order(const MatrixSequence& m) {
  const int n = m.dim(), K = m.horizon();
  std::vector<double> out(static_cast<std::size_t>(n) * n * (K + 1));
  std::size_t pos = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k <= K; ++k) out[pos++] = m.at(i, j, k);
    }
  }
  return out;
}

std::vector<double> flatten_vector_seq(const VectorSequence& v) { return v.data(); }

// Unit sequence with a single one at (i~, j~, k~), on a horizon that can hold
// the lag even when it exceeds the output horizon.
MatrixSequence unit_seq(int dim, int i, int j, int k, int horizon) {
  MatrixSequence d(dim, std::max(horizon, k));
  d.at(i, j, k) = 1.0;
  return d;
}

// Kernel row mask q^i~: row i~ of q, all other rows zero.
MatrixSequence row_mask(const MatrixSequence& q, int row) {
  MatrixSequence m(q.dim(), q.horizon());
  for (int k = 0; k <= q.horizon(); ++k) {
    for (int j = 0; j < q.dim(); ++j) m.at(row, j, k) = q.at(row, j, k);
  }
  return m;
}

MatrixSequence add(MatrixSequence a, const MatrixSequence& b) {
  for (std::size_t t = 0; t < a.data().size(); ++t) a.data()[t] += b.data()[t];
  return a;
}

VectorSequence add_v(VectorSequence a, const VectorSequence& b) {
  for (std::size_t t = 0; t < a.data().size(); ++t) a.data()[t] += b.data()[t];
  return a;
}

}  // namespace

CovarianceTable cov_renewal(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                            int horizon, Exec exec) {
  const int n = kernel.size();
  const int kmax = kernel.k_max();
  const auto& q = kernel.q();
  const auto psi = conv_inverse_of_delta_minus(q, horizon);

  std::vector<RowTerms> rows(n);
  auto build_row = [&](int it) {
    RowTerms& row = rows[it];
    row.mu = summary.mu[it];
    for (int jt = 0; jt < n; ++jt) {
      for (int kt = 1; kt <= kmax; ++kt) {
        const double w = kernel(it, jt, kt);
        if (w == 0.0) continue;
        const auto inner =
            convolve(convolve(psi, unit_seq(n, it, jt, kt, horizon), horizon, Exec::serial),
                     psi, horizon, Exec::serial);
        row.weights.push_back(row.mu * w);
        row.inners.push_back(flatten_table_order(inner));
      }
    }
    const auto mean = convolve(convolve(psi, row_mask(q, it), horizon, Exec::serial), psi,
                               horizon, Exec::serial);
    row.mean = flatten_table_order(mean);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int it = 0; it < n; ++it) build_row(it);
  } else {
    for (int it = 0; it < n; ++it) build_row(it);
  }
  return accumulate(Target::renewal, n, horizon, {}, rows, exec);
}

CovarianceTable cov_distribution(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                                 int horizon, Exec exec) {
  const int n = kernel.size();
  const int kmax = kernel.k_max();
  const auto& q = kernel.q();
  const auto psi = conv_inverse_of_delta_minus(q, horizon);
  const auto sq = survival(q, std::vector<double>(n, 1.0), horizon, Exec::serial);

  std::vector<RowTerms> rows(n);
  auto build_row = [&](int it) {
    RowTerms& row = rows[it];
    row.mu = summary.mu[it];
    std::vector<double> unit_mass(n, 0.0);
    unit_mass[it] = 1.0;
    for (int jt = 0; jt < n; ++jt) {
      for (int kt = 1; kt <= kmax; ++kt) {
        const double w = kernel(it, jt, kt);
        if (w == 0.0) continue;
        const auto d = unit_seq(n, it, jt, kt, horizon);
        const auto head = convolve(
            convolve(convolve(psi, d, horizon, Exec::serial), psi, horizon, Exec::serial), sq,
            horizon, Exec::serial);
        const auto tail =
            convolve(psi, survival(d, unit_mass, horizon, Exec::serial), horizon, Exec::serial);
        row.weights.push_back(row.mu * w);
        row.inners.push_back(flatten_table_order(add(head, tail)));
      }
    }
    const auto mask = row_mask(q, it);
    const auto head = convolve(
        convolve(convolve(psi, mask, horizon, Exec::serial), psi, horizon, Exec::serial), sq,
        horizon, Exec::serial);
    const auto tail =
        convolve(psi, survival(mask, unit_mass, horizon, Exec::serial), horizon, Exec::serial);
    row.mean = flatten_table_order(add(head, tail));
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int it = 0; it < n; ++it) build_row(it);
  } else {
    for (int it = 0; it < n; ++it) build_row(it);
  }
  return accumulate(Target::distribution, n, horizon, {}, rows, exec);
}

CovarianceTable cov_reliability(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                                const PartitionUD& partition, int horizon, Exec exec) {
  const int n = kernel.size();
  const int kmax = kernel.k_max();
  const auto& q = kernel.q();
  const auto& up = partition.up;
  const int nu = static_cast<int>(up.size());
  if (nu == 0 || partition.down.empty()) throw EmptySubset("partition must be nontrivial");

  const auto q_uu = restrict_to(q, up);
  const auto psi_uu = conv_inverse_of_delta_minus(q_uu, horizon);
  std::vector<double> mass(n, 1.0);
  const auto sq_u = diag_restrict(survival(q, mass, horizon, Exec::serial), up);

  std::vector<int> up_pos(n, -1);
  for (int u = 0; u < nu; ++u) up_pos[up[u]] = u;

  std::vector<RowTerms> rows(nu);
  auto build_row = [&](int ut) {
    const int it = up[ut];
    RowTerms& row = rows[ut];
    row.mu = summary.mu[it];
    std::vector<double> unit_mass(n, 0.0);
    unit_mass[it] = 1.0;
    for (int jt = 0; jt < n; ++jt) {
      for (int kt = 1; kt <= kmax; ++kt) {
        const double w = kernel(it, jt, kt);
        if (w == 0.0) continue;
        const auto d = unit_seq(n, it, jt, kt, horizon);
        const auto tail = convolve_mv(
            psi_uu, diag_restrict(survival(d, unit_mass, horizon, Exec::serial), up), horizon,
            Exec::serial);
        VectorSequence inner = tail;
        if (up_pos[jt] >= 0) {
          const auto d_uu = restrict_to(d, up);
          const auto head = convolve_mv(
              convolve(convolve(psi_uu, d_uu, horizon, Exec::serial), psi_uu, horizon,
                       Exec::serial),
              sq_u, horizon, Exec::serial);
          inner = add_v(head, tail);
        }
        row.weights.push_back(row.mu * w);
        row.inners.push_back(flatten_vector_seq(inner));
      }
    }
    const auto mask = row_mask(q, it);
    const auto head = convolve_mv(
        convolve(convolve(psi_uu, restrict_to(mask, up), horizon, Exec::serial), psi_uu,
                 horizon, Exec::serial),
        sq_u, horizon, Exec::serial);
    const auto tail = convolve_mv(
        psi_uu, diag_restrict(survival(mask, unit_mass, horizon, Exec::serial), up), horizon,
        Exec::serial);
    row.mean = flatten_vector_seq(add_v(head, tail));
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int ut = 0; ut < nu; ++ut) build_row(ut);
  } else {
    for (int ut = 0; ut < nu; ++ut) build_row(ut);
  }
  return accumulate(Target::reliability, n, horizon, up, rows, exec);
}

// ---------------------------------------------------------------------------
// One-dimensional formulas on scalar sequences. Deliberately separate from
// the MatrixSequence machinery so the diagonal identities are a real
// cross-check of two code paths.
// ---------------------------------------------------------------------------

namespace {

using Seq = std::vector<double>;

Seq sconv(const Seq& a, const Seq& b, int horizon) {
  Seq c(horizon + 1, 0.0);
  for (int k = 0; k <= horizon; ++k) {
    double acc = 0.0;
    const int lmax = std::min<int>(k, static_cast<int>(a.size()) - 1);
    for (int l = 0; l <= lmax; ++l) {
      const int r = k - l;
      if (r < static_cast<int>(b.size())) acc += a[l] * b[r];
    }
    c[k] = acc;
  }
  return c;
}

Seq cumsum(const Seq& a) {
  Seq c(a.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) c[k] = (acc += a[k]);
  return c;
}

Seq square(Seq a) {
  for (double& x : a) x *= x;
  return a;
}

Seq minus(Seq a, const Seq& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] -= b[k];
  return a;
}

Seq plus(Seq a, const Seq& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
  return a;
}

// Entry series of the renewal inverse of (deltaI - A), scalar recursion per
// pair; A is given as dense [i][j] -> Seq.
std::vector<std::vector<Seq>> scalar_renewal_inverse(const std::vector<std::vector<Seq>>& a,
                                                     int horizon) {
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<Seq>> psi(n, std::vector<Seq>(n, Seq(horizon + 1, 0.0)));
  for (int i = 0; i < n; ++i) psi[i][i][0] = 1.0;
  for (int k = 1; k <= horizon; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int u = 0; u < n; ++u) {
          const Seq& aiu = a[i][u];
          const int lmax = std::min<int>(k, static_cast<int>(aiu.size()) - 1);
          for (int l = 1; l <= lmax; ++l) acc += aiu[l] * psi[u][j][k - l];
        }
        psi[i][j][k] = acc;
      }
    }
  }
  return psi;
}

std::vector<std::vector<Seq>> kernel_rows(const SemiMarkovKernel& kernel) {
  const int n = kernel.size();
  std::vector<std::vector<Seq>> q(n, std::vector<Seq>(n, Seq(kernel.k_max() + 1, 0.0)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k <= kernel.k_max(); ++k) q[i][j][k] = kernel(i, j, k);
    }
  }
  return q;
}

// H_j(k) = sum_{j'} sum_{k'<=k} q_jj'(k'), padded to the horizon.
Seq cumulative_row(const SemiMarkovKernel& kernel, int j, int horizon) {
  Seq h(horizon + 1, 0.0);
  double acc = 0.0;
  for (int k = 0; k <= horizon; ++k) {
    if (k <= kernel.k_max()) {
      for (int jp = 0; jp < kernel.size(); ++jp) acc += kernel(j, jp, k);
    }
    h[k] = acc;
  }
  return h;
}

Seq one_minus(const Seq& a) {
  Seq c(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) c[k] = 1.0 - a[k];
  return c;
}

}  // namespace

double var_renewal_1d(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                      int i, int j, int k, int horizon) {
  const int n = kernel.size();
  const auto q = kernel_rows(kernel);
  const auto psi = scalar_renewal_inverse(q, horizon);
  double total = 0.0;
  for (int it = 0; it < n; ++it) {
    double squares = 0.0;
    double mean = 0.0;
    for (int jt = 0; jt < n; ++jt) {
      const Seq f = sconv(psi[i][it], psi[jt][j], horizon);
      squares += sconv(square(f), q[it][jt], horizon)[k];
      mean += sconv(sconv(psi[i][it], q[it][jt], horizon), psi[jt][j], horizon)[k];
    }
    total += summary.mu[it] * (squares - mean * mean);
  }
  return total;
}

double var_distribution_1d(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                           int i, int j, int k, int horizon) {
  const int n = kernel.size();
  const auto q = kernel_rows(kernel);
  const auto psi = scalar_renewal_inverse(q, horizon);
  const Seq h_j = cumulative_row(kernel, j, horizon);
  const Seq big_psi = cumsum(psi[i][j]);
  double total = 0.0;
  for (int it = 0; it < n; ++it) {
    double squares = 0.0;
    double mean = 0.0;
    for (int jt = 0; jt < n; ++jt) {
      // C^{ij}_{it jt} = psi_{i,it} * psi_{jt,j} * (1 - H_j)
      const Seq c = sconv(sconv(psi[i][it], psi[jt][j], horizon), one_minus(h_j), horizon);
      const Seq f = (it == j) ? minus(c, big_psi) : c;
      squares += sconv(square(f), q[it][jt], horizon)[k];
      mean += sconv(c, q[it][jt], horizon)[k];
    }
    if (it == j) mean -= sconv(psi[i][j], h_j, horizon)[k];
    total += summary.mu[it] * (squares - mean * mean);
  }
  return total;
}

double var_reliability_1d(const SemiMarkovKernel& kernel, const ChainSummary& summary,
                          const PartitionUD& partition, int i_up, int k, int horizon) {
  const auto& up = partition.up;
  const int nu = static_cast<int>(up.size());
  // q restricted to U x U as scalar series
  std::vector<std::vector<Seq>> q_uu(nu, std::vector<Seq>(nu, Seq(kernel.k_max() + 1, 0.0)));
  for (int a = 0; a < nu; ++a) {
    for (int b = 0; b < nu; ++b) {
      for (int kk = 0; kk <= kernel.k_max(); ++kk) q_uu[a][b][kk] = kernel(up[a], up[b], kk);
    }
  }
  const auto psi_uu = scalar_renewal_inverse(q_uu, horizon);

  double total = 0.0;
  for (int at = 0; at < nu; ++at) {
    const int it = up[at];
    const Seq big_psi = cumsum(psi_uu[i_up][at]);
    const Seq h_it = cumulative_row(kernel, it, horizon);

    double squares = 0.0;
    double mean = 0.0;
    for (int bt = 0; bt < nu; ++bt) {
      const int jt = up[bt];
      // D^i_{it jt} = sum_{j in U} psi_uu[i][it] * psi_uu[jt][j] * (1 - H_j)
      Seq d(horizon + 1, 0.0);
      for (int bj = 0; bj < nu; ++bj) {
        const Seq h_j = cumulative_row(kernel, up[bj], horizon);
        d = plus(std::move(d),
                 sconv(sconv(psi_uu[i_up][at], psi_uu[bt][bj], horizon), one_minus(h_j), horizon));
      }
      Seq qs(kernel.k_max() + 1, 0.0);
      for (int kk = 0; kk <= kernel.k_max(); ++kk) qs[kk] = kernel(it, jt, kk);
      squares += sconv(square(minus(d, big_psi)), qs, horizon)[k];
      mean += sconv(d, qs, horizon)[k];
    }
    for (int jt : partition.down) {
      Seq qs(kernel.k_max() + 1, 0.0);
      for (int kk = 0; kk <= kernel.k_max(); ++kk) qs[kk] = kernel(it, jt, kk);
      squares += sconv(square(big_psi), qs, horizon)[k];
    }
    mean -= sconv(psi_uu[i_up][at], h_it, horizon)[k];
    total += summary.mu[it] * (squares - mean * mean);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Plug-in evaluation
// ---------------------------------------------------------------------------

ChainSummary plug_in_summary(const KernelEstimate& est) {
  const int n = est.states.size();
  ChainSummary s;
  s.nu.assign(n, 0.0);
  s.mu.assign(n, 0.0);
  s.mean_sojourn.assign(n, 0.0);
  const double total = static_cast<double>(est.counts.total);
  for (int i = 0; i < n; ++i) {
    if (!est.visited[i]) {
      throw UnvisitedState("state '" + est.states.label(i) +
                           "' never departed from; plug-in undefined");
    }
    s.nu[i] = static_cast<double>(est.counts.per_state[i]) / total;
    s.mu[i] = static_cast<double>(est.horizon_m) /
              static_cast<double>(est.counts.per_state[i]);
    for (int j = 0; j < n; ++j) {
      for (int k = 1; k <= est.q.horizon(); ++k) s.mean_sojourn[i] += k * est.q.at(i, j, k);
    }
  }
  s.m_bar = static_cast<double>(est.horizon_m) / total;
  return s;
}

SemiMarkovKernel plug_in_kernel(const KernelEstimate& est) {
  if (!est.all_visited()) {
    throw UnvisitedState("plug-in kernel needs every state visited");
  }
  return SemiMarkovKernel(est.states, est.q);
}

CovarianceTable plug_in(Target target, const KernelEstimate& est, int horizon,
                        const std::optional<PartitionUD>& partition, Exec exec) {
  const auto kernel = plug_in_kernel(est);
  const auto summary = plug_in_summary(est);
  switch (target) {
    case Target::kernel:
      return cov_kernel(kernel, summary, horizon, exec);
    case Target::renewal:
      return cov_renewal(kernel, summary, horizon, exec);
    case Target::distribution:
      return cov_distribution(kernel, summary, horizon, exec);
    case Target::reliability:
      if (!partition) throw Error("reliability plug-in needs a partition");
      return cov_reliability(kernel, summary, *partition, horizon, exec);
  }
  throw Error("unreachable");
}

// ---------------------------------------------------------------------------
// Normal quantile and confidence intervals
// ---------------------------------------------------------------------------

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw BadLevel("quantile probability must lie in (0,1)");
  // Rational approximation (Acklam), then one Halley step against erfc.
  static const double A[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double B[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double C[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double D[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double r = std::sqrt(-2.0 * std::log(p));
    x = (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5]) /
        ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0);
  } else if (p > 1.0 - plow) {
    const double r = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5]) /
        ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0);
  } else {
    const double qd = p - 0.5;
    const double r = qd * qd;
    x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * qd /
        (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
  }
  if (std::abs(x) > 37.0) return x;  // refinement term would overflow
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

std::pair<double, double> confidence_interval(double estimate, double variance,
                                              long long horizon_m, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw BadLevel("confidence level must lie strictly between 0 and 1");
  }
  if (variance < 0.0) throw BadLevel("variance must be nonnegative");
  if (horizon_m <= 0) throw BadLevel("horizon must be positive");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double hw = z * std::sqrt(variance / static_cast<double>(horizon_m));
  return {estimate - hw, estimate + hw};
}

}  // namespace smc
