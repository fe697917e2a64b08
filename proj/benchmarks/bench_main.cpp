// Timing comparison of the OpenMP kernels against their serial reference
// implementations. The two must agree bit for bit; speedups depend on the
// machine's core count (OMP_NUM_THREADS).

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "smc/asymptotics.hpp"
#include "smc/estimators.hpp"
#include "smc/rng.hpp"
#include "smc/simulator.hpp"
#include "smc/validation.hpp"

using namespace smc;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    f();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

MatrixSequence random_seq(std::uint64_t seed, int dim, int horizon) {
  SplitMix64 rng(seed);
  MatrixSequence a(dim, horizon);
  for (auto& x : a.data()) x = rng.next_unit();
  return a;
}

SemiMarkovKernel bench_kernel() {
  SplitMix64 rng(5150);
  const int n = 3, kmax = 4;
  MatrixSequence q(n, kmax);
  for (int i = 0; i < n; ++i) {
    double mass = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 1; k <= kmax; ++k) mass += (q.at(i, j, k) = rng.next_unit());
    }
    for (int j = 0; j < n; ++j) {
      for (int k = 1; k <= kmax; ++k) q.at(i, j, k) /= mass;
    }
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 1; k <= kmax; ++k) total += q.at(i, j, k);
    }
    q.at(i, 0, 1) += 1.0 - total;
  }
  return SemiMarkovKernel{StateSpace({"a", "b", "c"}), std::move(q)};
}

void row(const char* name, double serial, double parallel, double diff) {
  std::printf("%-28s %10.4fs %10.4fs %8.2fx   max|Δ| %g\n", name, serial, parallel,
              serial / parallel, diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP\n\n");
#endif
  std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

  {
    const auto a = random_seq(1, 8, 600);
    const auto b = random_seq(2, 8, 600);
    MatrixSequence out_s, out_p;
    const double ts = time_best_of(3, [&] { out_s = convolve(a, b, 600, Exec::serial); });
    const double tp = time_best_of(3, [&] { out_p = convolve(a, b, 600, Exec::parallel); });
    double diff = 0.0;
    for (std::size_t i = 0; i < out_s.data().size(); ++i) {
      diff = std::max(diff, std::abs(out_s.data()[i] - out_p.data()[i]));
    }
    row("convolve (8 states, K=600)", ts, tp, diff);
  }

  {
    const auto kernel = bench_kernel();
    const auto s = summarize(kernel);
    const int K = 40;
    CovarianceTable t_s, t_p;
    const double ts = time_best_of(3, [&] { t_s = cov_distribution(kernel, s, K, Exec::serial); });
    const double tp =
        time_best_of(3, [&] { t_p = cov_distribution(kernel, s, K, Exec::parallel); });
    double diff = 0.0;
    for (std::size_t i = 0; i < t_s.data().size(); ++i) {
      diff = std::max(diff, std::abs(t_s.data()[i] - t_p.data()[i]));
    }
    row("cov table (3 states, K=40)", ts, tp, diff);
  }

  {
    ExperimentConfig cfg;
    cfg.kernel = bench_kernel();
    cfg.i0 = 0;
    cfg.horizon_m = 20000;
    cfg.replications = 300;
    cfg.seq_horizon = 8;
    cfg.seed = 7;
    cfg.coordinates = {{Target::kernel, 0, 1, 1}, {Target::renewal, 0, 0, 4}};
    ValidationReport r_s, r_p;
    cfg.threads = 1;
    const double ts = time_best_of(2, [&] { r_s = run_clt_experiment(cfg); });
    cfg.threads = 0;  // all cores
    const double tp = time_best_of(2, [&] { r_p = run_clt_experiment(cfg); });
    double diff = 0.0;
    for (std::size_t i = 0; i < r_s.deviations.size(); ++i) {
      diff = std::max(diff, std::abs(r_s.deviations[i] - r_p.deviations[i]));
    }
    row("MC replications (R=300)", ts, tp, diff);
  }

  return 0;
}
