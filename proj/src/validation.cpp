#include "smc/validation.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "smc/rng.hpp"
#include "smc/simulator.hpp"

namespace smc {

const char* target_name(Target t) {
  switch (t) {
    case Target::kernel: return "q";
    case Target::renewal: return "psi";
    case Target::distribution: return "P";
    case Target::reliability: return "R";
  }
  return "?";
}

Target target_from_name(const std::string& name) {
  if (name == "q") return Target::kernel;
  if (name == "psi") return Target::renewal;
  if (name == "P" || name == "p") return Target::distribution;
  if (name == "R" || name == "r") return Target::reliability;
  throw ParseError("unknown target '" + name + "' (expected q, psi, P or R)");
}

namespace {

struct TruthSet {
  ChainSummary summary;
  MatrixSequence psi;
  MatrixSequence p;
  VectorSequence r;  // empty unless a partition is configured
};

TruthSet solve_truth(const ExperimentConfig& cfg) {
  TruthSet truth;
  truth.summary = summarize(cfg.kernel);
  const auto& q = cfg.kernel.q();
  truth.psi = conv_inverse_of_delta_minus(q, cfg.seq_horizon);
  const auto sq = survival(q, std::vector<double>(cfg.kernel.size(), 1.0), cfg.seq_horizon);
  truth.p = convolve(truth.psi, sq, cfg.seq_horizon);
  if (cfg.partition) {
    const auto q_uu = restrict_to(q, cfg.partition->up);
    const auto psi_uu = conv_inverse_of_delta_minus(q_uu, cfg.seq_horizon);
    truth.r = convolve_mv(psi_uu, diag_restrict(sq, cfg.partition->up), cfg.seq_horizon);
  }
  return truth;
}

double truth_at(const TruthSet& truth, const SemiMarkovKernel& kernel, const Coordinate& c) {
  switch (c.target) {
    case Target::kernel: return kernel(c.i, c.j, c.k);
    case Target::renewal: return truth.psi.at(c.i, c.j, c.k);
    case Target::distribution: return truth.p.at(c.i, c.j, c.k);
    case Target::reliability: return truth.r.at(c.i, c.k);
  }
  return 0.0;
}

// Up-set position for reliability coordinates (Coordinate::i holds a state
// index of the full space).
int up_position(const PartitionUD& part, int state) {
  for (std::size_t u = 0; u < part.up.size(); ++u) {
    if (part.up[u] == state) return static_cast<int>(u);
  }
  throw ParseError("reliability coordinate state is not in the up-set");
}

struct NeedFlags {
  bool psi = false, p = false, r = false;
};

// Per-replication estimate evaluation at one coordinate.
double estimate_at(const EstimateBundle& bundle, const Coordinate& c, int r_pos) {
  switch (c.target) {
    case Target::kernel: return bundle.kernel.q.at_ext(c.i, c.j, c.k);
    case Target::renewal: return bundle.psi.at(c.i, c.j, c.k);
    case Target::distribution: return bundle.p->at(c.i, c.j, c.k);
    case Target::reliability: return bundle.r->values.at(r_pos, c.k);
  }
  return 0.0;
}

// Plug-in variance of one coordinate via the 1-D formulas (the cheap path;
// the matrix tables are not needed per replication).
double plug_in_var_1d(const KernelEstimate& est, const Coordinate& c,
                      const std::optional<PartitionUD>& partition, int horizon, int r_pos) {
  const auto kernel = plug_in_kernel(est);
  const auto summary = plug_in_summary(est);
  switch (c.target) {
    case Target::kernel: return var_kernel_1d(kernel, summary, c.i, c.j, c.k);
    case Target::renewal: return var_renewal_1d(kernel, summary, c.i, c.j, c.k, horizon);
    case Target::distribution:
      return var_distribution_1d(kernel, summary, c.i, c.j, c.k, horizon);
    case Target::reliability:
      return var_reliability_1d(kernel, summary, *partition, r_pos, c.k, horizon);
  }
  return 0.0;
}

double table_entry(const CovarianceTable& t, const Coordinate& a, const Coordinate& b,
                   const std::optional<PartitionUD>& partition) {
  if (t.target() == Target::reliability) {
    return t.entry(t.flat_up(up_position(*partition, a.i), a.k),
                   t.flat_up(up_position(*partition, b.i), b.k));
  }
  return t.entry(t.flat(a.i, a.j, a.k), t.flat(b.i, b.j, b.k));
}

}  // namespace

ValidationReport run_clt_experiment(const ExperimentConfig& cfg) {
  if (cfg.replications < 2) throw Error("need at least 2 replications");
  const auto rep_assumptions = check_assumptions(cfg.kernel);
  if (!rep_assumptions.irreducible) {
    throw NotIrreducible("experiment kernel must have an irreducible embedded chain");
  }
  if (cfg.i0 < 0 || cfg.i0 >= cfg.kernel.size()) throw Error("initial state out of range");
  if (cfg.partition && (cfg.partition->up.empty() || cfg.partition->down.empty())) {
    throw EmptySubset("experiment partition must be nontrivial");
  }
  const int n_coords = static_cast<int>(cfg.coordinates.size());
  if (n_coords == 0) throw Error("no coordinates configured");

  NeedFlags need;
  for (const auto& c : cfg.coordinates) {
    need.psi = need.psi || c.target == Target::renewal;
    need.p = need.p || c.target == Target::distribution;
    need.r = need.r || c.target == Target::reliability;
  }
  if (need.r && !cfg.partition) throw Error("reliability coordinates need a partition");

  const TruthSet truth = solve_truth(cfg);
  std::vector<double> truths(n_coords);
  std::vector<int> r_pos(n_coords, -1);
  for (int c = 0; c < n_coords; ++c) {
    const auto& coord = cfg.coordinates[c];
    if (coord.k > cfg.seq_horizon || coord.i < 0 || coord.i >= cfg.kernel.size()) {
      throw Error("coordinate out of range");
    }
    if (coord.target == Target::reliability) r_pos[c] = up_position(*cfg.partition, coord.i);
    truths[c] = truth_at(truth, cfg.kernel, cfg.coordinates[c]);
  }

  const int reps = cfg.replications;
  const double sqrt_m = std::sqrt(static_cast<double>(cfg.horizon_m));
  std::vector<double> devs(static_cast<std::size_t>(reps) * n_coords, 0.0);
  std::vector<char> ok(reps, 0);
  std::vector<char> covered(static_cast<std::size_t>(reps) * n_coords, 0);

#ifdef _OPENMP
  const int default_threads = omp_get_max_threads();
  const int threads = cfg.threads > 0 ? cfg.threads : default_threads;
#else
  const int threads = 1;
  (void)threads;
#endif

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (int r = 0; r < reps; ++r) {
    try {
      const auto traj =
          simulate(cfg.kernel, cfg.i0, cfg.horizon_m, child_seed(cfg.seed, r));
      EstimateBundle bundle;
      bundle.seq_horizon = cfg.seq_horizon;
      bundle.kernel = estimate_kernel(traj);
      bundle.psi = estimate_psi(bundle.kernel.q, cfg.seq_horizon);
      if (need.p) bundle.p = estimate_distribution(bundle.kernel, bundle.psi, cfg.seq_horizon);
      if (need.r) bundle.r = estimate_reliability(bundle.kernel, *cfg.partition, cfg.seq_horizon);
      for (int c = 0; c < n_coords; ++c) {
        const double est = estimate_at(bundle, cfg.coordinates[c], r_pos[c]);
        devs[static_cast<std::size_t>(r) * n_coords + c] = sqrt_m * (est - truths[c]);
        const double v =
            plug_in_var_1d(bundle.kernel, cfg.coordinates[c], cfg.partition, cfg.seq_horizon,
                           r_pos[c]);
        const auto [lo, hi] =
            confidence_interval(est, std::max(v, 0.0), cfg.horizon_m, cfg.level);
        covered[static_cast<std::size_t>(r) * n_coords + c] =
            (truths[c] >= lo && truths[c] <= hi) ? 1 : 0;
      }
      ok[r] = 1;
    } catch (const DataInsufficiency&) {
      ok[r] = 0;  // dropped and counted
    }
  }

  ValidationReport rep;
  rep.requested = reps;
  rep.periodic_warning = !rep_assumptions.aperiodic;
  for (int r = 0; r < reps; ++r) {
    if (ok[r]) {
      rep.kept_reps.push_back(r);
      for (int c = 0; c < n_coords; ++c) {
        rep.deviations.push_back(devs[static_cast<std::size_t>(r) * n_coords + c]);
      }
    }
  }
  rep.kept = static_cast<int>(rep.kept_reps.size());
  rep.dropped = reps - rep.kept;
  if (rep.kept < 2) throw DataInsufficiency("fewer than 2 usable replications");

  // Per-coordinate moments (fixed order over kept replications).
  std::vector<double> mean(n_coords, 0.0);
  for (int r = 0; r < rep.kept; ++r) {
    for (int c = 0; c < n_coords; ++c) mean[c] += rep.deviations[r * n_coords + c];
  }
  for (double& m : mean) m /= rep.kept;

  std::vector<double> m2(n_coords, 0.0), m3(n_coords, 0.0), m4(n_coords, 0.0);
  for (int r = 0; r < rep.kept; ++r) {
    for (int c = 0; c < n_coords; ++c) {
      const double d = rep.deviations[r * n_coords + c] - mean[c];
      const double d2 = d * d;
      m2[c] += d2;
      m3[c] += d2 * d;
      m4[c] += d2 * d2;
    }
  }

  // Theoretical tables, one per needed target.
  std::map<Target, CovarianceTable> tables;
  auto ensure_table = [&](Target t) {
    if (tables.count(t)) return;
    switch (t) {
      case Target::kernel:
        tables.emplace(t, cov_kernel(cfg.kernel, truth.summary, cfg.seq_horizon));
        break;
      case Target::renewal:
        tables.emplace(t, cov_renewal(cfg.kernel, truth.summary, cfg.seq_horizon));
        break;
      case Target::distribution:
        tables.emplace(t, cov_distribution(cfg.kernel, truth.summary, cfg.seq_horizon));
        break;
      case Target::reliability:
        tables.emplace(t, cov_reliability(cfg.kernel, truth.summary, *cfg.partition,
                                          cfg.seq_horizon));
        break;
    }
  };

  rep.coordinates.resize(n_coords);
  for (int c = 0; c < n_coords; ++c) {
    const auto& coord = cfg.coordinates[c];
    ensure_table(coord.target);
    CoordinateReport& cr = rep.coordinates[c];
    cr.coord = coord;
    cr.truth = truths[c];
    cr.mean_dev = mean[c];
    cr.emp_var = m2[c] / (rep.kept - 1);
    cr.theory_var = table_entry(tables.at(coord.target), coord, coord, cfg.partition);
    const double sd = std::sqrt(m2[c] / rep.kept);
    if (sd > 0.0) {
      cr.skewness = (m3[c] / rep.kept) / (sd * sd * sd);
      cr.ex_kurtosis = (m4[c] / rep.kept) / (sd * sd * sd * sd) - 3.0;
    }
    long long cov_count = 0;
    for (int r : rep.kept_reps) {
      cov_count += covered[static_cast<std::size_t>(r) * n_coords + c];
    }
    cr.coverage = static_cast<double>(cov_count) / rep.kept;

    const double tol = cfg.tol.var_rel;
    cr.var_ok = (cr.theory_var == 0.0)
                    ? cr.emp_var == 0.0
                    : std::abs(cr.emp_var - cr.theory_var) <= tol * cr.theory_var;
    cr.moments_ok = (sd == 0.0) || (std::abs(cr.skewness) <= cfg.tol.skew_abs &&
                                    std::abs(cr.ex_kurtosis) <= cfg.tol.ex_kurt_abs);
    cr.coverage_ok = cr.coverage >= cfg.tol.coverage_lo && cr.coverage <= cfg.tol.coverage_hi;
    if (sd == 0.0 && cr.theory_var == 0.0) cr.coverage_ok = cr.coverage == 1.0;
  }

  // Per-target empirical/theoretical covariance blocks.
  std::map<Target, std::vector<int>> by_target;
  for (int c = 0; c < n_coords; ++c) by_target[cfg.coordinates[c].target].push_back(c);
  for (const auto& [target, pos] : by_target) {
    TargetBlock block;
    block.target = target;
    block.coord_pos = pos;
    const int m = static_cast<int>(pos.size());
    block.emp_cov.assign(static_cast<std::size_t>(m) * m, 0.0);
    block.theory_cov.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        double acc = 0.0;
        for (int r = 0; r < rep.kept; ++r) {
          acc += (rep.deviations[r * n_coords + pos[a]] - mean[pos[a]]) *
                 (rep.deviations[r * n_coords + pos[b]] - mean[pos[b]]);
        }
        block.emp_cov[a * m + b] = acc / (rep.kept - 1);
        block.theory_cov[a * m + b] = table_entry(
            tables.at(target), cfg.coordinates[pos[a]], cfg.coordinates[pos[b]], cfg.partition);
      }
    }
    block.max_abs_dev = 0.0;
    block.max_rel_dev = 0.0;
    bool ok_block = true;
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        const double diff = std::abs(block.emp_cov[a * m + b] - block.theory_cov[a * m + b]);
        block.max_abs_dev = std::max(block.max_abs_dev, diff);
        const double denom = std::abs(block.theory_cov[a * m + b]);
        if (denom > 0.0) {
          block.max_rel_dev = std::max(block.max_rel_dev, diff / denom);
          if (a == b) {
            ok_block = ok_block && diff <= cfg.tol.var_rel * denom;
          } else {
            ok_block = ok_block && diff <= cfg.tol.cov_abs;
          }
        } else {
          ok_block = ok_block && diff <= cfg.tol.cov_abs;
        }
      }
    }
    block.cov_ok = ok_block;
    rep.blocks.push_back(std::move(block));
  }

  rep.all_ok = true;
  for (const auto& cr : rep.coordinates) {
    rep.all_ok = rep.all_ok && cr.var_ok && cr.moments_ok;
  }
  for (const auto& b : rep.blocks) rep.all_ok = rep.all_ok && b.cov_ok;
  return rep;
}

SweepReport run_consistency_sweep(const ExperimentConfig& cfg,
                                  const std::vector<long long>& horizons, int seeds) {
  if (horizons.size() < 2) throw Error("sweep needs at least two horizons");
  if (!std::is_sorted(horizons.begin(), horizons.end())) {
    throw Error("sweep horizons must be increasing");
  }
  if (seeds < 1) throw Error("sweep needs at least one seed");
  if (cfg.i0 < 0 || cfg.i0 >= cfg.kernel.size()) throw Error("initial state out of range");
  if (cfg.partition && (cfg.partition->up.empty() || cfg.partition->down.empty())) {
    throw EmptySubset("experiment partition must be nontrivial");
  }

  const TruthSet truth = [&] {
    ExperimentConfig c = cfg;
    return solve_truth(c);
  }();
  const bool with_r = cfg.partition.has_value();
  const int n_targets = with_r ? 4 : 3;
  const int n_h = static_cast<int>(horizons.size());

  // sup-errors per (horizon, seed, target)
  std::vector<double> sup(static_cast<std::size_t>(n_h) * seeds * n_targets, 0.0);
  std::vector<char> usable(static_cast<std::size_t>(n_h) * seeds, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) collapse(2)
#endif
  for (int h = 0; h < n_h; ++h) {
    for (int s = 0; s < seeds; ++s) {
      const std::uint64_t seed = child_seed(child_seed(cfg.seed, h), s);
      try {
        const auto traj = simulate(cfg.kernel, cfg.i0, horizons[h], seed);
        const auto bundle = estimate_bundle(traj, cfg.seq_horizon, cfg.partition);
        double* out = &sup[(static_cast<std::size_t>(h) * seeds + s) * n_targets];
        const int n = cfg.kernel.size();
        double e_q = 0.0;
        const int kq = std::max(cfg.kernel.k_max(), bundle.kernel.q.horizon());
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            for (int k = 0; k <= kq; ++k) {
              e_q = std::max(e_q,
                             std::abs(bundle.kernel.q.at_ext(i, j, k) - cfg.kernel(i, j, k)));
            }
          }
        }
        double e_psi = 0.0, e_p = 0.0;
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            for (int k = 0; k <= cfg.seq_horizon; ++k) {
              e_psi = std::max(e_psi, std::abs(bundle.psi.at(i, j, k) - truth.psi.at(i, j, k)));
              e_p = std::max(e_p, std::abs(bundle.p->at(i, j, k) - truth.p.at(i, j, k)));
            }
          }
        }
        out[0] = e_q;
        out[1] = e_psi;
        out[2] = e_p;
        if (with_r) {
          double e_r = 0.0;
          for (int u = 0; u < static_cast<int>(cfg.partition->up.size()); ++u) {
            for (int k = 0; k <= cfg.seq_horizon; ++k) {
              e_r = std::max(e_r, std::abs(bundle.r->values.at(u, k) - truth.r.at(u, k)));
            }
          }
          out[3] = e_r;
        }
        usable[static_cast<std::size_t>(h) * seeds + s] = 1;
      } catch (const DataInsufficiency&) {
        usable[static_cast<std::size_t>(h) * seeds + s] = 0;
      }
    }
  }

  const char* names[4] = {"q", "psi", "P", "R"};
  SweepReport report;
  report.points.resize(n_h);
  for (int h = 0; h < n_h; ++h) {
    report.points[h].horizon_m = horizons[h];
    for (int t = 0; t < n_targets; ++t) {
      std::vector<double> vals;
      for (int s = 0; s < seeds; ++s) {
        if (usable[static_cast<std::size_t>(h) * seeds + s]) {
          vals.push_back(sup[(static_cast<std::size_t>(h) * seeds + s) * n_targets + t]);
        }
      }
      if (vals.empty()) throw DataInsufficiency("no usable replication in sweep");
      std::sort(vals.begin(), vals.end());
      const std::size_t mid = vals.size() / 2;
      const double med = (vals.size() % 2 == 1) ? vals[mid]
                                                : 0.5 * (vals[mid - 1] + vals[mid]);
      report.points[h].median_sup_error[names[t]] = med;
    }
  }
  for (int t = 0; t < n_targets; ++t) {
    bool dec = true;
    for (int h = 1; h < n_h; ++h) {
      dec = dec && report.points[h].median_sup_error.at(names[t]) <
                       report.points[h - 1].median_sup_error.at(names[t]);
    }
    report.strictly_decreasing[names[t]] = dec;
  }
  return report;
}

std::vector<double> run_coverage(const ExperimentConfig& cfg, double level) {
  ExperimentConfig c = cfg;
  c.level = level;
  const auto report = run_clt_experiment(c);
  std::vector<double> rates;
  rates.reserve(report.coordinates.size());
  for (const auto& cr : report.coordinates) rates.push_back(cr.coverage);
  return rates;
}

}  // namespace smc
