#include "smc/io_json.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

namespace smc {

using nlohmann::json;

namespace {

json require(const json& doc, const char* field, const std::string& origin) {
  if (!doc.contains(field)) {
    throw ParseError(origin + ": missing field '" + std::string(field) + "'");
  }
  return doc.at(field);
}

json matrix_seq_to_json(const MatrixSequence& m) {
  json lags = json::array();
  for (int k = 0; k <= m.horizon(); ++k) {
    json mat = json::array();
    for (int i = 0; i < m.dim(); ++i) {
      json row = json::array();
      for (int j = 0; j < m.dim(); ++j) row.push_back(m.at(i, j, k));
      mat.push_back(std::move(row));
    }
    lags.push_back(std::move(mat));
  }
  return lags;
}

json kernel_entries_to_json(const StateSpace& states, const MatrixSequence& q) {
  json entries = json::array();
  for (int i = 0; i < q.dim(); ++i) {
    for (int j = 0; j < q.dim(); ++j) {
      for (int k = 1; k <= q.horizon(); ++k) {
        const double p = q.at(i, j, k);
        if (p == 0.0) continue;
        entries.push_back({{"from", states.label(i)},
                           {"to", states.label(j)},
                           {"k", k},
                           {"p", p}});
      }
    }
  }
  return entries;
}

json summary_to_json(const ChainSummary& s) {
  return {{"nu", s.nu},
          {"mean_sojourn", s.mean_sojourn},
          {"m_bar", s.m_bar},
          {"mu", s.mu}};
}

json reliability_to_json(const StateSpace& states, const ReliabilityEstimate& r) {
  json up = json::array();
  for (int i : r.partition.up) up.push_back(states.label(i));
  json values = json::array();
  for (int u = 0; u < r.values.dim(); ++u) {
    json series = json::array();
    for (int k = 0; k <= r.values.horizon(); ++k) series.push_back(r.values.at(u, k));
    values.push_back(std::move(series));
  }
  return {{"up", std::move(up)}, {"values", std::move(values)}};
}

json coordinate_to_json(const StateSpace& states, const Coordinate& c) {
  json out = {{"target", target_name(c.target)}, {"i", states.label(c.i)}, {"k", c.k}};
  if (c.target != Target::reliability) out["j"] = states.label(c.j);
  return out;
}

}  // namespace

SemiMarkovKernel load_kernel_json(std::istream& in, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(origin + ": " + e.what());
  }
  const auto states_json = require(doc, "states", origin);
  if (!states_json.is_array() || states_json.size() < 2) {
    throw ParseError(origin + ": 'states' must list at least two labels");
  }
  std::vector<std::string> labels;
  for (const auto& s : states_json) labels.push_back(s.get<std::string>());
  const int k_max = require(doc, "k_max", origin).get<int>();
  if (k_max < 1) throw ParseError(origin + ": k_max must be >= 1");

  std::vector<KernelEntry> entries;
  std::size_t pos = 0;
  for (const auto& e : require(doc, "entries", origin)) {
    const std::string where = origin + ": entries[" + std::to_string(pos++) + "]";
    entries.push_back({require(e, "from", where).get<std::string>(),
                       require(e, "to", where).get<std::string>(),
                       require(e, "k", where).get<int>(),
                       require(e, "p", where).get<double>()});
  }
  try {
    return make_kernel(std::move(labels), k_max, entries);
  } catch (const Error& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

SemiMarkovKernel load_kernel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open kernel file '" + path + "'");
  return load_kernel_json(in, path);
}

void save_kernel_json(const SemiMarkovKernel& kernel, std::ostream& out) {
  json doc = {{"states", kernel.states().labels()},
              {"k_max", kernel.k_max()},
              {"entries", kernel_entries_to_json(kernel.states(), kernel.q())}};
  out << doc.dump(2) << '\n';
}

void save_estimate_json(const EstimateBundle& bundle, std::ostream& out) {
  const auto& states = bundle.kernel.states;
  json doc;
  doc["states"] = states.labels();
  doc["horizon_m"] = bundle.kernel.horizon_m;
  doc["seq_horizon"] = bundle.seq_horizon;
  doc["counts"] = {{"total", bundle.kernel.counts.total},
                   {"per_state", bundle.kernel.counts.per_state}};
  json visited = json::array();
  for (bool v : bundle.kernel.visited) visited.push_back(v);
  doc["visited"] = std::move(visited);
  doc["q_hat"] = {{"k_max", bundle.kernel.q.horizon()},
                  {"entries", kernel_entries_to_json(states, bundle.kernel.q)}};
  doc["psi_hat"] = matrix_seq_to_json(bundle.psi);
  if (bundle.p) doc["p_hat"] = matrix_seq_to_json(*bundle.p);
  if (bundle.r) doc["r_hat"] = reliability_to_json(states, *bundle.r);
  out << doc.dump(2) << '\n';
}

ExactSolution solve_exact(const SemiMarkovKernel& kernel, int horizon,
                          const std::optional<PartitionUD>& partition) {
  ExactSolution sol;
  sol.states = kernel.states();
  sol.seq_horizon = horizon;
  sol.summary = summarize(kernel);
  sol.assumptions = check_assumptions(kernel);
  const auto& q = kernel.q();
  sol.psi = conv_inverse_of_delta_minus(q, horizon);
  const auto sq = survival(q, std::vector<double>(kernel.size(), 1.0), horizon);
  sol.p = convolve(sol.psi, sq, horizon);
  if (partition) {
    const auto q_uu = restrict_to(q, partition->up);
    ReliabilityEstimate rel;
    rel.partition = *partition;
    rel.values = convolve_mv(conv_inverse_of_delta_minus(q_uu, horizon),
                             diag_restrict(sq, partition->up), horizon);
    sol.r = std::move(rel);
  }
  return sol;
}

void save_exact_json(const ExactSolution& sol, std::ostream& out) {
  json doc;
  doc["states"] = sol.states.labels();
  doc["seq_horizon"] = sol.seq_horizon;
  doc["summary"] = summary_to_json(sol.summary);
  doc["assumptions"] = {{"irreducible", sol.assumptions.irreducible},
                        {"aperiodic", sol.assumptions.aperiodic},
                        {"positive_recurrent", sol.assumptions.positive_recurrent},
                        {"k_checked", sol.assumptions.k_checked}};
  doc["psi"] = matrix_seq_to_json(sol.psi);
  doc["p"] = matrix_seq_to_json(sol.p);
  if (sol.r) doc["r"] = reliability_to_json(sol.states, *sol.r);
  out << doc.dump(2) << '\n';
}

void save_covariance_json(const CovarianceTable& table, const StateSpace& states,
                          bool diagonal_only, std::ostream& out) {
  json doc;
  doc["target"] = target_name(table.target());
  doc["seq_horizon"] = table.horizon();
  doc["states"] = states.labels();
  json index = json::array();
  if (table.target() == Target::reliability) {
    for (int u = 0; u < static_cast<int>(table.up().size()); ++u) {
      for (int k = 0; k <= table.horizon(); ++k) {
        index.push_back({{"i", states.label(table.up()[u])}, {"k", k}});
      }
    }
  } else {
    for (int i = 0; i < table.dim(); ++i) {
      for (int j = 0; j < table.dim(); ++j) {
        for (int k = 0; k <= table.horizon(); ++k) {
          index.push_back({{"i", states.label(i)}, {"j", states.label(j)}, {"k", k}});
        }
      }
    }
  }
  doc["index"] = std::move(index);
  json diag = json::array();
  for (int a = 0; a < table.size(); ++a) diag.push_back(table.entry(a, a));
  doc["diagonal"] = std::move(diag);
  if (!diagonal_only) {
    json rows = json::array();
    for (int a = 0; a < table.size(); ++a) {
      json row = json::array();
      for (int b = 0; b < table.size(); ++b) row.push_back(table.entry(a, b));
      rows.push_back(std::move(row));
    }
    doc["matrix"] = std::move(rows);
  }
  out << doc.dump(2) << '\n';
}

void save_validation_report_json(const ExperimentConfig& cfg, const ValidationReport& report,
                                 const StateSpace& states, std::ostream& out) {
  json doc;
  doc["config"] = {{"i0", states.label(cfg.i0)},
                   {"horizon_m", cfg.horizon_m},
                   {"replications", cfg.replications},
                   {"seq_horizon", cfg.seq_horizon},
                   {"seed", cfg.seed},
                   {"level", cfg.level}};
  doc["requested"] = report.requested;
  doc["kept"] = report.kept;
  doc["dropped"] = report.dropped;
  doc["periodic_warning"] = report.periodic_warning;
  json coords = json::array();
  for (const auto& cr : report.coordinates) {
    json c = coordinate_to_json(states, cr.coord);
    c["truth"] = cr.truth;
    c["mean_dev"] = cr.mean_dev;
    c["emp_var"] = cr.emp_var;
    c["theory_var"] = cr.theory_var;
    c["skewness"] = cr.skewness;
    c["ex_kurtosis"] = cr.ex_kurtosis;
    c["coverage"] = cr.coverage;
    c["var_ok"] = cr.var_ok;
    c["moments_ok"] = cr.moments_ok;
    c["coverage_ok"] = cr.coverage_ok;
    coords.push_back(std::move(c));
  }
  doc["coordinates"] = std::move(coords);
  json blocks = json::array();
  for (const auto& b : report.blocks) {
    blocks.push_back({{"target", target_name(b.target)},
                      {"coord_pos", b.coord_pos},
                      {"emp_cov", b.emp_cov},
                      {"theory_cov", b.theory_cov},
                      {"max_abs_dev", b.max_abs_dev},
                      {"max_rel_dev", b.max_rel_dev},
                      {"cov_ok", b.cov_ok}});
  }
  doc["blocks"] = std::move(blocks);
  doc["all_ok"] = report.all_ok;
  out << doc.dump(2) << '\n';
}

void save_deviations_csv(const ExperimentConfig& cfg, const ValidationReport& report,
                         const StateSpace& states, std::ostream& out) {
  out << "rep";
  for (const auto& c : cfg.coordinates) {
    out << ',' << target_name(c.target) << ':' << states.label(c.i);
    if (c.target != Target::reliability) out << ':' << states.label(c.j);
    out << ':' << c.k;
  }
  out << '\n';
  char buf[64];
  const int n_coords = static_cast<int>(cfg.coordinates.size());
  for (int r = 0; r < report.kept; ++r) {
    out << report.kept_reps[r];
    for (int c = 0; c < n_coords; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", report.deviations[r * n_coords + c]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void save_sweep_report_json(const SweepReport& report, std::ostream& out) {
  json doc;
  json points = json::array();
  for (const auto& p : report.points) {
    points.push_back({{"horizon_m", p.horizon_m}, {"median_sup_error", p.median_sup_error}});
  }
  doc["points"] = std::move(points);
  doc["strictly_decreasing"] = report.strictly_decreasing;
  out << doc.dump(2) << '\n';
}

}  // namespace smc
