// Command-line front end: simulate, estimate, exact, variance, validate.
// Exit codes: 0 success, 2 input/usage error, 3 data insufficiency.

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smc/io_json.hpp"
#include "smc/simulator.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitData = 3;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw smc::ParseError("cannot open output file '" + path + "'");
  return out;
}

void write_or_print(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
  } else {
    auto out = open_out(path);
    fn(out);
  }
}

std::optional<smc::PartitionUD> parse_partition(const smc::StateSpace& states,
                                                const std::vector<std::string>& up) {
  if (up.empty()) return std::nullopt;
  return smc::PartitionUD::from_up_labels(states, up);
}

smc::Coordinate parse_coordinate(const smc::StateSpace& states, const std::string& text) {
  // target:i:j:k for q/psi/P, target:i:k for R
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() < 3) throw smc::ParseError("bad coordinate '" + text + "'");
  smc::Coordinate c;
  c.target = smc::target_from_name(parts[0]);
  c.i = states.index(parts[1]);
  if (c.target == smc::Target::reliability) {
    if (parts.size() != 3) throw smc::ParseError("reliability coordinate is target:i:k");
    c.k = std::stoi(parts[2]);
  } else {
    if (parts.size() != 4) throw smc::ParseError("coordinate is target:i:j:k");
    c.j = states.index(parts[2]);
    c.k = std::stoi(parts[3]);
  }
  return c;
}

int cmd_simulate(const std::string& kernel_path, const std::string& i0, long long horizon,
                 std::uint64_t seed, const std::string& out_path) {
  const auto kernel = smc::load_kernel_file(kernel_path);
  const auto traj = smc::simulate(kernel, kernel.states().index(i0), horizon, seed);
  write_or_print(out_path, [&](std::ostream& out) { smc::save_trajectory_csv(traj, out); });
  return kExitOk;
}

int cmd_estimate(const std::string& traj_path, int horizon_k, long long horizon_m,
                 const std::vector<std::string>& up, const std::string& out_path) {
  std::ifstream in(traj_path);
  if (!in) throw smc::ParseError("cannot open trajectory file '" + traj_path + "'");
  std::optional<long long> m;
  if (horizon_m >= 0) m = horizon_m;
  const auto traj = smc::load_trajectory_csv(in, m);
  const auto partition = parse_partition(traj.states, up);
  int k = horizon_k;
  if (k <= 0) {
    long long max_x = 1;
    for (long long x : traj.sojourn) max_x = std::max(max_x, x);
    k = smc::default_seq_horizon(traj.states.size(), static_cast<int>(max_x));
  }
  const auto bundle = smc::estimate_bundle(traj, k, partition);
  write_or_print(out_path, [&](std::ostream& out) { smc::save_estimate_json(bundle, out); });
  return kExitOk;
}

int cmd_exact(const std::string& kernel_path, int horizon_k,
              const std::vector<std::string>& up, const std::string& out_path) {
  const auto kernel = smc::load_kernel_file(kernel_path);
  const int k = horizon_k >= 0 ? horizon_k
                               : smc::default_seq_horizon(kernel.size(), kernel.k_max());
  const auto sol = smc::solve_exact(kernel, k, parse_partition(kernel.states(), up));
  write_or_print(out_path, [&](std::ostream& out) { smc::save_exact_json(sol, out); });
  return kExitOk;
}

int cmd_variance(const std::string& kernel_path, const std::string& target_name, int horizon_k,
                 const std::vector<std::string>& up, const std::vector<std::string>& coords,
                 bool diagonal_only, const std::string& out_path) {
  const auto kernel = smc::load_kernel_file(kernel_path);
  const auto target = smc::target_from_name(target_name);
  const auto partition = parse_partition(kernel.states(), up);
  if (target == smc::Target::reliability && !partition) {
    throw smc::ParseError("target R needs --partition");
  }
  const int k = horizon_k >= 0 ? horizon_k
                               : smc::default_seq_horizon(kernel.size(), kernel.k_max());
  const auto summary = smc::summarize(kernel);
  smc::CovarianceTable table;
  switch (target) {
    case smc::Target::kernel: table = smc::cov_kernel(kernel, summary, k); break;
    case smc::Target::renewal: table = smc::cov_renewal(kernel, summary, k); break;
    case smc::Target::distribution: table = smc::cov_distribution(kernel, summary, k); break;
    case smc::Target::reliability:
      table = smc::cov_reliability(kernel, summary, *partition, k);
      break;
  }
  if (!coords.empty()) {
    // restrict the document to the requested coordinates
    std::vector<int> flat;
    nlohmann::json index = nlohmann::json::array();
    for (const auto& text : coords) {
      const auto c = parse_coordinate(kernel.states(), text);
      if (c.target != target) throw smc::ParseError("coordinate target mismatch: " + text);
      if (c.k > k) throw smc::ParseError("coordinate lag beyond --seq-horizon: " + text);
      if (target == smc::Target::reliability) {
        int pos = -1;
        for (std::size_t u = 0; u < partition->up.size(); ++u) {
          if (partition->up[u] == c.i) pos = static_cast<int>(u);
        }
        if (pos < 0) throw smc::ParseError("coordinate state not in up-set: " + text);
        flat.push_back(table.flat_up(pos, c.k));
        index.push_back({{"i", kernel.states().label(c.i)}, {"k", c.k}});
      } else {
        flat.push_back(table.flat(c.i, c.j, c.k));
        index.push_back({{"i", kernel.states().label(c.i)},
                         {"j", kernel.states().label(c.j)},
                         {"k", c.k}});
      }
    }
    nlohmann::json doc;
    doc["target"] = smc::target_name(target);
    doc["seq_horizon"] = k;
    doc["index"] = std::move(index);
    nlohmann::json rows = nlohmann::json::array();
    for (int a : flat) {
      nlohmann::json row = nlohmann::json::array();
      for (int b : flat) row.push_back(table.entry(a, b));
      rows.push_back(std::move(row));
    }
    doc["matrix"] = std::move(rows);
    write_or_print(out_path, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
    return kExitOk;
  }
  write_or_print(out_path, [&](std::ostream& out) {
    smc::save_covariance_json(table, kernel.states(), diagonal_only, out);
  });
  return kExitOk;
}

struct ValidateArgs {
  std::string config_path;
  std::string kernel_path;
  std::string i0;
  std::vector<std::string> coords;
  std::vector<std::string> up;
  long long horizon_m = -1;
  int replications = -1;
  int seq_horizon = -1;
  std::int64_t seed = -1;
  double level = -1.0;
  int threads = 0;
  std::string out_path;
  std::string csv_path;
};

int cmd_validate(const ValidateArgs& args) {
  using nlohmann::json;
  json doc = json::object();
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw smc::ParseError("cannot open config file '" + args.config_path + "'");
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw smc::ParseError(args.config_path + ": " + e.what());
    }
  }

  const std::string kernel_path =
      !args.kernel_path.empty() ? args.kernel_path : doc.value("kernel", std::string{});
  if (kernel_path.empty()) {
    throw smc::ParseError("no kernel file (config 'kernel' or --kernel)");
  }

  smc::ExperimentConfig cfg;
  cfg.kernel = smc::load_kernel_file(kernel_path);
  const std::string i0 =
      !args.i0.empty() ? args.i0 : doc.value("i0", cfg.kernel.states().label(0));
  cfg.i0 = cfg.kernel.states().index(i0);
  cfg.horizon_m = args.horizon_m > 0 ? args.horizon_m : doc.value("horizon_m", 5000LL);
  cfg.replications =
      args.replications > 0 ? args.replications : doc.value("replications", 2000);
  cfg.seq_horizon = args.seq_horizon > 0 ? args.seq_horizon : doc.value("seq_horizon", 5);
  cfg.seed = args.seed >= 0 ? static_cast<std::uint64_t>(args.seed)
                            : doc.value("seed", std::uint64_t{1});
  cfg.level = args.level > 0 ? args.level : doc.value("level", 0.95);
  cfg.threads = args.threads;
  if (!args.up.empty()) {
    cfg.partition = smc::PartitionUD::from_up_labels(cfg.kernel.states(), args.up);
  } else if (doc.contains("partition_up")) {
    cfg.partition = smc::PartitionUD::from_up_labels(
        cfg.kernel.states(), doc.at("partition_up").get<std::vector<std::string>>());
  }
  if (doc.contains("tolerances")) {
    const auto& t = doc.at("tolerances");
    cfg.tol.var_rel = t.value("var_rel", cfg.tol.var_rel);
    cfg.tol.cov_abs = t.value("cov_abs", cfg.tol.cov_abs);
    cfg.tol.skew_abs = t.value("skew_abs", cfg.tol.skew_abs);
    cfg.tol.ex_kurt_abs = t.value("ex_kurt_abs", cfg.tol.ex_kurt_abs);
    cfg.tol.coverage_lo = t.value("coverage_lo", cfg.tol.coverage_lo);
    cfg.tol.coverage_hi = t.value("coverage_hi", cfg.tol.coverage_hi);
  }

  const std::string mode = doc.value("mode", std::string{"clt"});
  if (mode == "sweep") {
    std::vector<long long> horizons = doc.value("horizon_list", std::vector<long long>{});
    if (horizons.empty()) throw smc::ParseError("sweep mode needs 'horizon_list'");
    const int seeds = doc.value("sweep_seeds", 20);
    const auto report = smc::run_consistency_sweep(cfg, horizons, seeds);
    write_or_print(args.out_path,
                   [&](std::ostream& out) { smc::save_sweep_report_json(report, out); });
    return kExitOk;
  }

  if (!args.coords.empty()) {
    for (const auto& text : args.coords) {
      cfg.coordinates.push_back(parse_coordinate(cfg.kernel.states(), text));
    }
  } else {
    for (const auto& cj : doc.value("coordinates", json::array())) {
      smc::Coordinate c;
      c.target = smc::target_from_name(cj.at("target").get<std::string>());
      c.i = cfg.kernel.states().index(cj.at("i").get<std::string>());
      if (c.target != smc::Target::reliability) {
        c.j = cfg.kernel.states().index(cj.at("j").get<std::string>());
      }
      c.k = cj.at("k").get<int>();
      cfg.coordinates.push_back(c);
    }
  }
  if (cfg.coordinates.empty()) {
    throw smc::ParseError("validate needs coordinates (config 'coordinates' or --coords)");
  }

  const auto report = smc::run_clt_experiment(cfg);
  if (report.periodic_warning) {
    std::cerr << "warning: kernel is periodic; limit statements assume aperiodicity\n";
  }
  write_or_print(args.out_path, [&](std::ostream& out) {
    smc::save_validation_report_json(cfg, report, cfg.kernel.states(), out);
  });
  if (!args.csv_path.empty()) {
    auto out = open_out(args.csv_path);
    smc::save_deviations_csv(cfg, report, cfg.kernel.states(), out);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-time semi-Markov chain estimation toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "sample one trajectory to CSV");
  std::string sim_kernel, sim_i0, sim_out;
  long long sim_m = 0;
  std::uint64_t sim_seed = 1;
  sim->add_option("--kernel", sim_kernel, "kernel spec file")->required();
  sim->add_option("--i0", sim_i0, "initial state label")->required();
  sim->add_option("--horizon,-M", sim_m, "time horizon M")->required();
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out,-o", sim_out, "output CSV path (default stdout)");

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate q, psi, P (and R) from a trajectory");
  std::string est_traj, est_out;
  int est_k = 0;
  long long est_m = -1;
  std::vector<std::string> est_up;
  est->add_option("--trajectory,-t", est_traj, "trajectory CSV")->required();
  est->add_option("--seq-horizon,-K", est_k, "output horizon K (default 2*|E|*k_max)");
  est->add_option("--horizon,-M", est_m, "horizon M (default: last jump time)");
  est->add_option("--partition", est_up, "up-set labels for the reliability estimate");
  est->add_option("--out,-o", est_out, "output JSON path (default stdout)");

  // exact
  auto* exa = app.add_subcommand("exact", "psi, P, R at the true kernel");
  std::string exa_kernel, exa_out;
  int exa_k = -1;
  std::vector<std::string> exa_up;
  exa->add_option("--kernel", exa_kernel, "kernel spec file")->required();
  exa->add_option("--seq-horizon,-K", exa_k, "output horizon K");
  exa->add_option("--partition", exa_up, "up-set labels");
  exa->add_option("--out,-o", exa_out, "output JSON path (default stdout)");

  // variance
  auto* var = app.add_subcommand("variance", "asymptotic covariance tables");
  std::string var_kernel, var_target, var_out;
  int var_k = -1;
  std::vector<std::string> var_up, var_coords;
  bool var_diag = false;
  var->add_option("--kernel", var_kernel, "kernel spec file")->required();
  var->add_option("--target", var_target, "q, psi, P or R")->required();
  var->add_option("--seq-horizon,-K", var_k, "output horizon K");
  var->add_option("--partition", var_up, "up-set labels (required for R)");
  var->add_option("--coords", var_coords,
                  "restrict to coordinates target:i:j:k (target:i:k for R)");
  var->add_flag("--diagonal-only", var_diag, "emit only the diagonal");
  var->add_option("--out,-o", var_out, "output JSON path (default stdout)");

  // validate
  auto* val = app.add_subcommand("validate", "Monte Carlo CLT / coverage / sweep experiments");
  ValidateArgs va;
  val->add_option("--config,-c", va.config_path, "experiment config JSON (optional)");
  val->add_option("--kernel", va.kernel_path, "kernel file (overrides config)");
  val->add_option("--i0", va.i0, "initial state label (overrides config)");
  val->add_option("--coords", va.coords,
                  "coordinates target:i:j:k / target:i:k (override config)");
  val->add_option("--partition", va.up, "up-set labels (overrides config)");
  val->add_option("--horizon,-M", va.horizon_m, "horizon M (overrides config)");
  val->add_option("--replications,-R", va.replications, "replications (overrides config)");
  val->add_option("--seq-horizon,-K", va.seq_horizon, "output horizon (overrides config)");
  val->add_option("--seed", va.seed, "master seed (overrides config)");
  val->add_option("--level", va.level, "CI level (overrides config)");
  val->add_option("--threads", va.threads, "worker threads (default: available cores)");
  val->add_option("--out,-o", va.out_path, "report JSON path (default stdout)");
  val->add_option("--csv", va.csv_path, "per-replication deviations CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_kernel, sim_i0, sim_m, sim_seed, sim_out);
    if (est->parsed()) return cmd_estimate(est_traj, est_k, est_m, est_up, est_out);
    if (exa->parsed()) return cmd_exact(exa_kernel, exa_k, exa_up, exa_out);
    if (var->parsed()) {
      return cmd_variance(var_kernel, var_target, var_k, var_up, var_coords, var_diag, var_out);
    }
    if (val->parsed()) return cmd_validate(va);
  } catch (const smc::DataInsufficiency& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const smc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
