#include "smc/trajectory.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

namespace smc {

JumpCounts counts(const Trajectory& t) {
  JumpCounts c;
  c.per_state.assign(t.states.size(), 0);
  int prev = t.initial;
  for (int s : t.jump_state) {
    ++c.per_state[prev];
    ++c.total;
    prev = s;
  }
  return c;
}

int semi_markov_state(const Trajectory& t, long long k) {
  if (k < 0 || k > t.horizon) {
    throw TimeBeyondHorizon("time " + std::to_string(k) + " outside [0, " +
                            std::to_string(t.horizon) + "]");
  }
  // N(k) = max{n : S_n <= k}; the state occupied is J_{N(k)}.
  auto it = std::upper_bound(t.cum_time.begin(), t.cum_time.end(), k);
  if (it == t.cum_time.begin()) return t.initial;
  return t.jump_state[static_cast<std::size_t>(it - t.cum_time.begin()) - 1];
}

void save_trajectory_csv(const Trajectory& t, std::ostream& out) {
  out << "n,state,sojourn,cumtime\n";
  out << "0," << t.states.label(t.initial) << ",0,0\n";
  for (long long n = 0; n < t.jumps(); ++n) {
    out << (n + 1) << ',' << t.states.label(t.jump_state[n]) << ',' << t.sojourn[n] << ','
        << t.cum_time[n] << '\n';
  }
}

Trajectory load_trajectory_csv(std::istream& in, std::optional<long long> horizon) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trajectory CSV: empty file");
  // tolerate a trailing \r from foreign line endings
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "n,state,sojourn,cumtime") {
    throw ParseError("trajectory CSV: bad header '" + line + "'");
  }

  struct Row {
    long long n;
    std::string state;
    long long sojourn;
    long long cum;
  };
  std::vector<Row> rows;
  long long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    Row r;
    std::string field;
    try {
      if (!std::getline(ss, field, ',')) throw ParseError("");
      r.n = std::stoll(field);
      if (!std::getline(ss, r.state, ',')) throw ParseError("");
      if (!std::getline(ss, field, ',')) throw ParseError("");
      r.sojourn = std::stoll(field);
      if (!std::getline(ss, field, ',')) throw ParseError("");
      r.cum = std::stoll(field);
    } catch (const std::exception&) {
      throw ParseError("trajectory CSV: malformed row at line " + std::to_string(lineno));
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError("trajectory CSV: missing initial row");
  if (rows[0].n != 0 || rows[0].sojourn != 0 || rows[0].cum != 0) {
    throw ParseError("trajectory CSV: row 0 must be the initial state with sojourn 0");
  }

  // State space in order of first appearance, initial state first.
  std::vector<std::string> labels{rows[0].state};
  for (const auto& r : rows) {
    if (std::find(labels.begin(), labels.end(), r.state) == labels.end()) {
      labels.push_back(r.state);
    }
  }
  Trajectory t;
  t.states = StateSpace(std::move(labels));
  t.initial = t.states.index(rows[0].state);
  long long prev_cum = 0;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.n != static_cast<long long>(r) || row.sojourn < 1 ||
        row.cum != prev_cum + row.sojourn) {
      throw ParseError("trajectory CSV: inconsistent jump row n=" + std::to_string(row.n));
    }
    t.jump_state.push_back(t.states.index(row.state));
    t.sojourn.push_back(row.sojourn);
    t.cum_time.push_back(row.cum);
    prev_cum = row.cum;
  }
  t.horizon = horizon.value_or(prev_cum);
  if (t.horizon < prev_cum) {
    throw ParseError("trajectory CSV: horizon " + std::to_string(t.horizon) +
                     " is before the last jump at " + std::to_string(prev_cum));
  }
  return t;
}

}  // namespace smc
