#include "smc/state_space.hpp"

#include <algorithm>
#include <set>

namespace smc {

StateSpace::StateSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw ParseError("state space needs at least one state");
  std::set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) throw ParseError("duplicate state label '" + l + "'");
  }
}

int StateSpace::index(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ParseError("unknown state label '" + label + "'");
  return static_cast<int>(it - labels_.begin());
}

bool StateSpace::contains(const std::string& label) const {
  return std::find(labels_.begin(), labels_.end(), label) != labels_.end();
}

PartitionUD PartitionUD::from_up_labels(const StateSpace& states,
                                        const std::vector<std::string>& up_labels) {
  if (up_labels.empty()) throw EmptySubset("partition up-set is empty");
  PartitionUD part;
  std::vector<bool> in_up(states.size(), false);
  for (const auto& l : up_labels) {
    int i = states.index(l);
    if (in_up[i]) throw ParseError("state '" + l + "' listed twice in partition");
    in_up[i] = true;
  }
  for (int i = 0; i < states.size(); ++i) {
    (in_up[i] ? part.up : part.down).push_back(i);
  }
  if (part.down.empty()) throw EmptySubset("partition down-set is empty");
  return part;
}

}  // namespace smc
