#pragma once

#include <string>
#include <vector>

#include "smc/errors.hpp"

namespace smc {

/// Ordered finite state space. The label <-> index bijection is fixed at
/// construction and shared by every object built on top of it.
class StateSpace {
 public:
  StateSpace() = default;
  explicit StateSpace(std::vector<std::string> labels);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int i) const { return labels_.at(static_cast<std::size_t>(i)); }
  const std::vector<std::string>& labels() const { return labels_; }

  /// Index of a label; throws ParseError if unknown.
  int index(const std::string& label) const;
  bool contains(const std::string& label) const;

  bool operator==(const StateSpace& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
};

/// Nontrivial partition E = U (up) + D (down), stored as index lists.
struct PartitionUD {
  std::vector<int> up;
  std::vector<int> down;

  /// Builds the partition from the up-set labels; the rest of the space is D.
  static PartitionUD from_up_labels(const StateSpace& states,
                                    const std::vector<std::string>& up_labels);
};

}  // namespace smc
