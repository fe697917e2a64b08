#include "smc/kernel.hpp"

#include <cmath>
#include <tuple>

namespace smc {

SemiMarkovKernel::SemiMarkovKernel(StateSpace states, MatrixSequence q)
    : states_(std::move(states)), q_(std::move(q)) {
  if (q_.dim() != states_.size()) {
    throw DimensionMismatch("kernel array dimension " + std::to_string(q_.dim()) +
                            " does not match state count " + std::to_string(states_.size()));
  }
  if (states_.size() < 2) throw InvalidKernel("kernel needs at least 2 states");
  if (q_.horizon() < 1) throw InvalidKernel("kernel support bound k_max must be >= 1");
  validate();
}

void SemiMarkovKernel::validate() const {
  const int n = states_.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (q_.at(i, j, 0) != 0.0) {
        throw InvalidKernel("q_" + states_.label(i) + states_.label(j) +
                            "(0) must be 0");
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    double mass = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k <= q_.horizon(); ++k) {
        double v = q_.at(i, j, k);
        if (v < 0.0 || v > 1.0 || !std::isfinite(v)) {
          throw InvalidKernel("entry q_" + states_.label(i) + states_.label(j) + "(" +
                              std::to_string(k) + ") = " + std::to_string(v) +
                              " out of [0,1]");
        }
        mass += v;
      }
    }
    if (std::abs(mass - 1.0) > 1e-12) {
      throw InvalidKernel("row '" + states_.label(i) + "' has mass " +
                          std::to_string(mass) + ", expected 1");
    }
  }
}

SemiMarkovKernel make_kernel(std::vector<std::string> labels, int k_max,
                             const std::vector<KernelEntry>& entries) {
  StateSpace states(std::move(labels));
  MatrixSequence q(states.size(), k_max);
  for (const auto& e : entries) {
    if (e.k < 0 || e.k > k_max) {
      throw InvalidKernel("sojourn " + std::to_string(e.k) + " outside [0, k_max=" +
                          std::to_string(k_max) + "]");
    }
    q.at(states.index(e.from), states.index(e.to), e.k) += e.p;
  }
  return SemiMarkovKernel(std::move(states), std::move(q));
}

}  // namespace smc
