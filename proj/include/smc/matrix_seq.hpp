#pragma once

#include <cstddef>
#include <vector>

#include "smc/errors.hpp"

namespace smc {

/// Execution mode for the data-parallel kernels. `serial` is the reference
/// implementation; `parallel` uses OpenMP with a fixed summation order, so
/// results are bit-identical between the two.
enum class Exec { serial, parallel };

/// Coordinate (i, j, k) into a matrix sequence: entry (i,j) at lag k.
struct TripleIndex {
  int i = 0;
  int j = 0;
  int k = 0;
  bool operator==(const TripleIndex&) const = default;
};

/// Finite sequence of square dim x dim matrices A(0..horizon).
/// Layout is lag-major: the matrix at lag k is contiguous.
class MatrixSequence {
 public:
  MatrixSequence() = default;
  MatrixSequence(int dim, int horizon)
      : dim_(dim), horizon_(horizon),
        a_(static_cast<std::size_t>(horizon + 1) * dim * dim, 0.0) {}

  static MatrixSequence delta_identity(int dim, int horizon) {
    MatrixSequence d(dim, horizon);
    for (int i = 0; i < dim; ++i) d.at(i, i, 0) = 1.0;
    return d;
  }

  int dim() const { return dim_; }
  int horizon() const { return horizon_; }

  double& at(int i, int j, int k) {
    return a_[(static_cast<std::size_t>(k) * dim_ + i) * dim_ + j];
  }
  double at(int i, int j, int k) const {
    return a_[(static_cast<std::size_t>(k) * dim_ + i) * dim_ + j];
  }
  /// Entry with zero-extension beyond the stored horizon.
  double at_ext(int i, int j, int k) const {
    return (k >= 0 && k <= horizon_) ? at(i, j, k) : 0.0;
  }

  const double* lag(int k) const { return a_.data() + static_cast<std::size_t>(k) * dim_ * dim_; }
  double* lag(int k) { return a_.data() + static_cast<std::size_t>(k) * dim_ * dim_; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  bool operator==(const MatrixSequence&) const = default;

 private:
  int dim_ = 0;
  int horizon_ = -1;
  std::vector<double> a_;
};

/// Finite sequence of dim-vectors v(0..horizon); per-state series contiguous.
class VectorSequence {
 public:
  VectorSequence() = default;
  VectorSequence(int dim, int horizon)
      : dim_(dim), horizon_(horizon),
        a_(static_cast<std::size_t>(dim) * (horizon + 1), 0.0) {}

  int dim() const { return dim_; }
  int horizon() const { return horizon_; }

  double& at(int i, int k) { return a_[static_cast<std::size_t>(i) * (horizon_ + 1) + k]; }
  double at(int i, int k) const { return a_[static_cast<std::size_t>(i) * (horizon_ + 1) + k]; }

  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

  bool operator==(const VectorSequence&) const = default;

 private:
  int dim_ = 0;
  int horizon_ = -1;
  std::vector<double> a_;
};

}  // namespace smc
