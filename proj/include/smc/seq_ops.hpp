#pragma once

#include <vector>

#include "smc/matrix_seq.hpp"

namespace smc {

/// Matrix-sequence convolution on [0, horizon]:
///   (A * B)(k) = sum_{l=0..k} A(l) B(k-l),
/// reading inputs as zero beyond their own horizons. Entries for distinct k
/// are independent, which is what the parallel path exploits.
MatrixSequence convolve(const MatrixSequence& a, const MatrixSequence& b, int horizon,
                        Exec exec = Exec::parallel);

/// Convolution of a matrix sequence with a vector sequence:
///   (A * v)_i(k) = sum_{l<=k} sum_u A_iu(l) v_u(k-l).
VectorSequence convolve_mv(const MatrixSequence& a, const VectorSequence& v, int horizon,
                           Exec exec = Exec::parallel);

/// n-fold convolution power: A^(0) = deltaI, A^(n) = A * A^(n-1).
MatrixSequence n_fold(const MatrixSequence& a, int n, int horizon,
                      Exec exec = Exec::parallel);

/// Convolution inverse of (deltaI - A) for A with A(0) = 0, solved by the
/// renewal recursion psi(0) = I, psi(k) = sum_{l=1..k} A(l) psi(k-l).
/// Equals the Neumann sum of all convolution powers of A.
MatrixSequence conv_inverse_of_delta_minus(const MatrixSequence& a, int horizon);

/// Diagonal tail-mass operator:
///   (S A)_ij(k) = 1{i=j} (row_mass_i - sum_{j'} sum_{k'<=k} A_ij'(k')).
/// For a kernel row_mass is 1 per row and (S q)_ii(k) = P_i(X_1 > k).
/// Throws NegativeTail if a computed tail drops below -1e-12.
MatrixSequence survival(const MatrixSequence& a, const std::vector<double>& row_mass,
                        int horizon, Exec exec = Exec::parallel);

/// Entrywise restriction to a sub-space given by retained indices (in order).
MatrixSequence restrict_to(const MatrixSequence& a, const std::vector<int>& subset);

/// Diagonal restriction: the vector sequence (A_ii(k)) for i in the subset.
VectorSequence diag_restrict(const MatrixSequence& a, const std::vector<int>& subset);

/// Sum over columns: (A 1)_i(k). Used to turn matrix-with-diagonal products
/// into vector sequences.
VectorSequence row_sums(const MatrixSequence& a);

}  // namespace smc
