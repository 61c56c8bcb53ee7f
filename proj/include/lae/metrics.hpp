#pragma once

#include "lae/objectives.hpp"
#include "lae/types.hpp"

namespace lae {

/// 1 - (1/k) sum_i max_j cos^2(U_i, W2_j). Throws on a zero decoder column.
double axis_alignment_distance(const Matrix& decoder, const Matrix& U);

/// 1 - (1/k) ||U^T Q||_F^2 with Q an orthonormal basis of the decoder's
/// column space. Throws if the decoder is rank deficient.
double subspace_distance(const Matrix& decoder, const Matrix& U);

/// Sum of absolute off-diagonal entries.
double non_diagonality(const Matrix& M);

/// ||W1 - W2^T||_F / max(||W1||_F, 1e-300).
double balance_residual(const WeightPair& w);

/// Latent second moment (1/n) W1 X X^T W1^T.
Matrix latent_covariance(const Matrix& encoder, const Gram& g);

/// Smallest gap between distinct diagonal entries of a square matrix.
double min_diagonal_gap(const Matrix& M);

}  // namespace lae
