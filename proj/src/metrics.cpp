#include "lae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lae {

double axis_alignment_distance(const Matrix& decoder, const Matrix& U) {
  if (decoder.rows() != U.rows() || decoder.cols() == 0 || U.cols() == 0)
    throw std::invalid_argument("d_align: shape mismatch");
  Vector col_norm2 = decoder.colwise().squaredNorm();
  for (Index j = 0; j < col_norm2.size(); ++j)
    if (!(col_norm2(j) > 0.0)) throw std::invalid_argument("d_align: decoder column " + std::to_string(j) + " is zero");
  Vector u_norm2 = U.colwise().squaredNorm();
  Matrix cos2 = (U.transpose() * decoder).array().square().matrix();
  double total = 0.0;
  for (Index i = 0; i < cos2.rows(); ++i) {
    double best = 0.0;
    for (Index j = 0; j < cos2.cols(); ++j) best = std::max(best, cos2(i, j) / (u_norm2(i) * col_norm2(j)));
    total += best;
  }
  return std::clamp(1.0 - total / static_cast<double>(U.cols()), 0.0, 1.0);
}

double subspace_distance(const Matrix& decoder, const Matrix& U) {
  if (decoder.rows() != U.rows() || decoder.cols() == 0) throw std::invalid_argument("d_sub: shape mismatch");
  const Index k = decoder.cols();
  Eigen::JacobiSVD<Matrix> svd(decoder, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double tol = static_cast<double>(std::max(decoder.rows(), k)) * std::numeric_limits<double>::epsilon() * s(0);
  if (!(s(k - 1) > tol)) throw std::invalid_argument("d_sub: decoder is rank deficient");
  Matrix overlap = U.transpose() * svd.matrixU();
  // Clamp rounding below zero when the subspaces coincide.
  return std::clamp(1.0 - overlap.squaredNorm() / static_cast<double>(U.cols()), 0.0, 1.0);
}

double non_diagonality(const Matrix& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("non_diagonality: matrix must be square");
  return M.cwiseAbs().sum() - M.diagonal().cwiseAbs().sum();
}

double balance_residual(const WeightPair& w) {
  w.validate();
  return (w.encoder - w.decoder.transpose()).norm() / std::max(w.encoder.norm(), 1e-300);
}

Matrix latent_covariance(const Matrix& encoder, const Gram& g) {
  return encoder * g.xxt * encoder.transpose() / static_cast<double>(g.n);
}

double min_diagonal_gap(const Matrix& M) {
  if (M.rows() < 2) throw std::invalid_argument("min_diagonal_gap: need at least two entries");
  double gap = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = i + 1; j < M.rows(); ++j) gap = std::min(gap, std::abs(M(i, i) - M(j, j)));
  return gap;
}

}  // namespace lae
