#include "lae/rag.hpp"

#include <cmath>

namespace lae {

SkewTerm skew_term_from_second_moment(const Matrix& yyt) {
  if (yyt.rows() != yyt.cols()) throw std::invalid_argument("skew_term: second moment must be square");
  const Index k = yyt.rows();
  SkewTerm s;
  s.a = Matrix::Zero(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < j; ++i) {
      // Both halves come from the same entry so the result is exactly skew.
      double v = 0.5 * yyt(i, j);
      s.a(i, j) = v;
      s.a(j, i) = -v;
    }
  return s;
}

SkewTerm skew_term(const Matrix& latent) { return skew_term_from_second_moment(latent * latent.transpose()); }

ObjectiveValue rag_direction(const WeightPair& w, const Gram& g, RagTerms terms) {
  ObjectiveValue out = eval_recon(w, g);
  if (terms == RagTerms::rotation_only) {
    out.grad_encoder.setZero();
    out.grad_decoder.setZero();
  }
  const double n = static_cast<double>(g.n);
  Matrix yyt = w.encoder * g.xxt * w.encoder.transpose();
  Matrix a = skew_term_from_second_moment(yyt).a;
  out.grad_encoder.noalias() -= (a * w.encoder) / n;
  out.grad_decoder.noalias() += (w.decoder * a) / n;
  return out;
}

WeightPair rag_step(const WeightPair& w, const Gram& g, double alpha, RagTerms terms) {
  if (!(alpha > 0.0)) throw std::invalid_argument("rag_step: alpha must be positive");
  ObjectiveValue d = rag_direction(w, g, terms);
  WeightPair out{w.encoder - alpha * d.grad_encoder, w.decoder - alpha * d.grad_decoder};
  if (!out.encoder.allFinite() || !out.decoder.allFinite()) throw TrainingFault("rag_step: non-finite weights");
  return out;
}

Matrix gha_step(const Matrix& W, const Gram& g, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("gha_step: alpha must be positive");
  if (W.cols() != g.xxt.rows()) throw std::invalid_argument("gha_step: dimension mismatch");
  Matrix yxt = W * g.xxt;
  Matrix yyt = yxt * W.transpose();
  Matrix lower = yyt.triangularView<Eigen::Lower>();
  Matrix out = W + (alpha / static_cast<double>(g.n)) * (yxt - lower * W);
  if (!out.allFinite()) throw TrainingFault("gha_step: non-finite weights");
  return out;
}

Vector default_lyapunov_weights(Index k) {
  Vector d(k);
  for (Index i = 0; i < k; ++i) d(i) = static_cast<double>(k - i);
  return d;
}

double lyapunov(const Matrix& W, const Gram& g, const Spectrum& spectrum, const Vector& d, double orth_tol) {
  const Index k = W.rows();
  if (spectrum.k() < k || d.size() != k || W.cols() != g.xxt.rows())
    throw std::invalid_argument("lyapunov: dimension mismatch");
  for (Index i = 0; i < k; ++i) {
    if (!(d(i) > 0.0)) throw std::invalid_argument("lyapunov: weights must be positive");
    if (i > 0 && !(d(i) < d(i - 1))) throw std::invalid_argument("lyapunov: weights must be strictly descending");
  }
  double off = (W * W.transpose() - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  if (!(off <= orth_tol))
    throw std::invalid_argument("lyapunov: rows are not orthonormal (deviation " + std::to_string(off) + ")");
  Vector latent_var = (W * g.xxt * W.transpose()).diagonal() / static_cast<double>(g.n);
  return d.dot(spectrum.sigma2.head(k) - latent_var);
}

}  // namespace lae
