#include "lae/objectives.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace lae {

void WeightPair::validate() const {
  if (encoder.rows() == 0 || encoder.cols() == 0) throw std::invalid_argument("weights: empty encoder");
  if (decoder.rows() != encoder.cols() || decoder.cols() != encoder.rows())
    throw std::invalid_argument("weights: encoder is " + std::to_string(encoder.rows()) + "x" +
                                std::to_string(encoder.cols()) + " but decoder is " +
                                std::to_string(decoder.rows()) + "x" + std::to_string(decoder.cols()));
}

Gram Gram::of(const DataMatrix& X) { return of(X.values); }

Gram Gram::of(const Matrix& columns) {
  Gram g;
  g.xxt.noalias() = columns * columns.transpose();
  g.n = columns.cols();
  return g;
}

NestedDropoutPrior NestedDropoutPrior::from_pb(const Vector& pb) {
  if (pb.size() == 0) throw std::invalid_argument("prior: empty pb");
  double total = 0.0;
  for (Index i = 0; i < pb.size(); ++i) {
    if (!(pb(i) >= 0.0) || !std::isfinite(pb(i))) throw std::invalid_argument("prior: pb must be non-negative");
    total += pb(i);
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("prior: pb must sum to 1");
  NestedDropoutPrior p;
  p.pb = pb;
  p.keep.resize(pb.size());
  double dropped = 0.0;
  for (Index i = 0; i < pb.size(); ++i) {
    p.keep(i) = 1.0 - dropped;
    dropped += pb(i);
  }
  if (!(p.keep(pb.size() - 1) > 0.0)) throw std::invalid_argument("prior: last unit is never kept");
  return p;
}

Matrix NestedDropoutPrior::pairwise_keep() const {
  const Index k = keep.size();
  Matrix pl(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < k; ++i) pl(i, j) = keep(std::max(i, j));
  return pl;
}

NestedDropoutPrior geometric_prior(double rho, Index k) {
  if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("geometric prior: rho must lie in (0, 1)");
  if (k < 1) throw std::invalid_argument("geometric prior: k must be positive");
  Vector pb(k);
  double partial = 0.0;
  double power = 1.0;
  for (Index b = 1; b < k; ++b) {
    power *= rho;
    pb(b - 1) = power * (1.0 - rho);
    partial += pb(b - 1);
  }
  pb(k - 1) = 1.0 - partial;
  return NestedDropoutPrior::from_pb(pb);
}

NestedDropoutPrior never_drop_prior(Index k) {
  if (k < 1) throw std::invalid_argument("prior: k must be positive");
  Vector pb = Vector::Zero(k);
  pb(k - 1) = 1.0;
  return NestedDropoutPrior::from_pb(pb);
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::none: return "none";
    case Scheme::uniform: return "uniform";
    case Scheme::nonuniform: return "nonuniform";
    case Scheme::nd_stochastic: return "nested_dropout_stochastic";
    case Scheme::nd_deterministic: return "nested_dropout_deterministic";
    case Scheme::rag: return "rag";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::none, Scheme::uniform, Scheme::nonuniform, Scheme::nd_stochastic,
                   Scheme::nd_deterministic, Scheme::rag})
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

RegularizerSpec RegularizerSpec::none() { return {}; }

RegularizerSpec RegularizerSpec::uniform(double lambda) {
  RegularizerSpec r;
  r.scheme = Scheme::uniform;
  r.lambda = lambda;
  return r;
}

RegularizerSpec RegularizerSpec::nonuniform(const Vector& lambdas) {
  RegularizerSpec r;
  r.scheme = Scheme::nonuniform;
  r.lambdas = lambdas;
  return r;
}

RegularizerSpec RegularizerSpec::nonuniform_sqrt_range(double sqrt_lo, double sqrt_hi, Index k) {
  Vector l(k);
  for (Index i = 0; i < k; ++i) {
    double s = k == 1 ? sqrt_lo : sqrt_lo + (sqrt_hi - sqrt_lo) * static_cast<double>(i) / static_cast<double>(k - 1);
    l(i) = s * s;
  }
  return nonuniform(l);
}

RegularizerSpec RegularizerSpec::nested_dropout(const NestedDropoutPrior& prior, bool deterministic) {
  RegularizerSpec r;
  r.scheme = deterministic ? Scheme::nd_deterministic : Scheme::nd_stochastic;
  r.prior = prior;
  return r;
}

RegularizerSpec RegularizerSpec::rag() {
  RegularizerSpec r;
  r.scheme = Scheme::rag;
  return r;
}

void RegularizerSpec::validate(Index k) const {
  switch (scheme) {
    case Scheme::uniform:
      if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("uniform: lambda must be >= 0");
      break;
    case Scheme::nonuniform:
      if (lambdas.size() != k)
        throw std::invalid_argument("nonuniform: expected " + std::to_string(k) + " lambdas, got " +
                                    std::to_string(lambdas.size()));
      for (Index i = 0; i < k; ++i) {
        if (!(lambdas(i) > 0.0) || !std::isfinite(lambdas(i)))
          throw std::invalid_argument("nonuniform: lambdas must be positive");
        if (i > 0 && !(lambdas(i) > lambdas(i - 1)))
          throw std::invalid_argument("nonuniform: lambdas must be strictly increasing");
      }
      break;
    case Scheme::nd_stochastic:
    case Scheme::nd_deterministic:
      if (!prior) throw std::invalid_argument("nested dropout: prior missing");
      if (prior->k() != k)
        throw std::invalid_argument("nested dropout: prior has " + std::to_string(prior->k()) + " units, expected " +
                                    std::to_string(k));
      break;
    case Scheme::none:
    case Scheme::rag:
      break;
  }
}

bool RegularizerSpec::admissible_for(const Spectrum& spectrum) const {
  if (scheme != Scheme::nonuniform) return true;
  const Index k = lambdas.size();
  return k <= spectrum.k() && lambdas(k - 1) < spectrum.sigma2(k - 1);
}

namespace {

void check_shapes(const WeightPair& w, const Gram& g) {
  w.validate();
  if (g.xxt.rows() != w.m()) throw std::invalid_argument("weights have input dimension " + std::to_string(w.m()) +
                                                         " but data has " + std::to_string(g.xxt.rows()));
}

// Shared products for the Gram-form objectives.
struct Products {
  Matrix G;  // W1 C, k x m
  Matrix K;  // W1 C W1^T, k x k
  Matrix B;  // W2^T W2, k x k
};

Products products(const WeightPair& w, const Gram& g) {
  Products p;
  p.G.noalias() = w.encoder * g.xxt;
  p.K.noalias() = p.G * w.encoder.transpose();
  p.B.noalias() = w.decoder.transpose() * w.decoder;
  return p;
}

}  // namespace

ObjectiveValue eval_recon(const WeightPair& w, const Gram& g) {
  check_shapes(w, g);
  const double n = static_cast<double>(g.n);
  Products p = products(w, g);
  ObjectiveValue out;
  out.loss = (g.trace() - 2.0 * p.G.cwiseProduct(w.decoder.transpose()).sum() + p.B.cwiseProduct(p.K).sum()) / n;
  out.grad_encoder.noalias() = (2.0 / n) * (p.B * p.G);
  out.grad_encoder.noalias() -= (2.0 / n) * (w.decoder.transpose() * g.xxt);
  out.grad_decoder.noalias() = (2.0 / n) * (w.decoder * p.K);
  out.grad_decoder -= (2.0 / n) * p.G.transpose();
  return out;
}

double recon_loss(const WeightPair& w, const Gram& g) {
  check_shapes(w, g);
  Products p = products(w, g);
  return (g.trace() - 2.0 * p.G.cwiseProduct(w.decoder.transpose()).sum() + p.B.cwiseProduct(p.K).sum()) /
         static_cast<double>(g.n);
}

ObjectiveValue eval_uniform_l2(const WeightPair& w, const Gram& g, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("uniform: lambda must be >= 0");
  ObjectiveValue out = eval_recon(w, g);
  out.loss += lambda * (w.encoder.squaredNorm() + w.decoder.squaredNorm());
  out.grad_encoder += 2.0 * lambda * w.encoder;
  out.grad_decoder += 2.0 * lambda * w.decoder;
  return out;
}

ObjectiveValue eval_nonuniform_l2(const WeightPair& w, const Gram& g, const Vector& lambdas) {
  RegularizerSpec::nonuniform(lambdas).validate(w.k());
  ObjectiveValue out = eval_recon(w, g);
  out.loss += lambdas.dot(w.encoder.rowwise().squaredNorm()) + lambdas.dot(w.decoder.colwise().squaredNorm());
  out.grad_encoder += 2.0 * lambdas.asDiagonal() * w.encoder;
  out.grad_decoder += 2.0 * w.decoder * lambdas.asDiagonal();
  return out;
}

ObjectiveValue eval_det_nd(const WeightPair& w, const Gram& g, const NestedDropoutPrior& prior) {
  check_shapes(w, g);
  if (prior.k() != w.k()) throw std::invalid_argument("nested dropout: prior size does not match latent dimension");
  const double n = static_cast<double>(g.n);
  Products p = products(w, g);
  const Matrix pl = prior.pairwise_keep();
  const Vector& pd = prior.keep;

  Vector cross = p.G.cwiseProduct(w.decoder.transpose()).rowwise().sum();
  Matrix b_masked = p.B.cwiseProduct(pl);
  ObjectiveValue out;
  out.loss = g.trace() / (2.0 * n) - pd.dot(cross) / n + p.K.cwiseProduct(b_masked).sum() / (2.0 * n);
  out.grad_encoder.noalias() = (b_masked * p.G) / n;
  out.grad_encoder.noalias() -= (pd.asDiagonal() * (w.decoder.transpose() * g.xxt)) / n;
  out.grad_decoder.noalias() = (w.decoder * p.K.cwiseProduct(pl)) / n;
  out.grad_decoder -= (p.G.transpose() * pd.asDiagonal()) / n;
  return out;
}

ObjectiveValue eval_truncated(const WeightPair& w, const Matrix& X, std::span<const Index> truncation) {
  w.validate();
  if (X.rows() != w.m()) throw std::invalid_argument("truncated loss: data dimension mismatch");
  if (static_cast<Index>(truncation.size()) != X.cols())
    throw std::invalid_argument("truncated loss: need one truncation index per sample");
  const Index k = w.k();
  const double n = static_cast<double>(X.cols());
  Matrix Y = w.encoder * X;
  for (Index c = 0; c < X.cols(); ++c) {
    Index b = truncation[static_cast<std::size_t>(c)];
    if (b < 0 || b > k) throw std::invalid_argument("truncated loss: index outside 0..k");
    Y.col(c).tail(k - b).setZero();
  }
  Matrix R = w.decoder * Y - X;
  ObjectiveValue out;
  out.loss = R.squaredNorm() / (2.0 * n);
  out.grad_decoder.noalias() = (R * Y.transpose()) / n;
  Matrix back = w.decoder.transpose() * R;
  for (Index c = 0; c < X.cols(); ++c) {
    Index b = truncation[static_cast<std::size_t>(c)];
    back.col(c).tail(k - b).setZero();
  }
  out.grad_encoder.noalias() = (back * X.transpose()) / n;
  return out;
}

ObjectiveValue sample_stoch_nd(const WeightPair& w, const Matrix& X, const NestedDropoutPrior& prior,
                               std::uint64_t seed) {
  if (prior.k() != w.k()) throw std::invalid_argument("nested dropout: prior size does not match latent dimension");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<Index> dist(prior.pb.data(), prior.pb.data() + prior.pb.size());
  std::vector<Index> b(static_cast<std::size_t>(X.cols()));
  for (auto& v : b) v = dist(rng) + 1;
  return eval_truncated(w, X, b);
}

ObjectiveValue evaluate(const RegularizerSpec& spec, const WeightPair& w, const Gram& g) {
  switch (spec.scheme) {
    case Scheme::none:
    case Scheme::rag: return eval_recon(w, g);
    case Scheme::uniform: return eval_uniform_l2(w, g, spec.lambda);
    case Scheme::nonuniform: return eval_nonuniform_l2(w, g, spec.lambdas);
    case Scheme::nd_stochastic:
    case Scheme::nd_deterministic:
      if (!spec.prior) throw std::invalid_argument("nested dropout: prior missing");
      return eval_det_nd(w, g, *spec.prior);
  }
  throw std::logic_error("unhandled scheme");
}

}  // namespace lae
