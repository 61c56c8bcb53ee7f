#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "lae/data.hpp"
#include "lae/types.hpp"

namespace lae {

/// Encoder (k x m) and decoder (m x k).
struct WeightPair {
  Matrix encoder;
  Matrix decoder;

  Index k() const { return encoder.rows(); }
  Index m() const { return encoder.cols(); }
  /// Throws on inconsistent shapes.
  void validate() const;
};

/// Cached second-moment form of a data matrix: X X^T and the sample count.
struct Gram {
  Matrix xxt;
  Index n = 0;

  static Gram of(const DataMatrix& X);
  static Gram of(const Matrix& columns);
  double trace() const { return xxt.trace(); }
  Matrix covariance() const { return xxt / static_cast<double>(n); }
};

/// Truncation prior for nested dropout. pb(b-1) is the probability that
/// units 1..b are kept; keep(i) is the marginal keep probability of unit i+1.
struct NestedDropoutPrior {
  Vector pb;
  Vector keep;

  static NestedDropoutPrior from_pb(const Vector& pb);
  Index k() const { return pb.size(); }
  /// P_L(i, j) = keep(max(i, j)).
  Matrix pairwise_keep() const;
};

/// pb(b) = rho^b (1 - rho) for b < k, remainder at b = k.
NestedDropoutPrior geometric_prior(double rho, Index k);
/// All mass at b = k: nothing is ever dropped.
NestedDropoutPrior never_drop_prior(Index k);

enum class Scheme { none, uniform, nonuniform, nd_stochastic, nd_deterministic, rag };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

struct RegularizerSpec {
  Scheme scheme = Scheme::none;
  double lambda = 0.0;
  Vector lambdas;
  std::optional<NestedDropoutPrior> prior;

  static RegularizerSpec none();
  static RegularizerSpec uniform(double lambda);
  static RegularizerSpec nonuniform(const Vector& lambdas);
  /// lambda_i = s_i^2 with s equally spaced from sqrt_lo to sqrt_hi.
  static RegularizerSpec nonuniform_sqrt_range(double sqrt_lo, double sqrt_hi, Index k);
  static RegularizerSpec nested_dropout(const NestedDropoutPrior& prior, bool deterministic);
  static RegularizerSpec rag();

  /// Checks parameters against latent dimension k.
  void validate(Index k) const;
  /// Non-uniform only: lambda_k < sigma_k^2. Other schemes are always admissible.
  bool admissible_for(const Spectrum& spectrum) const;
};

struct ObjectiveValue {
  double loss = 0.0;
  Matrix grad_encoder;
  Matrix grad_decoder;
};

/// (1/n)||X - W2 W1 X||_F^2.
ObjectiveValue eval_recon(const WeightPair& w, const Gram& g);
/// Value only, same definition as eval_recon.
double recon_loss(const WeightPair& w, const Gram& g);
/// Reconstruction + lambda (||W1||^2 + ||W2||^2).
ObjectiveValue eval_uniform_l2(const WeightPair& w, const Gram& g, double lambda);
/// Reconstruction + ||Lambda^{1/2} W1||^2 + ||W2 Lambda^{1/2}||^2.
ObjectiveValue eval_nonuniform_l2(const WeightPair& w, const Gram& g, const Vector& lambdas);
/// Expected nested-dropout loss (carries the 1/(2n) scale).
ObjectiveValue eval_det_nd(const WeightPair& w, const Gram& g, const NestedDropoutPrior& prior);
/// (1/(2n)) sum_c ||x_c - W2 trunc_{b_c}(W1 x_c)||^2 with units past b_c zeroed.
/// b_c ranges over 0..k; 0 drops every unit.
ObjectiveValue eval_truncated(const WeightPair& w, const Matrix& X, std::span<const Index> truncation);
/// One Monte-Carlo draw of the stochastic nested-dropout loss.
ObjectiveValue sample_stoch_nd(const WeightPair& w, const Matrix& X, const NestedDropoutPrior& prior,
                               std::uint64_t seed);

/// Deterministic objective for a scheme. Stochastic nested dropout maps to its
/// expectation and RAG to plain reconstruction.
ObjectiveValue evaluate(const RegularizerSpec& spec, const WeightPair& w, const Gram& g);

}  // namespace lae
