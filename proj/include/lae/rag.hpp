#pragma once

#include "lae/data.hpp"
#include "lae/objectives.hpp"
#include "lae/types.hpp"

namespace lae {

/// Skew-symmetric rotation generator built from the latent second moment.
struct SkewTerm {
  Matrix a;
};

/// A = (1/2)(ut(Y Y^T) - lt(Y Y^T)) for latent codes Y (k x n).
SkewTerm skew_term(const Matrix& latent);
/// Same, from a precomputed Y Y^T.
SkewTerm skew_term_from_second_moment(const Matrix& yyt);

enum class RagTerms { full, rotation_only };

/// Pseudo-gradient whose plain descent step is the RAG update:
/// encoder: grad - (1/n) A W1, decoder: grad + (1/n) W2 A. The loss field
/// holds the reconstruction loss.
ObjectiveValue rag_direction(const WeightPair& w, const Gram& g, RagTerms terms = RagTerms::full);

/// W1 <- (I + (a/n) A) W1 - a grad1, W2 <- W2 (I - (a/n) A) - a grad2.
/// Throws TrainingFault on a non-finite result.
WeightPair rag_step(const WeightPair& w, const Gram& g, double alpha, RagTerms terms = RagTerms::full);

/// Sanger's rule W <- W + (a/n)(Y X^T - LT(Y Y^T) W), diagonal kept in LT.
Matrix gha_step(const Matrix& W, const Gram& g, double alpha);

/// d_i = k - i + 1.
Vector default_lyapunov_weights(Index k);

/// V(W) = Tr((S^2 - W Sigma W^T) D). Requires W W^T = I within orth_tol.
double lyapunov(const Matrix& W, const Gram& g, const Spectrum& spectrum, const Vector& d, double orth_tol = 1e-6);

}  // namespace lae
