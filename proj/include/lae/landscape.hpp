#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lae/data.hpp"
#include "lae/objectives.hpp"
#include "lae/types.hpp"

namespace lae {

/// Stationary point of the non-uniform objective described by a k x k signed
/// partial permutation P: row r (latent slot) holds at most one +-1, at the
/// column of the principal component it carries; a zero row is an unused slot.
struct StationaryForm {
  Matrix P;
  Vector lambdas;
  Spectrum spectrum;

  /// Validates P's structure, lambda monotonicity, and lambda_k < sigma_k^2.
  static StationaryForm make(const Matrix& P, const Vector& lambdas, const Spectrum& spectrum);
  /// Component indices carried by each slot, -1 for unused slots.
  std::vector<Index> assignment() const;
};

/// Slot r carrying component c gets encoder row sign * sqrt(1 - lambda_r / sigma_c^2) u_c^T;
/// the decoder is the transpose. For diagonal P this is the textbook form.
WeightPair stationary_point(const StationaryForm& form);

/// Ordered global optimum with the given per-component signs.
WeightPair global_optimum(const Spectrum& spectrum, const Vector& lambdas, const Vector& signs);

/// Closed-form loss at the global optimum, computed from the data matrix.
double global_optimum_loss(const DataMatrix& X, const Spectrum& spectrum, const Vector& lambdas);

/// Nested-dropout optimum (diag(q) U^T, U diag(q)^{-1}).
WeightPair nd_global_optimum(const Spectrum& spectrum, const Vector& q);

double nonuniform_cond_lower_bound(const Spectrum& spectrum, Index k);
double nd_cond_lower_bound(const Spectrum& spectrum, Index k);

using GradientFn = std::function<Vector(const Vector&)>;

/// Central-difference curvature probe around a stationary base point.
struct CurvatureProbe {
  GradientFn gradient;
  Vector base;
  double fd_step = 1e-5;
};

/// Builds a probe; the step is fd_rel * (1 + ||base||_inf). Throws
/// NotStationaryError unless ||grad(base)|| <= gate * grad_scale.
CurvatureProbe make_probe(GradientFn gradient, Vector base, double grad_scale, double fd_rel = 1e-5,
                          double gate = 1e-6);

/// v^T H v / v^T v with H v from central differences of the gradient.
double rayleigh_fd(const CurvatureProbe& probe, const Vector& v);

/// Probe of the half-scaled non-uniform objective, the normalization in which
/// the closed-form quotients below are stated.
CurvatureProbe nonuniform_probe(const Gram& g, const Vector& lambdas, const WeightPair& base);
/// Probe of the expected nested-dropout objective.
CurvatureProbe nd_probe(const Gram& g, const NestedDropoutPrior& prior, const WeightPair& base);

/// Scaling direction of latent component c: encoder row c and decoder column c
/// set to the decoder's column c, everything else zero.
Vector scaling_direction(const WeightPair& w, Index c);
/// Tangent of (R W1, W2 R^T) for a Givens rotation in the (i, j) plane.
Vector rotation_direction(const WeightPair& w, Index i, Index j);

struct QuotientPair {
  double scaling = 0;
  double rotation = 0;
};

/// Non-uniform closed forms (0-based, i > j): 2 sigma_1^2 nu_1 and
/// (nu_j - nu_i)(lambda_i - lambda_j)/(nu_i + nu_j), nu = 1 - lambda/sigma^2.
QuotientPair closed_form_quotients(const Spectrum& spectrum, const Vector& lambdas, Index i, Index j);
/// Nested-dropout closed forms (0-based, i < j): 2 p_1 sigma_1^2 and
/// (sigma_i^2 - sigma_j^2)(p_i - p_j)/4.
QuotientPair nd_closed_form_quotients(const Spectrum& spectrum, const NestedDropoutPrior& prior, Index i, Index j);

struct SurfaceGrid {
  Vector alphas;
  Vector thetas;

  /// alphas in [0, alpha_max], thetas in [0, 2 pi], both endpoints included.
  static SurfaceGrid uniform(double alpha_max, Index alpha_count, Index theta_count);
};

struct SurfacePoint {
  double alpha, theta, x, y, loss;
};

/// Loss of W1 = alpha R(theta) diag(nu)^{1/2} U^T, W2 = W1^T under the
/// non-uniform objective. Requires k = 2.
std::vector<SurfacePoint> loss_surface_slice(const Gram& g, const Spectrum& spectrum, const Vector& lambdas,
                                             const SurfaceGrid& grid);

void write_surface_csv(const std::vector<SurfacePoint>& points, const std::string& path);
std::vector<SurfacePoint> read_surface_csv(const std::string& path);

/// Least-squares fit of amplitude cos(2 theta + phase) + offset.
struct CosineFit {
  double amplitude = 0;
  double phase = 0;
  double offset = 0;
  double max_residual = 0;
};
CosineFit fit_cosine_2theta(const Vector& thetas, const Vector& values);

/// Predicted (A cos B, A sin B) for the regularizer along a Givens rotation of
/// slots (i, j) of balanced weights, where the regularizer equals
/// 2 (A cos(2 theta + B)) + const.
struct CosineCoefficients {
  double a_cos_b = 0;
  double a_sin_b = 0;
};
CosineCoefficients rotation_cosine_coefficients(const WeightPair& w, const Vector& lambdas, Index i, Index j);

}  // namespace lae
