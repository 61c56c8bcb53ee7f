#include "lae/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace lae {

DataMatrix center(const Matrix& raw, std::string provenance) {
  if (raw.rows() == 0 || raw.cols() == 0) throw std::invalid_argument("center: empty matrix");
  if (!raw.allFinite()) throw std::invalid_argument("center: non-finite entries");
  DataMatrix out;
  out.values = raw.colwise() - raw.rowwise().mean();
  out.centered = true;
  out.provenance = std::move(provenance);
  return out;
}

namespace {

// Orthonormal basis of the column space of a Gaussian draw, with the sign fix
// that makes the distribution Haar.
Matrix orthonormal_columns(Matrix g) {
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(g.rows(), g.cols());
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < g.cols(); ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = dist(rng);
  return g;
}

}  // namespace

void check_identifiable(const Vector& sigma2) {
  const Index k = sigma2.size();
  if (k == 0) throw std::invalid_argument("spectrum: k must be positive");
  for (Index i = 0; i + 1 < k; ++i) {
    double gap = sigma2(i) - sigma2(i + 1);
    if (!(gap > 1e-10 * std::abs(sigma2(i)))) {
      std::ostringstream msg;
      msg << "eigenvalues " << i + 1 << " and " << i + 2 << " are not strictly separated ("
          << sigma2(i) << ", " << sigma2(i + 1) << ")";
      throw IdentifiabilityError(msg.str());
    }
  }
  const double floor = 64 * std::numeric_limits<double>::epsilon() * std::abs(sigma2(0));
  if (!(sigma2(k - 1) > floor))
    throw IdentifiabilityError("eigenvalue " + std::to_string(k) + " is not positive");
}

void canonicalize_signs(Matrix& U) {
  for (Index j = 0; j < U.cols(); ++j) {
    Index arg = 0;
    U.col(j).cwiseAbs().maxCoeff(&arg);
    if (U(arg, j) < 0) U.col(j) = -U.col(j);
  }
}

std::vector<double> descending_range(Index m) {
  std::vector<double> s(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) s[static_cast<std::size_t>(i)] = static_cast<double>(m - i);
  return s;
}

std::vector<double> linspace_desc(double hi, double lo, Index count) {
  std::vector<double> s(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i)
    s[static_cast<std::size_t>(i)] =
        count == 1 ? hi : hi + (lo - hi) * static_cast<double>(i) / static_cast<double>(count - 1);
  return s;
}

std::pair<DataMatrix, Spectrum> make_synthetic(const SyntheticSpec& spec) {
  if (spec.m < 1 || spec.n < 1) throw std::invalid_argument("synthetic: m and n must be positive");
  if (spec.k < 1) throw std::invalid_argument("synthetic: k must be positive");
  const auto& s = spec.singular_values;
  if (s.size() < static_cast<std::size_t>(spec.k))
    throw std::invalid_argument("synthetic: fewer singular values than k");
  if (s.size() > static_cast<std::size_t>(std::min(spec.m, spec.n)))
    throw std::invalid_argument("synthetic: more singular values than min(m, n)");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] >= 0) || !std::isfinite(s[i]))
      throw std::invalid_argument("synthetic: singular values must be finite and non-negative");
    if (i > 0 && s[i] > s[i - 1])
      throw std::invalid_argument("synthetic: singular values must be non-increasing");
  }
  Vector top(spec.k);
  for (Index i = 0; i < spec.k; ++i) top(i) = s[static_cast<std::size_t>(i)] * s[static_cast<std::size_t>(i)];
  try {
    check_identifiable(top);
  } catch (const IdentifiabilityError& e) {
    throw IdentifiabilityError(std::string("synthetic: duplicate or zero top-k singular values: ") + e.what());
  }

  // Trailing zeros contribute nothing; centering leaves n-1 free directions.
  Index r = static_cast<Index>(s.size());
  while (r > spec.k && s[static_cast<std::size_t>(r - 1)] == 0.0) --r;
  if (r > spec.n - 1)
    throw std::invalid_argument("synthetic: centered data supports at most n-1 non-zero singular values");

  std::mt19937_64 rng(spec.seed);
  Matrix u = orthonormal_columns(gaussian(spec.m, r, rng));
  Matrix g = gaussian(spec.n, r, rng);
  g = g.rowwise() - g.colwise().mean();
  Matrix v = orthonormal_columns(g);

  Vector scale(r);
  const double root_n = std::sqrt(static_cast<double>(spec.n));
  for (Index i = 0; i < r; ++i) scale(i) = root_n * s[static_cast<std::size_t>(i)];

  DataMatrix X;
  X.values = u * scale.asDiagonal() * v.transpose();
  X.centered = true;
  std::ostringstream prov;
  prov << "synthetic m=" << spec.m << " n=" << spec.n << " k=" << spec.k << " seed=" << spec.seed;
  X.provenance = prov.str();

  Spectrum truth;
  truth.sigma2 = top;
  truth.U = u.leftCols(spec.k);
  canonicalize_signs(truth.U);
  return {std::move(X), std::move(truth)};
}

Spectrum spectrum_of(const DataMatrix& X, Index k, SpectrumOptions opts) {
  if (!X.centered) throw std::invalid_argument("spectrum_of: data must be centered");
  if (k < 1 || k > std::min(X.m(), X.n()))
    throw std::invalid_argument("spectrum_of: k must lie in [1, min(m, n)]");
  const double n = static_cast<double>(X.n());
  Spectrum out;
  out.sigma2.resize(k);
  if (X.m() <= X.n()) {
    Matrix cov = (X.values * X.values.transpose()) / n;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw std::runtime_error("spectrum_of: eigensolver failed");
    const Index m = X.m();
    out.U.resize(m, k);
    for (Index i = 0; i < k; ++i) {
      out.sigma2(i) = eig.eigenvalues()(m - 1 - i);
      out.U.col(i) = eig.eigenvectors().col(m - 1 - i);
    }
  } else {
    Eigen::BDCSVD<Matrix> svd(X.values / std::sqrt(n), Eigen::ComputeThinU);
    out.sigma2 = svd.singularValues().head(k).array().square();
    out.U = svd.matrixU().leftCols(k);
  }
  canonicalize_signs(out.U);
  if (opts.strict) check_identifiable(out.sigma2);
  return out;
}

}  // namespace lae
