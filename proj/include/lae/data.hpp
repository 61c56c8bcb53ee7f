#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lae/types.hpp"

namespace lae {

/// Data matrix with features in rows and samples in columns.
struct DataMatrix {
  Matrix values;
  bool centered = false;
  std::string provenance;

  Index m() const { return values.rows(); }
  Index n() const { return values.cols(); }
};

/// Top-k eigenpairs of the sample covariance (1/n) X X^T, descending.
struct Spectrum {
  Vector sigma2;
  Matrix U;

  Index k() const { return sigma2.size(); }
  Index m() const { return U.rows(); }
};

struct SyntheticSpec {
  Index m = 0;
  Index n = 0;
  Index k = 0;
  /// Square roots of the covariance eigenvalues, non-increasing.
  std::vector<double> singular_values;
  std::uint64_t seed = 0;
};

/// Subtracts row means. Throws on an empty or non-finite matrix.
DataMatrix center(const Matrix& raw, std::string provenance = "");

/// Draws X = U diag(sqrt(n) s) V^T with seeded orthonormal factors. V is taken
/// orthogonal to the all-ones vector so X is centered exactly. Returns the
/// ground-truth spectrum of the top k components.
std::pair<DataMatrix, Spectrum> make_synthetic(const SyntheticSpec& spec);

/// Singular values m, m-1, ..., 1.
std::vector<double> descending_range(Index m);
/// `count` values equally spaced from hi down to lo.
std::vector<double> linspace_desc(double hi, double lo, Index count);

struct SpectrumOptions {
  bool strict = true;
};

/// Exact PCA oracle. Columns of U are sign-canonicalized so that the
/// largest-magnitude entry is positive.
Spectrum spectrum_of(const DataMatrix& X, Index k, SpectrumOptions opts = {});

/// Flips each column so its largest-magnitude entry is positive.
void canonicalize_signs(Matrix& U);

/// Throws IdentifiabilityError unless sigma2 is strictly descending (relative
/// gap >= 1e-10) and positive.
void check_identifiable(const Vector& sigma2);

enum class DatasetFormat { csv, idx };

DatasetFormat parse_dataset_format(const std::string& name);

/// CSV: one sample per column, optional non-numeric header row.
/// IDX: unsigned-byte tensor; first dimension indexes samples, the rest are
/// flattened row-major into features.
DataMatrix load_dataset(const std::string& path, DatasetFormat format);

}  // namespace lae
