#include "lae/landscape.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lae/optimizers.hpp"

namespace lae {

StationaryForm StationaryForm::make(const Matrix& P, const Vector& lambdas, const Spectrum& spectrum) {
  const Index k = P.rows();
  if (P.cols() != k) throw std::invalid_argument("stationary form: P must be square");
  if (spectrum.k() < k) throw std::invalid_argument("stationary form: spectrum has fewer than k components");
  RegularizerSpec::nonuniform(lambdas).validate(k);
  if (!(lambdas(k - 1) < spectrum.sigma2(k - 1)))
    throw std::invalid_argument("stationary form: lambda_k must be below sigma_k^2");
  std::vector<int> used(static_cast<std::size_t>(k), 0);
  for (Index r = 0; r < k; ++r) {
    int nonzero = 0;
    for (Index c = 0; c < k; ++c) {
      double v = P(r, c);
      if (v == 0.0) continue;
      if (v != 1.0 && v != -1.0) throw std::invalid_argument("stationary form: P entries must be 0 or +-1");
      ++nonzero;
      if (++used[static_cast<std::size_t>(c)] > 1)
        throw std::invalid_argument("stationary form: component used by two slots");
      if (!(lambdas(r) < spectrum.sigma2(c)))
        throw std::invalid_argument("stationary form: slot lambda must be below its component's eigenvalue");
    }
    if (nonzero > 1) throw std::invalid_argument("stationary form: more than one non-zero per row of P");
  }
  return StationaryForm{P, lambdas, spectrum};
}

std::vector<Index> StationaryForm::assignment() const {
  std::vector<Index> out(static_cast<std::size_t>(P.rows()), -1);
  for (Index r = 0; r < P.rows(); ++r)
    for (Index c = 0; c < P.cols(); ++c)
      if (P(r, c) != 0.0) out[static_cast<std::size_t>(r)] = c;
  return out;
}

WeightPair stationary_point(const StationaryForm& form) {
  const Index k = form.P.rows();
  const Index m = form.spectrum.m();
  Matrix enc = Matrix::Zero(k, m);
  auto slots = form.assignment();
  for (Index r = 0; r < k; ++r) {
    Index c = slots[static_cast<std::size_t>(r)];
    if (c < 0) continue;
    double scale = std::sqrt(1.0 - form.lambdas(r) / form.spectrum.sigma2(c));
    enc.row(r) = form.P(r, c) * scale * form.spectrum.U.col(c).transpose();
  }
  return WeightPair{enc, enc.transpose()};
}

WeightPair global_optimum(const Spectrum& spectrum, const Vector& lambdas, const Vector& signs) {
  const Index k = lambdas.size();
  if (signs.size() != k) throw std::invalid_argument("global optimum: need one sign per component");
  for (Index i = 0; i < k; ++i)
    if (signs(i) != 1.0 && signs(i) != -1.0) throw std::invalid_argument("global optimum: signs must be +-1");
  Matrix P = signs.asDiagonal();
  return stationary_point(StationaryForm::make(P, lambdas, spectrum));
}

double global_optimum_loss(const DataMatrix& X, const Spectrum& spectrum, const Vector& lambdas) {
  const Index k = lambdas.size();
  Vector nu = (1.0 - lambdas.array() / spectrum.sigma2.head(k).array()).matrix();
  const Matrix& U = spectrum.U.leftCols(k);
  Matrix residual = X.values - U * nu.asDiagonal() * (U.transpose() * X.values);
  return residual.squaredNorm() / static_cast<double>(X.n()) + 2.0 * lambdas.dot(nu);
}

WeightPair nd_global_optimum(const Spectrum& spectrum, const Vector& q) {
  const Index k = q.size();
  if (k > spectrum.k()) throw std::invalid_argument("nd optimum: q longer than spectrum");
  for (Index i = 0; i < k; ++i)
    if (q(i) == 0.0 || !std::isfinite(q(i))) throw std::invalid_argument("nd optimum: q entries must be non-zero");
  Matrix Ut = spectrum.U.leftCols(k).transpose();
  return WeightPair{q.asDiagonal() * Ut, Ut.transpose() * q.cwiseInverse().asDiagonal()};
}

double nonuniform_cond_lower_bound(const Spectrum& spectrum, Index k) {
  if (k < 2) throw std::invalid_argument("nonuniform bound: k must be at least 2");
  if (k > spectrum.k()) throw std::invalid_argument("nonuniform bound: k exceeds spectrum size");
  const Vector& s2 = spectrum.sigma2;
  double sum = 0.0;
  for (Index i = 1; i < k - 1; ++i) sum += s2(i) - s2(k - 1);
  return 2.0 * static_cast<double>(k - 1) * (s2(0) - s2(k - 1)) * sum / (s2(0) * s2(k - 1));
}

double nd_cond_lower_bound(const Spectrum& spectrum, Index k) {
  if (k < 2) throw std::invalid_argument("nd bound: k must be at least 2");
  if (k > spectrum.k()) throw std::invalid_argument("nd bound: k exceeds spectrum size");
  const Vector& s2 = spectrum.sigma2;
  if (!(s2(0) > s2(k - 1))) throw std::invalid_argument("nd bound: sigma_1 must exceed sigma_k");
  const double km1 = static_cast<double>(k - 1);
  return 8.0 * s2(0) * km1 * km1 / (s2(0) - s2(k - 1));
}

CurvatureProbe make_probe(GradientFn gradient, Vector base, double grad_scale, double fd_rel, double gate) {
  Vector g0 = gradient(base);
  double gn = g0.norm();
  if (!(gn <= gate * grad_scale)) {
    std::ostringstream msg;
    msg << "probe base point is not stationary: gradient norm " << gn << " exceeds " << gate * grad_scale;
    throw NotStationaryError(msg.str());
  }
  CurvatureProbe p;
  p.fd_step = fd_rel * (1.0 + base.lpNorm<Eigen::Infinity>());
  p.gradient = std::move(gradient);
  p.base = std::move(base);
  return p;
}

double rayleigh_fd(const CurvatureProbe& probe, const Vector& v) {
  if (v.size() != probe.base.size()) throw std::invalid_argument("rayleigh_fd: direction size mismatch");
  double vn = v.norm();
  if (!(vn > 0.0)) throw std::invalid_argument("rayleigh_fd: zero direction");
  Vector u = v / vn;
  const double eps = probe.fd_step;
  Vector plus = probe.base + eps * u;
  Vector minus = probe.base - eps * u;
  if ((plus - minus).norm() < eps) throw std::invalid_argument("rayleigh_fd: step underflows relative to the base point");
  Vector hv = (probe.gradient(plus) - probe.gradient(minus)) / (2.0 * eps);
  return u.dot(hv);
}

CurvatureProbe nonuniform_probe(const Gram& g, const Vector& lambdas, const WeightPair& base) {
  const Index k = base.k();
  const Index m = base.m();
  auto grad = [g, lambdas, k, m](const Vector& theta) {
    ObjectiveValue v = eval_nonuniform_l2(unflatten(theta, k, m), g, lambdas);
    return Vector(0.5 * flatten(WeightPair{v.grad_encoder, v.grad_decoder}));
  };
  return make_probe(grad, flatten(base), std::max(1.0, g.covariance().norm()));
}

CurvatureProbe nd_probe(const Gram& g, const NestedDropoutPrior& prior, const WeightPair& base) {
  const Index k = base.k();
  const Index m = base.m();
  auto grad = [g, prior, k, m](const Vector& theta) {
    ObjectiveValue v = eval_det_nd(unflatten(theta, k, m), g, prior);
    return flatten(WeightPair{v.grad_encoder, v.grad_decoder});
  };
  return make_probe(grad, flatten(base), std::max(1.0, g.covariance().norm()));
}

Vector scaling_direction(const WeightPair& w, Index c) {
  if (c < 0 || c >= w.k()) throw std::invalid_argument("scaling direction: component out of range");
  WeightPair d{Matrix::Zero(w.k(), w.m()), Matrix::Zero(w.m(), w.k())};
  d.decoder.col(c) = w.decoder.col(c);
  d.encoder.row(c) = w.decoder.col(c).transpose();
  return flatten(d);
}

Vector rotation_direction(const WeightPair& w, Index i, Index j) {
  if (i == j || i < 0 || j < 0 || i >= w.k() || j >= w.k())
    throw std::invalid_argument("rotation direction: invalid pair");
  Matrix J = Matrix::Zero(w.k(), w.k());
  J(i, j) = -1.0;
  J(j, i) = 1.0;
  return flatten(WeightPair{J * w.encoder, w.decoder * J.transpose()});
}

QuotientPair closed_form_quotients(const Spectrum& spectrum, const Vector& lambdas, Index i, Index j) {
  const Index k = lambdas.size();
  if (!(i > j) || j < 0 || i >= k) throw std::invalid_argument("closed-form quotients: need 0 <= j < i < k");
  if (k > spectrum.k() || !(lambdas(k - 1) < spectrum.sigma2(k - 1)))
    throw std::invalid_argument("closed-form quotients: lambda_k must be below sigma_k^2");
  auto nu = [&](Index r) { return 1.0 - lambdas(r) / spectrum.sigma2(r); };
  QuotientPair q;
  q.scaling = 2.0 * spectrum.sigma2(0) * nu(0);
  q.rotation = (nu(j) - nu(i)) * (lambdas(i) - lambdas(j)) / (nu(i) + nu(j));
  return q;
}

QuotientPair nd_closed_form_quotients(const Spectrum& spectrum, const NestedDropoutPrior& prior, Index i, Index j) {
  const Index k = prior.k();
  if (!(i < j) || i < 0 || j >= k || k > spectrum.k())
    throw std::invalid_argument("nd closed-form quotients: need 0 <= i < j < k");
  QuotientPair q;
  q.scaling = 2.0 * prior.keep(0) * spectrum.sigma2(0);
  q.rotation = (spectrum.sigma2(i) - spectrum.sigma2(j)) * (prior.keep(i) - prior.keep(j)) / 4.0;
  return q;
}

SurfaceGrid SurfaceGrid::uniform(double alpha_max, Index alpha_count, Index theta_count) {
  if (alpha_count < 2 || theta_count < 2 || !(alpha_max > 0.0))
    throw std::invalid_argument("surface grid: need at least 2 points per axis and a positive extent");
  SurfaceGrid g;
  g.alphas.resize(alpha_count);
  g.thetas.resize(theta_count);
  for (Index i = 0; i < alpha_count; ++i)
    g.alphas(i) = alpha_max * static_cast<double>(i) / static_cast<double>(alpha_count - 1);
  for (Index i = 0; i < theta_count; ++i)
    g.thetas(i) = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(theta_count - 1);
  return g;
}

std::vector<SurfacePoint> loss_surface_slice(const Gram& g, const Spectrum& spectrum, const Vector& lambdas,
                                             const SurfaceGrid& grid) {
  if (lambdas.size() != 2) throw std::invalid_argument("surface slice: requires k = 2");
  WeightPair opt = global_optimum(spectrum, lambdas, Vector::Ones(2));
  std::vector<SurfacePoint> out;
  out.reserve(static_cast<std::size_t>(grid.alphas.size() * grid.thetas.size()));
  for (Index a = 0; a < grid.alphas.size(); ++a)
    for (Index t = 0; t < grid.thetas.size(); ++t) {
      const double alpha = grid.alphas(a);
      const double theta = grid.thetas(t);
      Matrix R(2, 2);
      R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
      Matrix enc = alpha * R * opt.encoder;
      double loss = eval_nonuniform_l2(WeightPair{enc, enc.transpose()}, g, lambdas).loss;
      out.push_back({alpha, theta, alpha * std::cos(theta), alpha * std::sin(theta), loss});
    }
  return out;
}

void write_surface_csv(const std::vector<SurfacePoint>& points, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "alpha,theta,x,y,loss\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.alpha, p.theta, p.x, p.y, p.loss);
    out << buf;
  }
}

std::vector<SurfacePoint> read_surface_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (line != "alpha,theta,x,y,loss") throw std::runtime_error("surface csv: unexpected header");
  std::vector<SurfacePoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double v[5];
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (int f = 0; f < 5; ++f) {
      auto res = std::from_chars(p, end, v[f]);
      if (res.ec != std::errc()) throw std::runtime_error("surface csv: bad number in line: " + line);
      p = res.ptr;
      if (f < 4) {
        if (p == end || *p != ',') throw std::runtime_error("surface csv: missing field in line: " + line);
        ++p;
      }
    }
    out.push_back({v[0], v[1], v[2], v[3], v[4]});
  }
  return out;
}

CosineFit fit_cosine_2theta(const Vector& thetas, const Vector& values) {
  if (thetas.size() != values.size() || thetas.size() < 3) throw std::invalid_argument("cosine fit: need >= 3 samples");
  Matrix A(thetas.size(), 3);
  for (Index i = 0; i < thetas.size(); ++i) A.row(i) << std::cos(2 * thetas(i)), std::sin(2 * thetas(i)), 1.0;
  Vector c = A.colPivHouseholderQr().solve(values);
  CosineFit fit;
  fit.amplitude = std::hypot(c(0), c(1));
  fit.phase = std::atan2(-c(1), c(0));
  fit.offset = c(2);
  fit.max_residual = (A * c - values).lpNorm<Eigen::Infinity>();
  return fit;
}

CosineCoefficients rotation_cosine_coefficients(const WeightPair& w, const Vector& lambdas, Index i, Index j) {
  if (i == j || i < 0 || j < 0 || i >= w.k() || j >= w.k() || lambdas.size() != w.k())
    throw std::invalid_argument("cosine coefficients: invalid pair");
  // Encoder rows and decoder columns rotate identically; average them.
  auto inner = [&](Index a, Index b) {
    return 0.5 * (w.encoder.row(a).dot(w.encoder.row(b)) + w.decoder.col(a).dot(w.decoder.col(b)));
  };
  const double dl = lambdas(j) - lambdas(i);
  return {0.5 * dl * (inner(j, j) - inner(i, i)), -dl * inner(i, j)};
}

}  // namespace lae
