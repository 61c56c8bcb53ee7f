#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "lae/metrics.hpp"
#include "lae/optimizers.hpp"
#include "lae/rag.hpp"

namespace lae {

Vector flatten(const WeightPair& w) {
  Vector theta(w.encoder.size() + w.decoder.size());
  theta.head(w.encoder.size()) = Eigen::Map<const Vector>(w.encoder.data(), w.encoder.size());
  theta.tail(w.decoder.size()) = Eigen::Map<const Vector>(w.decoder.data(), w.decoder.size());
  return theta;
}

WeightPair unflatten(const Vector& theta, Index k, Index m) {
  if (theta.size() != 2 * k * m) throw std::invalid_argument("unflatten: size mismatch");
  WeightPair w;
  w.encoder = Eigen::Map<const Matrix>(theta.data(), k, m);
  w.decoder = Eigen::Map<const Matrix>(theta.data() + k * m, m, k);
  return w;
}

WeightPair random_weights(Index k, Index m, double std, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, std);
  WeightPair w{Matrix(k, m), Matrix(m, k)};
  for (Index i = 0; i < w.encoder.size(); ++i) w.encoder.data()[i] = dist(rng);
  for (Index i = 0; i < w.decoder.size(); ++i) w.decoder.data()[i] = dist(rng);
  return w;
}

void TrainConfig::validate(Index n, Index k) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha: must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum: must lie in [0, 1)");
  if (epochs < 0) throw std::invalid_argument("epochs: must be non-negative");
  if (eval_every < 1) throw std::invalid_argument("eval_every: must be positive");
  if (batch_size < 0 || batch_size > n) throw std::invalid_argument("batch_size: must lie in [1, n] or be full");
  if (!(init_std > 0.0)) throw std::invalid_argument("init_std: must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw std::invalid_argument("adam_betas: must lie in [0, 1)");
  if (!(adam.eps > 0.0)) throw std::invalid_argument("adam_eps: must be positive");
  if (optimizer == Optimizer::rag_plain && scheme.scheme != Scheme::rag)
    throw std::invalid_argument("optimizer: rag_plain requires scheme rag");
  if (optimizer == Optimizer::adam && scheme.scheme == Scheme::rag)
    throw std::invalid_argument("optimizer: adam is not supported with scheme rag");
  scheme.validate(k);
}

std::vector<std::vector<Index>> epoch_batches(Index n, Index batch_size, std::mt19937_64& rng) {
  if (n < 1 || batch_size < 1) throw std::invalid_argument("epoch_batches: n and batch_size must be positive");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<Index>> out;
  for (Index s = 0; s < n; s += batch_size)
    out.emplace_back(order.begin() + s, order.begin() + std::min(n, s + batch_size));
  return out;
}

TraceRecord evaluate_record(const WeightPair& w, const Gram& g, const Spectrum& spectrum, const RegularizerSpec& scheme) {
  TraceRecord r;
  r.recon_loss = recon_loss(w, g);
  r.total_loss = scheme.scheme == Scheme::none || scheme.scheme == Scheme::rag ? r.recon_loss
                                                                                : evaluate(scheme, w, g).loss;
  r.d_align = axis_alignment_distance(w.decoder, spectrum.U);
  r.d_sub = subspace_distance(w.decoder, spectrum.U);
  r.nd = non_diagonality(latent_covariance(w.encoder, g));
  r.balance_residual = balance_residual(w);
  return r;
}

namespace {

bool record_finite(const TraceRecord& r) {
  return std::isfinite(r.recon_loss) && std::isfinite(r.total_loss) && std::isfinite(r.d_align) &&
         std::isfinite(r.d_sub) && std::isfinite(r.nd) && std::isfinite(r.balance_residual);
}

struct Batch {
  Gram gram;
  Matrix columns;  // only filled for the stochastic scheme
};

}  // namespace

TrainResult train(const DataMatrix& X, const Spectrum& spectrum, const TrainConfig& config) {
  const Index k = spectrum.k();
  const Index m = X.m();
  const Index n = X.n();
  if (spectrum.m() != m) throw std::invalid_argument("spectrum: dimension does not match data");
  config.validate(n, k);

  const auto start = std::chrono::steady_clock::now();
  const Gram full = Gram::of(X);
  const bool stochastic = config.scheme.scheme == Scheme::nd_stochastic;
  const bool full_batch = config.batch_size == 0 || config.batch_size == n;

  // Separate streams: one for initialization, one for shuffles and masks.
  std::mt19937_64 run_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const WeightPair init = random_weights(k, m, config.init_std, config.seed);

  auto gradient = [&](const Vector& theta, const Batch& batch, double& loss) -> Vector {
    WeightPair w = unflatten(theta, k, m);
    ObjectiveValue v;
    if (config.scheme.scheme == Scheme::rag) {
      v = rag_direction(w, batch.gram);
    } else if (stochastic) {
      const Matrix& cols = full_batch ? X.values : batch.columns;
      v = sample_stoch_nd(w, cols, *config.scheme.prior, run_rng());
    } else {
      v = evaluate(config.scheme, w, batch.gram);
    }
    loss = v.loss;
    return flatten(WeightPair{std::move(v.grad_encoder), std::move(v.grad_decoder)});
  };

  TrainResult result;
  auto elapsed = [&] {
    return config.record_wall_time
               ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
               : 0.0;
  };
  auto record = [&](const Vector& theta, long epoch) {
    WeightPair w = unflatten(theta, k, m);
    TraceRecord r;
    try {
      r = evaluate_record(w, full, spectrum, config.scheme);
    } catch (const std::invalid_argument& e) {
      result.diverged = true;
      result.fault = std::string("degenerate weights: ") + e.what();
      return false;
    }
    if (!record_finite(r)) {
      result.diverged = true;
      result.fault = "non-finite metrics";
      return false;
    }
    r.epoch = epoch;
    r.wall_time_s = elapsed();
    result.trace.records.push_back(r);
    return true;
  };

  Vector theta = flatten(init);
  NesterovState nesterov(theta);
  AdamState adam(theta);
  auto params = [&]() -> Vector& { return config.optimizer == Optimizer::adam ? adam.params : nesterov.params; };

  Batch full_batch_data{full, Matrix()};

  bool ok = record(params(), 0);
  Vector last_good = params();
  for (long epoch = 1; ok && epoch <= config.epochs; ++epoch) {
    std::vector<std::vector<Index>> batches;
    if (full_batch)
      batches.emplace_back();
    else
      batches = epoch_batches(n, config.batch_size, run_rng);
    for (const auto& members : batches) {
      Batch mini;
      const Batch* batch = &full_batch_data;
      if (!full_batch) {
        mini.columns.resize(m, static_cast<Index>(members.size()));
        for (std::size_t c = 0; c < members.size(); ++c) mini.columns.col(static_cast<Index>(c)) = X.values.col(members[c]);
        mini.gram = Gram::of(mini.columns);
        batch = &mini;
      }
      double loss = 0.0;
      switch (config.optimizer) {
        case Optimizer::nesterov: {
          Vector g = gradient(nesterov.lookahead(config.momentum), *batch, loss);
          nesterov_step(nesterov, g, config.alpha, config.momentum);
          break;
        }
        case Optimizer::adam: {
          Vector g = gradient(adam.params, *batch, loss);
          adam_step(adam, g, config.alpha, config.adam);
          break;
        }
        case Optimizer::rag_plain: {
          Vector g = gradient(nesterov.params, *batch, loss);
          nesterov.params -= config.alpha * g;
          break;
        }
      }
      if (!std::isfinite(loss) || !params().allFinite() || params().norm() > 1e8) {
        result.diverged = true;
        result.fault = "diverged at epoch " + std::to_string(epoch);
        params() = last_good;
        ok = false;
        break;
      }
      last_good = params();
    }
    if (!ok) break;
    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      ok = record(params(), epoch);
      if (ok && config.stop_at && result.trace.records.back().get(config.stop_at->first) <= config.stop_at->second)
        break;
    }
  }
  result.weights = unflatten(last_good, k, m);
  return result;
}

}  // namespace lae
