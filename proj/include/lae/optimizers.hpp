#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lae/data.hpp"
#include "lae/objectives.hpp"
#include "lae/types.hpp"

namespace lae {

/// Nesterov momentum in lookahead form: v <- mu v - a grad(w + mu v); w <- w + v.
struct NesterovState {
  Vector params;
  Vector velocity;

  explicit NesterovState(Vector p) : params(std::move(p)), velocity(Vector::Zero(params.size())) {}
  /// Point at which the caller evaluates the gradient.
  Vector lookahead(double momentum) const { return params + momentum * velocity; }
};

void nesterov_step(NesterovState& state, const Vector& grad_at_lookahead, double alpha, double momentum);

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Vector params;
  Vector m;
  Vector v;
  long t = 0;

  explicit AdamState(Vector p) : params(std::move(p)), m(Vector::Zero(params.size())), v(Vector::Zero(params.size())) {}
};

/// Bias-corrected Adam. Increments state.t before use, so the first call has t = 1.
void adam_step(AdamState& state, const Vector& grad, double alpha, const AdamParams& hp = {});

enum class Optimizer { nesterov, adam, rag_plain };

std::string to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& name);

enum class Metric { recon_loss, total_loss, d_align, d_sub, nd, balance_residual };

std::string to_string(Metric m);
Metric parse_metric(const std::string& name);

struct TrainConfig {
  RegularizerSpec scheme;
  Optimizer optimizer = Optimizer::nesterov;
  double alpha = 1e-3;
  double momentum = 0.9;
  AdamParams adam;
  long epochs = 100;
  /// 0 means full batch.
  Index batch_size = 0;
  double init_std = 1e-2;
  std::uint64_t seed = 0;
  long eval_every = 1;
  /// Stop early once this metric reaches the threshold at an eval point.
  std::optional<std::pair<Metric, double>> stop_at;
  /// Wall-clock timing breaks byte-reproducibility of traces, so it is opt-in.
  bool record_wall_time = false;

  /// Throws std::invalid_argument naming the offending field.
  void validate(Index n, Index k) const;
};

struct TraceRecord {
  long epoch = 0;
  double recon_loss = 0;
  double total_loss = 0;
  double d_align = 0;
  double d_sub = 0;
  double nd = 0;
  double balance_residual = 0;
  double wall_time_s = 0;

  double get(Metric m) const;
};

struct MetricTrace {
  std::vector<TraceRecord> records;
};

struct TrainResult {
  WeightPair weights;
  MetricTrace trace;
  bool diverged = false;
  std::string fault;
};

/// Flattened parameter vector: encoder column-major, then decoder.
Vector flatten(const WeightPair& w);
WeightPair unflatten(const Vector& theta, Index k, Index m);

/// Seeded N(0, std^2) weights.
WeightPair random_weights(Index k, Index m, double std, std::uint64_t seed);

/// One epoch's mini-batches: a seeded shuffle of 0..n-1 cut into consecutive
/// chunks of batch_size (the last may be shorter).
std::vector<std::vector<Index>> epoch_batches(Index n, Index batch_size, std::mt19937_64& rng);
/// Metrics of one weight pair against the full data and oracle spectrum.
TraceRecord evaluate_record(const WeightPair& w, const Gram& g, const Spectrum& spectrum, const RegularizerSpec& scheme);

TrainResult train(const DataMatrix& X, const Spectrum& spectrum, const TrainConfig& config);

/// First epoch whose metric is <= threshold.
std::optional<long> epochs_to_threshold(const MetricTrace& trace, Metric metric, double threshold);

}  // namespace lae
