#include "lae/optimizers.hpp"

#include <cmath>

namespace lae {

void nesterov_step(NesterovState& state, const Vector& grad_at_lookahead, double alpha, double momentum) {
  if (grad_at_lookahead.size() != state.params.size()) throw std::invalid_argument("nesterov: gradient size mismatch");
  state.velocity = momentum * state.velocity - alpha * grad_at_lookahead;
  state.params += state.velocity;
}

void adam_step(AdamState& state, const Vector& grad, double alpha, const AdamParams& hp) {
  if (grad.size() != state.params.size()) throw std::invalid_argument("adam: gradient size mismatch");
  state.t += 1;
  state.m = hp.beta1 * state.m + (1.0 - hp.beta1) * grad;
  state.v = hp.beta2 * state.v + (1.0 - hp.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.t));
  state.params.array() -= alpha * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + hp.eps);
}

std::string to_string(Optimizer o) {
  switch (o) {
    case Optimizer::nesterov: return "nesterov";
    case Optimizer::adam: return "adam";
    case Optimizer::rag_plain: return "rag_plain";
  }
  return "unknown";
}

Optimizer parse_optimizer(const std::string& name) {
  for (Optimizer o : {Optimizer::nesterov, Optimizer::adam, Optimizer::rag_plain})
    if (to_string(o) == name) return o;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::recon_loss: return "recon_loss";
    case Metric::total_loss: return "total_loss";
    case Metric::d_align: return "d_align";
    case Metric::d_sub: return "d_sub";
    case Metric::nd: return "nd";
    case Metric::balance_residual: return "balance_residual";
  }
  return "unknown";
}

Metric parse_metric(const std::string& name) {
  for (Metric m : {Metric::recon_loss, Metric::total_loss, Metric::d_align, Metric::d_sub, Metric::nd,
                   Metric::balance_residual})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

double TraceRecord::get(Metric m) const {
  switch (m) {
    case Metric::recon_loss: return recon_loss;
    case Metric::total_loss: return total_loss;
    case Metric::d_align: return d_align;
    case Metric::d_sub: return d_sub;
    case Metric::nd: return nd;
    case Metric::balance_residual: return balance_residual;
  }
  return 0;
}

std::optional<long> epochs_to_threshold(const MetricTrace& trace, Metric metric, double threshold) {
  for (const auto& r : trace.records)
    if (r.get(metric) <= threshold) return r.epoch;
  return std::nullopt;
}

}  // namespace lae
