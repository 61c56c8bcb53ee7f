#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "lae/data.hpp"
#include "lae/metrics.hpp"
#include "lae/optimizers.hpp"
#include "oracles.hpp"

using namespace lae;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

struct Problem {
  DataMatrix X;
  Spectrum sp;
};

Problem range_problem(Index m, Index n, Index k, std::uint64_t seed) {
  auto [X, truth] = make_synthetic({m, n, k, descending_range(m), seed});
  return {X, spectrum_of(X, k)};
}

}  // namespace

TEST_CASE("Nesterov with zero momentum is gradient descent") {
  NesterovState s(Vector::LinSpaced(3, 1, 3));
  Vector g = Vector::LinSpaced(3, 0.5, -0.5);
  CHECK(s.lookahead(0.0) == s.params);
  nesterov_step(s, g, 0.1, 0.0);
  CHECK(s.params == Vector::LinSpaced(3, 1, 3) - 0.1 * g);
  CHECK_THROWS(nesterov_step(s, Vector::Zero(2), 0.1, 0.9));
}

TEST_CASE("Nesterov on a scalar quadratic follows the closed-form recurrence") {
  // With f = w^2/2 the lookahead iteration is linear:
  // v' = mu v - a (w + mu v), w' = w + v'.
  const double a = 0.1, mu = 0.9;
  NesterovState s(scalar(1.0));
  double w = 1.0, v = 0.0;
  int below = -1;
  for (int t = 1; t <= 200; ++t) {
    nesterov_step(s, s.lookahead(mu), a, mu);
    double vn = mu * v - a * (w + mu * v);
    w += vn;
    v = vn;
    CHECK(std::abs(s.params(0) - w) < 1e-12);
    if (below < 0 && std::abs(s.params(0)) < 1e-3) below = t;
  }
  CHECK(below > 0);
  CHECK(std::abs(s.params(0)) < 1e-3);
}

TEST_CASE("Nesterov velocity decays geometrically under zero gradient") {
  NesterovState s(scalar(0.0));
  s.velocity = scalar(1.0);
  Vector zero = Vector::Zero(1);
  double expected_pos = 0;
  for (int t = 1; t <= 30; ++t) {
    nesterov_step(s, zero, 0.1, 0.8);
    expected_pos += std::pow(0.8, t);
    CHECK(s.velocity(0) == doctest::Approx(std::pow(0.8, t)).epsilon(1e-12));
  }
  CHECK(s.params(0) == doctest::Approx(expected_pos).epsilon(1e-12));
}

TEST_CASE("Adam first step has magnitude alpha per coordinate") {
  AdamState s(Vector::Zero(3));
  Vector g(3);
  g << 2.0, -0.01, 300.0;
  adam_step(s, g, 0.05);
  CHECK(s.t == 1);
  for (Index i = 0; i < 3; ++i) {
    CHECK(std::abs(s.params(i)) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(s.params(i) * g(i) < 0);
  }
  CHECK_THROWS(adam_step(s, Vector::Zero(2), 0.1));
}

TEST_CASE("Adam minimizes a scalar quadratic") {
  AdamState s(scalar(1.0));
  int hit = -1;
  for (int t = 1; t <= 1000 && hit < 0; ++t) {
    adam_step(s, s.params, 0.01);
    if (std::abs(s.params(0)) < 1e-3) hit = t;
  }
  CHECK(hit > 0);
}

TEST_CASE("Adam under zero gradient keeps parameters fixed and decays moments") {
  AdamState s(scalar(0.5));
  adam_step(s, scalar(1.0), 0.1);
  const double after = s.params(0);
  double m_prev = s.m(0), v_prev = s.v(0);
  for (int t = 0; t < 50; ++t) {
    adam_step(s, scalar(0.0), 0.1);
    CHECK(s.m(0) == doctest::Approx(0.9 * m_prev));
    CHECK(s.v(0) == doctest::Approx(0.999 * v_prev));
    m_prev = s.m(0);
    v_prev = s.v(0);
  }
  // The first moment is still non-zero, so parameters keep drifting; the
  // drift shrinks with the moment.
  CHECK(s.params(0) < after);
  AdamState z(scalar(0.5));
  for (int t = 0; t < 10; ++t) adam_step(z, scalar(0.0), 0.1);
  CHECK(z.params(0) == 0.5);
}

TEST_CASE("flatten and unflatten are inverse") {
  std::mt19937_64 rng(300);
  WeightPair w{oracle::gaussian(3, 5, rng), oracle::gaussian(5, 3, rng)};
  Vector t = flatten(w);
  CHECK(t.size() == 30);
  CHECK(t(1) == w.encoder(1, 0));
  CHECK(t(15) == w.decoder(0, 0));
  WeightPair back = unflatten(t, 3, 5);
  CHECK(back.encoder == w.encoder);
  CHECK(back.decoder == w.decoder);
  CHECK_THROWS(unflatten(t, 3, 4));
}

TEST_CASE("random weights are seeded and scaled") {
  WeightPair a = random_weights(20, 50, 1e-2, 4), b = random_weights(20, 50, 1e-2, 4);
  CHECK(a.encoder == b.encoder);
  CHECK(a.decoder == b.decoder);
  const double rms = std::sqrt((a.encoder.squaredNorm() + a.decoder.squaredNorm()) / 2000.0);
  CHECK(rms == doctest::Approx(1e-2).epsilon(0.1));
  CHECK(random_weights(20, 50, 1e-2, 5).encoder != a.encoder);
}

TEST_CASE("property: epoch batches partition the sample indices") {
  std::mt19937_64 gen(301);
  for (int t = 0; t < 30; ++t) {
    const Index n = std::uniform_int_distribution<Index>(1, 60)(gen);
    const Index b = std::uniform_int_distribution<Index>(1, n)(gen);
    std::mt19937_64 rng(gen());
    auto batches = epoch_batches(n, b, rng);
    CHECK(static_cast<Index>(batches.size()) == (n + b - 1) / b);
    std::vector<Index> all;
    for (std::size_t i = 0; i < batches.size(); ++i) {
      if (i + 1 < batches.size()) CHECK(static_cast<Index>(batches[i].size()) == b);
      all.insert(all.end(), batches[i].begin(), batches[i].end());
    }
    std::sort(all.begin(), all.end());
    std::vector<Index> want(static_cast<std::size_t>(n));
    std::iota(want.begin(), want.end(), Index{0});
    CHECK(all == want);
  }
  std::mt19937_64 rng(0);
  CHECK_THROWS(epoch_batches(5, 0, rng));
}

TEST_CASE("epochs to threshold") {
  MetricTrace tr;
  const long epochs[] = {0, 10, 20};
  const double vals[] = {0.9, 0.4, 0.25};
  for (int i = 0; i < 3; ++i) {
    TraceRecord r;
    r.epoch = epochs[i];
    r.d_align = vals[i];
    tr.records.push_back(r);
  }
  CHECK(epochs_to_threshold(tr, Metric::d_align, 0.3) == 20);
  CHECK_FALSE(epochs_to_threshold(tr, Metric::d_align, 0.1).has_value());
  CHECK(epochs_to_threshold(tr, Metric::d_align, 0.95) == 0);
  CHECK(parse_metric(to_string(Metric::balance_residual)) == Metric::balance_residual);
  CHECK(parse_optimizer("rag_plain") == Optimizer::rag_plain);
  CHECK_THROWS(parse_optimizer("sgd"));
}

TEST_CASE("zero epochs returns the initialization and one record") {
  Problem p = range_problem(8, 40, 3, 1);
  TrainConfig c;
  c.scheme = RegularizerSpec::none();
  c.epochs = 0;
  c.seed = 9;
  TrainResult r = train(p.X, p.sp, c);
  WeightPair init = random_weights(3, 8, 1e-2, 9);
  CHECK(r.weights.encoder == init.encoder);
  CHECK(r.weights.decoder == init.decoder);
  REQUIRE(r.trace.records.size() == 1);
  CHECK(r.trace.records[0].epoch == 0);
  CHECK_FALSE(r.diverged);
}

TEST_CASE("training is deterministic per seed, including mini-batches and stochastic masks") {
  Problem p = range_problem(8, 40, 3, 2);
  TrainConfig c;
  c.scheme = RegularizerSpec::nested_dropout(geometric_prior(0.9, 3), false);
  c.batch_size = 7;
  c.epochs = 30;
  c.alpha = 1e-3;
  c.seed = 5;
  TrainResult a = train(p.X, p.sp, c), b = train(p.X, p.sp, c);
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
    CHECK(a.trace.records[i].recon_loss == b.trace.records[i].recon_loss);
    CHECK(a.trace.records[i].d_align == b.trace.records[i].d_align);
  }
  CHECK(a.weights.encoder == b.weights.encoder);
  c.seed = 6;
  CHECK(train(p.X, p.sp, c).weights.encoder != a.weights.encoder);
}

TEST_CASE("momentum-free full-batch training reproduces hand-rolled gradient descent") {
  Problem p = range_problem(6, 30, 2, 3);
  TrainConfig c;
  c.scheme = RegularizerSpec::uniform(0.1);
  c.momentum = 0.0;
  c.alpha = 1e-3;
  c.epochs = 20;
  c.init_std = 0.3;
  c.seed = 1;
  TrainResult r = train(p.X, p.sp, c);
  WeightPair w = random_weights(2, 6, 0.3, 1);
  Vector l = Vector::Constant(2, 0.1);
  for (int e = 0; e < 20; ++e) {
    auto g = oracle::fd_gradient([&](const WeightPair& q) { return oracle::nonuniform(p.X.values, q, l); }, w);
    w.encoder -= 1e-3 * g.encoder;
    w.decoder -= 1e-3 * g.decoder;
  }
  CHECK((r.weights.encoder - w.encoder).norm() < 1e-7 * w.encoder.norm());
  CHECK((r.weights.decoder - w.decoder).norm() < 1e-7 * w.decoder.norm());
}

TEST_CASE("eval cadence and early stop") {
  Problem p = range_problem(6, 30, 2, 4);
  TrainConfig c;
  c.scheme = RegularizerSpec::none();
  c.epochs = 25;
  c.eval_every = 10;
  c.alpha = 1e-3;
  TrainResult r = train(p.X, p.sp, c);
  REQUIRE(r.trace.records.size() == 4);
  CHECK(r.trace.records[1].epoch == 10);
  CHECK(r.trace.records[3].epoch == 25);

  c.epochs = 100000;
  c.eval_every = 1;
  c.alpha = 2e-3;
  c.stop_at = std::make_pair(Metric::d_sub, 0.5);
  TrainResult s = train(p.X, p.sp, c);
  CHECK(s.trace.records.back().d_sub <= 0.5);
  CHECK(s.trace.records.back().epoch < 100000);
}

TEST_CASE("divergence is reported and the last finite weights are kept") {
  Problem p = range_problem(6, 30, 2, 5);
  TrainConfig c;
  c.scheme = RegularizerSpec::none();
  c.alpha = 10.0;
  c.epochs = 1000;
  c.init_std = 1.0;
  TrainResult r = train(p.X, p.sp, c);
  CHECK(r.diverged);
  CHECK_FALSE(r.fault.empty());
  CHECK(r.weights.encoder.allFinite());
}

TEST_CASE("config validation names the field") {
  Problem p = range_problem(6, 30, 2, 6);
  TrainConfig c;
  c.alpha = -1;
  CHECK_THROWS_WITH(c.validate(30, 2), doctest::Contains("alpha"));
  c = TrainConfig{};
  c.batch_size = 31;
  CHECK_THROWS_WITH(c.validate(30, 2), doctest::Contains("batch_size"));
  c = TrainConfig{};
  c.optimizer = Optimizer::rag_plain;
  CHECK_THROWS_WITH(c.validate(30, 2), doctest::Contains("optimizer"));
  c.scheme = RegularizerSpec::rag();
  CHECK_NOTHROW(c.validate(30, 2));
  c.optimizer = Optimizer::adam;
  CHECK_THROWS(c.validate(30, 2));
}

TEST_CASE("RAG reaches axis alignment at desk scale") {
  Problem p = range_problem(20, 400, 4, 7);
  TrainConfig c;
  c.scheme = RegularizerSpec::rag();
  c.optimizer = Optimizer::rag_plain;
  c.alpha = 0.3 / 400.0;
  c.epochs = 20000;
  c.eval_every = 10;
  c.stop_at = std::make_pair(Metric::d_align, 0.05);
  TrainResult r = train(p.X, p.sp, c);
  CHECK_FALSE(r.diverged);
  auto hit = epochs_to_threshold(r.trace, Metric::d_align, 0.05);
  REQUIRE(hit.has_value());
  MESSAGE("rag epochs to d_align 0.05: " << *hit);
}

TEST_CASE("uniform l2 finds the subspace but not the axes") {
  Problem p = range_problem(20, 400, 4, 7);
  TrainConfig c;
  c.scheme = RegularizerSpec::uniform(1.0);
  c.alpha = 0.1 / 400.0;
  c.epochs = 5000;
  c.eval_every = 50;
  TrainResult r = train(p.X, p.sp, c);
  CHECK_FALSE(r.diverged);
  const TraceRecord& last = r.trace.records.back();
  CHECK(last.d_sub < 1e-2);
  double min_align = 1.0;
  for (const auto& rec : r.trace.records) min_align = std::min(min_align, rec.d_align);
  CHECK(min_align > 0.2);
  CHECK(last.balance_residual < 1e-3);
}
