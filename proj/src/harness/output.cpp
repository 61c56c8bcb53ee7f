#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "json.hpp"
#include "lae/harness.hpp"

namespace lae::harness {

using nlohmann::json;

Spectrum top_components(const Spectrum& s, Index k) {
  if (k < 1 || k > s.k()) throw std::invalid_argument("top_components: k out of range");
  return Spectrum{s.sigma2.head(k), s.U.leftCols(k)};
}

PreparedData prepare_data(const DatasetConfig& dataset, Index k_max) {
  PreparedData out;
  if (dataset.synthetic) {
    SyntheticSpec spec = *dataset.synthetic;
    spec.k = k_max;
    out.X = make_synthetic(spec).first;
  } else {
    if (!std::filesystem::exists(dataset.path)) throw MissingInputError("dataset file not found: " + dataset.path);
    DataMatrix raw = load_dataset(dataset.path, dataset.format);
    out.X = center(raw.values, raw.provenance);
  }
  out.spectrum = spectrum_of(out.X, k_max);
  return out;
}

TrainConfig make_train_config(const ExperimentConfig& c, const RunSpec& run) {
  TrainConfig t;
  t.scheme = run.scheme.instantiate(run.k);
  t.optimizer = run.optimizer.optimizer;
  t.alpha = run.alpha;
  t.momentum = run.optimizer.momentum;
  t.adam = run.optimizer.adam;
  t.epochs = c.epochs;
  t.batch_size = c.batch_size;
  t.init_std = c.init_std;
  t.seed = run.seed;
  t.eval_every = c.eval_every;
  if (c.stop_at_threshold)
    t.stop_at = std::make_pair(c.threshold_metric, *std::min_element(c.thresholds.begin(), c.thresholds.end()));
  return t;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_trace_csv(const MetricTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "epoch,recon_loss,total_loss,d_align,d_sub,nd,balance_residual,wall_time_s\n";
  for (const auto& r : trace.records)
    out << r.epoch << ',' << num(r.recon_loss) << ',' << num(r.total_loss) << ',' << num(r.d_align) << ','
        << num(r.d_sub) << ',' << num(r.nd) << ',' << num(r.balance_residual) << ',' << num(r.wall_time_s) << '\n';
}

RunRecord execute_run(const ExperimentConfig& c, const PreparedData& data, const RunSpec& run,
                      const std::string& trace_dir) {
  RunRecord rec;
  rec.fingerprint = run_fingerprint(c, run);
  rec.scheme = to_string(run.scheme.scheme);
  rec.optimizer = to_string(run.optimizer.optimizer);
  rec.alpha = run.alpha;
  rec.k = run.k;
  rec.seed = run.seed;

  TrainResult result = train(data.X, top_components(data.spectrum, run.k), make_train_config(c, run));
  rec.diverged = result.diverged;
  rec.fault = result.fault;
  if (!result.trace.records.empty()) rec.final_metrics = result.trace.records.back();
  for (double th : c.thresholds) rec.epochs_to_threshold[th] = epochs_to_threshold(result.trace, c.threshold_metric, th);
  if (!trace_dir.empty()) {
    rec.trace_file = "trace_" + rec.fingerprint + ".csv";
    write_trace_csv(result.trace, (std::filesystem::path(trace_dir) / rec.trace_file).string());
  }
  return rec;
}

std::string run_record_json(const RunRecord& r) {
  json j;
  j["fingerprint"] = r.fingerprint;
  j["scheme"] = r.scheme;
  j["optimizer"] = r.optimizer;
  j["alpha"] = r.alpha;
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["diverged"] = r.diverged;
  if (!r.fault.empty()) j["fault"] = r.fault;
  const TraceRecord& f = r.final_metrics;
  j["final"] = {{"epoch", f.epoch},   {"recon_loss", f.recon_loss}, {"total_loss", f.total_loss},
                {"d_align", f.d_align}, {"d_sub", f.d_sub},         {"nd", f.nd},
                {"balance_residual", f.balance_residual}};
  json th = json::object();
  for (const auto& [t, e] : r.epochs_to_threshold) th[num(t)] = e ? json(*e) : json(nullptr);
  j["epochs_to_threshold"] = th;
  j["trace_file"] = r.trace_file;
  return j.dump(2) + "\n";
}

void write_svg_lineplot(const std::string& path, const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series) {
  const double W = 640, H = 420, left = 70, right = 160, top = 40, bottom = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series)
    for (auto [x, y] : s.second) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  if (!(xmax > xmin)) {
    xmin -= 1;
    xmax += 1;
  }
  if (!(ymax > ymin)) {
    ymin -= 1;
    ymax += 1;
  }
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * (W - left - right); };
  auto sy = [&](double y) { return H - bottom - (y - ymin) / (ymax - ymin) * (H - top - bottom); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << H - bottom << "\" x2=\"" << W - right << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << H - bottom
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << (left + W - right) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text x=\"15\" y=\"" << H / 2 << "\" transform=\"rotate(-90 15 " << H / 2 << ")\" text-anchor=\"middle\">"
      << y_label << "</text>\n";
  for (int t = 0; t <= 4; ++t) {
    double xv = xmin + (xmax - xmin) * t / 4.0, yv = ymin + (ymax - ymin) * t / 4.0;
    out << "<text x=\"" << sx(xv) << "\" y=\"" << H - bottom + 15 << "\" font-size=\"10\" text-anchor=\"middle\">"
        << num(xv) << "</text>\n";
    out << "<text x=\"" << left - 5 << "\" y=\"" << sy(yv) << "\" font-size=\"10\" text-anchor=\"end\">" << num(yv)
        << "</text>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (auto [x, y] : series[i].second) out << sx(x) << ',' << sy(y) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << W - right + 10 << "\" y=\"" << top + 15 * (i + 1) << "\" fill=\"" << color << "\">"
        << series[i].first << "</text>\n";
  }
  out << "</svg>\n";
}

namespace {

Matrix gaussian_matrix(Index r, Index c, std::mt19937_64& rng, double std) {
  std::normal_distribution<double> d(0.0, std);
  Matrix M(r, c);
  for (Index i = 0; i < M.size(); ++i) M.data()[i] = d(rng);
  return M;
}

double fd_rel_error(const std::function<ObjectiveValue(const WeightPair&)>& f, const WeightPair& w, double eps,
                    bool negate_decoder) {
  ObjectiveValue v = f(w);
  if (negate_decoder) v.grad_decoder = -v.grad_decoder;
  Vector analytic = flatten(WeightPair{v.grad_encoder, v.grad_decoder});
  Vector theta = flatten(w);
  Vector numeric(theta.size());
  for (Index i = 0; i < theta.size(); ++i) {
    Vector tp = theta, tm = theta;
    tp(i) += eps;
    tm(i) -= eps;
    numeric(i) = (f(unflatten(tp, w.k(), w.m())).loss - f(unflatten(tm, w.k(), w.m())).loss) / (2 * eps);
  }
  return (numeric - analytic).norm() / std::max(analytic.norm(), 1e-12);
}

}  // namespace

std::vector<GradCheckRow> run_gradient_check(const GradCheckOptions& opts) {
  if (!(opts.eps > 0)) throw std::invalid_argument("eps: must be positive");
  if (opts.instances < 1) throw std::invalid_argument("instances: must be positive");
  const std::vector<std::string> names{"recon", "uniform", "nonuniform", "nd_deterministic", "nd_stochastic"};
  if (!opts.inject_fault.empty() && std::find(names.begin(), names.end(), opts.inject_fault) == names.end())
    throw std::invalid_argument("inject_fault: unknown objective '" + opts.inject_fault + "'");
  std::vector<GradCheckRow> rows;
  for (const auto& n : names) rows.push_back({n, 0.0, true});

  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<Index> kd(1, 4), nd(2, 32);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int inst = 0; inst < opts.instances; ++inst) {
    const Index k = kd(rng);
    const Index m = std::uniform_int_distribution<Index>(k, 8)(rng);
    const Index n = nd(rng);
    DataMatrix X = center(gaussian_matrix(m, n, rng, 1.0));
    Gram g = Gram::of(X);
    WeightPair w{gaussian_matrix(k, m, rng, 0.5), gaussian_matrix(m, k, rng, 0.5)};
    const double lambda = 0.1 + unit(rng);
    Vector lambdas(k);
    double acc = 0;
    for (Index i = 0; i < k; ++i) lambdas(i) = (acc += 0.05 + unit(rng));
    NestedDropoutPrior prior = geometric_prior(0.2 + 0.75 * unit(rng), k);
    const std::uint64_t mask_seed = rng();

    std::vector<std::function<ObjectiveValue(const WeightPair&)>> fns{
        [&](const WeightPair& x) { return eval_recon(x, g); },
        [&](const WeightPair& x) { return eval_uniform_l2(x, g, lambda); },
        [&](const WeightPair& x) { return eval_nonuniform_l2(x, g, lambdas); },
        [&](const WeightPair& x) { return eval_det_nd(x, g, prior); },
        [&](const WeightPair& x) { return sample_stoch_nd(x, X.values, prior, mask_seed); },
    };
    for (std::size_t s = 0; s < fns.size(); ++s) {
      double err = fd_rel_error(fns[s], w, opts.eps, opts.inject_fault == names[s]);
      rows[s].max_rel_error = std::max(rows[s].max_rel_error, err);
    }
  }
  for (auto& r : rows) r.pass = r.max_rel_error < opts.tolerance;
  return rows;
}

}  // namespace lae::harness
