#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "lae/harness.hpp"
#include "lae/landscape.hpp"

namespace lae::harness {

namespace fs = std::filesystem;

namespace {

constexpr const char* kOutputDirEnv = "LAE_OUTPUT_DIR";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Flag beats environment beats config file.
std::string resolve_output_dir(const std::string& flag, const std::string& from_config) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return from_config;
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(field, "cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw ConfigError(field, "empty list");
  return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())); }

bool compatible(const SchemeTemplate& s, const OptimizerConfig& o) {
  if (o.optimizer == Optimizer::rag_plain) return s.scheme == Scheme::rag;
  if (o.optimizer == Optimizer::adam) return s.scheme != Scheme::rag;
  return true;
}

// ---------------------------------------------------------------- train

struct TrainFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha;
  std::optional<long> epochs;
  std::optional<long> eval_every;
  std::optional<Index> k;
  std::string scheme;
  std::string optimizer;
  std::string output_dir;
};

int cmd_train(const TrainFlags& f) {
  ExperimentConfig c = load_config(f.config);
  if (f.epochs) c.epochs = *f.epochs;
  if (f.eval_every) c.eval_every = *f.eval_every;
  if (c.epochs < 0) throw ConfigError("epochs", "must be non-negative");
  if (c.eval_every < 1) throw ConfigError("eval_every", "must be positive");

  RunSpec run;
  run.scheme = c.schemes.front();
  if (!f.scheme.empty()) {
    Scheme wanted;
    try {
      wanted = parse_scheme(f.scheme);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("scheme", e.what());
    }
    auto it = std::find_if(c.schemes.begin(), c.schemes.end(), [&](const auto& s) { return s.scheme == wanted; });
    if (it == c.schemes.end()) {
      SchemeTemplate t;
      t.scheme = wanted;
      if (wanted == Scheme::uniform) throw ConfigError("scheme", "uniform needs lambda from the config file");
      run.scheme = t;
    } else {
      run.scheme = *it;
    }
  }
  run.optimizer = c.optimizers.front();
  if (!f.optimizer.empty()) {
    Optimizer wanted;
    try {
      wanted = parse_optimizer(f.optimizer);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("optimizer", e.what());
    }
    auto it = std::find_if(c.optimizers.begin(), c.optimizers.end(), [&](const auto& o) { return o.optimizer == wanted; });
    if (it == c.optimizers.end()) throw ConfigError("optimizer", "not listed in the config file");
    run.optimizer = *it;
  }
  run.alpha = f.alpha ? *f.alpha : run.optimizer.alphas.front();
  if (!(run.alpha > 0)) throw ConfigError("alpha", "must be positive");
  run.seed = f.seed ? *f.seed : c.seeds.front();
  run.k = f.k ? *f.k : c.latent_dims.front();
  if (run.k < 1 || run.k > c.dataset.k) throw ConfigError("k", "must lie in [1, dataset.k]");
  if (!compatible(run.scheme, run.optimizer))
    throw ConfigError("optimizer", to_string(run.optimizer.optimizer) + " cannot drive scheme " +
                                       to_string(run.scheme.scheme));
  try {
    make_train_config(c, run).validate(1 << 30, run.k);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("schemes", e.what());
  }

  const std::string out_dir = resolve_output_dir(f.output_dir, c.output_dir);
  PreparedData data = prepare_data(c.dataset, run.k);
  fs::create_directories(out_dir);
  RunRecord rec = execute_run(c, data, run, out_dir);
  std::ofstream(fs::path(out_dir) / ("run_" + rec.fingerprint + ".json"), std::ios::binary) << run_record_json(rec);

  const TraceRecord& fin = rec.final_metrics;
  std::cout << "run " << rec.fingerprint << " scheme=" << rec.scheme << " optimizer=" << rec.optimizer
            << " alpha=" << short_num(rec.alpha) << " k=" << rec.k << " seed=" << rec.seed << "\n";
  std::cout << "epoch=" << fin.epoch << " recon_loss=" << short_num(fin.recon_loss)
            << " total_loss=" << short_num(fin.total_loss) << " d_align=" << short_num(fin.d_align)
            << " d_sub=" << short_num(fin.d_sub) << " nd=" << short_num(fin.nd)
            << " balance=" << short_num(fin.balance_residual) << "\n";
  for (const auto& [th, e] : rec.epochs_to_threshold)
    std::cout << "epochs_to_threshold(" << to_string(c.threshold_metric) << " <= " << short_num(th)
              << ") = " << (e ? std::to_string(*e) : std::string("none")) << "\n";
  if (rec.diverged) std::cout << "fault: " << rec.fault << "\n";
  std::cout << "trace: " << (fs::path(out_dir) / rec.trace_file).string() << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------- sweep

struct SweepFlags {
  std::string config;
  std::string output_dir;
  std::optional<unsigned> workers;
};

int cmd_sweep(const SweepFlags& f) {
  ExperimentConfig c = load_config(f.config);
  if (f.workers) c.workers = *f.workers;
  const std::string out_dir = resolve_output_dir(f.output_dir, c.output_dir);

  std::vector<RunSpec> runs;
  std::size_t skipped = 0;
  for (const auto& s : c.schemes)
    for (const auto& o : c.optimizers) {
      if (!compatible(s, o)) {
        ++skipped;
        continue;
      }
      for (Index k : c.latent_dims)
        for (std::uint64_t seed : c.seeds)
          for (double a : o.alphas) runs.push_back(RunSpec{s, o, a, k, seed});
    }
  for (const auto& r : runs) {
    try {
      make_train_config(c, r).validate(1 << 30, r.k);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("schemes", e.what());
    }
  }

  const Index k_max = *std::max_element(c.latent_dims.begin(), c.latent_dims.end());
  PreparedData data = prepare_data(c.dataset, k_max);
  fs::create_directories(out_dir);
  const std::string trace_dir = c.write_traces ? (fs::path(out_dir) / "traces").string() : "";
  if (!trace_dir.empty()) fs::create_directories(trace_dir);

  std::map<std::string, RunRecord> collected;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  unsigned workers = c.workers ? c.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(1, runs.size())));
  auto worker = [&] {
    for (std::size_t i = next++; i < runs.size(); i = next++) {
      try {
        RunRecord rec = execute_run(c, data, runs[i], trace_dir);
        std::lock_guard<std::mutex> lock(mu);
        collected.emplace(rec.fingerprint, std::move(rec));
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  auto record_of = [&](const RunSpec& r) -> const RunRecord& { return collected.at(run_fingerprint(c, r)); };

  // Every run, in configuration order.
  {
    std::ofstream out(fs::path(out_dir) / "runs.csv", std::ios::binary);
    out << "fingerprint,scheme,optimizer,k,seed,alpha,diverged,threshold,epochs_to_threshold,final_d_align,"
           "final_d_sub,trace_file\n";
    for (const auto& r : runs) {
      const RunRecord& rec = record_of(r);
      for (const auto& [th, e] : rec.epochs_to_threshold)
        out << rec.fingerprint << ',' << rec.scheme << ',' << rec.optimizer << ',' << rec.k << ',' << rec.seed << ','
            << num(rec.alpha) << ',' << (rec.diverged ? 1 : 0) << ',' << num(th) << ','
            << (e ? std::to_string(*e) : "none") << ',' << num(rec.final_metrics.d_align) << ','
            << num(rec.final_metrics.d_sub) << ',' << (rec.trace_file.empty() ? "" : "traces/" + rec.trace_file)
            << '\n';
    }
  }

  // Best alpha per (scheme, optimizer, k, seed, threshold): fewest epochs, ties to the smaller alpha.
  std::ofstream out(fs::path(out_dir) / "sweep.csv", std::ios::binary);
  out << "scheme,optimizer,k,seed,threshold,best_alpha,epochs_to_threshold\n";
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  const double plot_threshold = c.thresholds.front();
  for (std::size_t si = 0; si < c.schemes.size(); ++si) {
    const auto& s = c.schemes[si];
    std::string label = to_string(s.scheme);
    if (std::count_if(c.schemes.begin(), c.schemes.end(), [&](const auto& x) { return x.scheme == s.scheme; }) > 1)
      label += "#" + std::to_string(si);
    for (const auto& o : c.optimizers) {
      if (!compatible(s, o)) continue;
      std::vector<double> alphas = o.alphas;
      std::sort(alphas.begin(), alphas.end());
      for (Index k : c.latent_dims)
        for (std::uint64_t seed : c.seeds)
          for (double th : c.thresholds) {
            std::optional<long> best;
            double best_alpha = 0;
            for (double a : alphas) {
              auto e = record_of(RunSpec{s, o, a, k, seed}).epochs_to_threshold.at(th);
              if (e && (!best || *e < *best)) {
                best = e;
                best_alpha = a;
              }
            }
            out << label << ',' << to_string(o.optimizer) << ',' << k << ',' << seed << ',' << num(th) << ','
                << (best ? num(best_alpha) : "none") << ',' << (best ? std::to_string(*best) : "none") << '\n';
            if (th == plot_threshold && best && seed == c.seeds.front())
              curves[label + "/" + to_string(o.optimizer)].emplace_back(static_cast<double>(k),
                                                                        static_cast<double>(*best));
          }
    }
  }
  out.close();
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series(curves.begin(), curves.end());
  write_svg_lineplot((fs::path(out_dir) / "sweep.svg").string(),
                     "epochs to " + to_string(c.threshold_metric) + " <= " + short_num(plot_threshold), "latent dim k",
                     "epochs", series);

  std::cout << "sweep: " << runs.size() << " runs";
  if (skipped) std::cout << " (" << skipped << " incompatible scheme/optimizer pairs skipped)";
  std::cout << "\n";
  std::ifstream back(fs::path(out_dir) / "sweep.csv");
  std::cout << back.rdbuf();
  return exit_ok;
}

// ---------------------------------------------------------------- surface

struct SurfaceFlags {
  std::string singular_values = "2,1";
  std::string lambdas = "0.2,0.6";
  Index k = 2;
  Index m = 0;
  Index n = 64;
  std::uint64_t seed = 0;
  Index grid = 101;
  double alpha_max = 2.0;
  std::string output_dir;
  std::string output = "surface.csv";
};

int cmd_surface(const SurfaceFlags& f) {
  if (f.k != 2) throw ConfigError("k", "the surface slice is defined for k = 2 only");
  std::vector<double> sv = parse_list(f.singular_values, "singular-values");
  Vector lambdas = to_vector(parse_list(f.lambdas, "lambdas"));
  if (lambdas.size() != 2) throw ConfigError("lambdas", "need exactly 2 values for k = 2");
  if (f.grid < 2) throw ConfigError("grid", "must be at least 2");
  SyntheticSpec spec;
  spec.m = f.m ? f.m : static_cast<Index>(sv.size());
  spec.n = f.n;
  spec.k = 2;
  spec.singular_values = sv;
  spec.seed = f.seed;
  auto [X, truth] = make_synthetic(spec);
  Spectrum s = spectrum_of(X, 2);
  try {
    RegularizerSpec::nonuniform(lambdas).validate(2);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("lambdas", e.what());
  }
  if (!(lambdas(1) < s.sigma2(1))) throw ConfigError("lambdas", "lambda_k must be below sigma_k^2");

  auto points = loss_surface_slice(Gram::of(X), s, lambdas, SurfaceGrid::uniform(f.alpha_max, f.grid, f.grid));
  const std::string out_dir = resolve_output_dir(f.output_dir, "out");
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / f.output).string();
  write_surface_csv(points, path);
  auto best = std::min_element(points.begin(), points.end(), [](auto& a, auto& b) { return a.loss < b.loss; });
  std::cout << "surface: " << points.size() << " points -> " << path << "\n";
  std::cout << "grid minimum at alpha=" << short_num(best->alpha) << " theta=" << short_num(best->theta)
            << " loss=" << short_num(best->loss) << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------- bounds

struct BoundsFlags {
  std::string singular_values = "10,9,8,7,6,5,4,3,2,1";
  Index k_min = 2;
  Index k_max = 0;
  std::string sqrt_lambda = "0.1,0.9";
  std::string lambdas;
  double rho = 0.9;
  Index n = 64;
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string output = "bounds.csv";
};

int cmd_bounds(const BoundsFlags& f) {
  std::vector<double> sv = parse_list(f.singular_values, "singular-values");
  const Index count = static_cast<Index>(sv.size());
  const Index k_max = f.k_max ? f.k_max : count;
  if (f.k_min < 2 || k_max < f.k_min || k_max > count)
    throw ConfigError("k-max", "need 2 <= k-min <= k-max <= number of singular values");
  if (!(f.rho > 0 && f.rho < 1)) throw ConfigError("rho", "must lie in (0, 1)");
  std::vector<double> explicit_lambdas;
  if (!f.lambdas.empty()) explicit_lambdas = parse_list(f.lambdas, "lambdas");
  std::vector<double> sl = parse_list(f.sqrt_lambda, "sqrt-lambda");
  if (sl.size() != 2 || !(sl[0] > 0) || !(sl[1] > sl[0])) throw ConfigError("sqrt-lambda", "expected lo,hi with 0 < lo < hi");

  SyntheticSpec spec;
  spec.m = count;
  spec.n = std::max(f.n, count + 1);
  spec.k = k_max;
  spec.singular_values = sv;
  spec.seed = f.seed;
  DataMatrix X = make_synthetic(spec).first;
  Spectrum full = spectrum_of(X, k_max);
  Gram g = Gram::of(X);

  const std::string out_dir = resolve_output_dir(f.output_dir, "out");
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / f.output).string();
  std::ofstream out(path, std::ios::binary);
  const char* header =
      "k,nonuniform_bound,nd_bound,note,nu_scaling_fd,nu_scaling_cf,nu_rotation_fd,nu_rotation_cf,"
      "nd_scaling_fd,nd_scaling_cf,nd_rotation_fd,nd_rotation_cf,probe_status\n";
  out << header;
  std::cout << header;
  for (Index k = f.k_min; k <= k_max; ++k) {
    Spectrum s = top_components(full, k);
    Vector lambdas;
    if (!explicit_lambdas.empty()) {
      if (static_cast<Index>(explicit_lambdas.size()) < k) throw ConfigError("lambdas", "fewer values than k");
      lambdas = to_vector(explicit_lambdas).head(k);
    } else {
      lambdas = RegularizerSpec::nonuniform_sqrt_range(sl[0], sl[1], k).lambdas;
    }
    if (!(lambdas(k - 1) < s.sigma2(k - 1)))
      throw std::invalid_argument("lambda_k >= sigma_k^2 at k = " + std::to_string(k));

    std::ostringstream row;
    row << k << ',' << num(nonuniform_cond_lower_bound(s, k)) << ',' << num(nd_cond_lower_bound(s, k)) << ','
        << (k == 2 ? "nonuniform bound degenerate (empty sum)" : "") << ',';
    std::vector<std::string> status;
    try {
      WeightPair opt = global_optimum(s, lambdas, Vector::Ones(k));
      CurvatureProbe probe = nonuniform_probe(g, lambdas, opt);
      QuotientPair cf = closed_form_quotients(s, lambdas, 1, 0);
      row << num(rayleigh_fd(probe, scaling_direction(opt, 0))) << ',' << num(cf.scaling) << ','
          << num(rayleigh_fd(probe, rotation_direction(opt, 1, 0))) << ',' << num(cf.rotation) << ',';
    } catch (const NotStationaryError&) {
      row << "gate_failed,gate_failed,gate_failed,gate_failed,";
      status.push_back("nonuniform gate failed");
    }
    try {
      NestedDropoutPrior prior = geometric_prior(f.rho, k);
      WeightPair opt = nd_global_optimum(s, Vector::Ones(k));
      CurvatureProbe probe = nd_probe(g, prior, opt);
      QuotientPair cf = nd_closed_form_quotients(s, prior, 0, 1);
      row << num(rayleigh_fd(probe, scaling_direction(opt, 0))) << ',' << num(cf.scaling) << ','
          << num(rayleigh_fd(probe, rotation_direction(opt, 0, 1))) << ',' << num(cf.rotation) << ',';
    } catch (const NotStationaryError&) {
      row << "gate_failed,gate_failed,gate_failed,gate_failed,";
      status.push_back("nd gate failed");
    }
    if (status.empty()) {
      row << "ok";
    } else {
      for (std::size_t i = 0; i < status.size(); ++i) row << (i ? "; " : "") << status[i];
    }
    row << '\n';
    out << row.str();
    std::cout << row.str();
  }
  return exit_ok;
}

// ---------------------------------------------------------------- checkgrad

struct CheckFlags {
  GradCheckOptions opts;
  std::string output_dir;
};

int cmd_checkgrad(const CheckFlags& f) {
  std::vector<GradCheckRow> rows;
  try {
    rows = run_gradient_check(f.opts);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("checkgrad", e.what());
  }
  const std::string out_dir = resolve_output_dir(f.output_dir, "out");
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "checkgrad.csv", std::ios::binary);
  out << "objective,max_rel_error,tolerance,pass\n";
  bool all = true;
  for (const auto& r : rows) {
    out << r.objective << ',' << num(r.max_rel_error) << ',' << num(f.opts.tolerance) << ',' << (r.pass ? 1 : 0) << '\n';
    std::printf("%-18s max_rel_error=%.3e  %s\n", r.objective.c_str(), r.max_rel_error, r.pass ? "PASS" : "FAIL");
    all = all && r.pass;
  }
  return all ? exit_ok : exit_failure;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Linear autoencoder symmetry-breaking toolkit"};
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train = app.add_subcommand("train", "train one configuration and write its trace and run record");
  train->add_option("--config", tf.config, "experiment config (JSON)")->required();
  train->add_option("--seed", tf.seed, "override the seed");
  train->add_option("--alpha", tf.alpha, "override the learning rate");
  train->add_option("--epochs", tf.epochs, "override the epoch count");
  train->add_option("--eval-every", tf.eval_every, "override the evaluation cadence");
  train->add_option("--k", tf.k, "latent dimension (default: first latent_dims entry)");
  train->add_option("--scheme", tf.scheme, "scheme name (default: first in config)");
  train->add_option("--optimizer", tf.optimizer, "optimizer name (default: first in config)");
  train->add_option("--output-dir", tf.output_dir, "output directory");

  SweepFlags sf;
  auto* sweep = app.add_subcommand("sweep", "run the scheme x optimizer x alpha x k grid and pick the best alpha per cell");
  sweep->add_option("--config", sf.config, "experiment config (JSON)")->required();
  sweep->add_option("--output-dir", sf.output_dir, "output directory");
  sweep->add_option("--workers", sf.workers, "worker threads (default: hardware concurrency)");

  SurfaceFlags uf;
  auto* surface = app.add_subcommand("surface", "emit the k=2 loss-surface grid as CSV");
  surface->add_option("--singular-values", uf.singular_values, "comma list, descending")->capture_default_str();
  surface->add_option("--lambdas", uf.lambdas, "two increasing regularization weights")->capture_default_str();
  surface->add_option("--k", uf.k, "latent dimension (must be 2)")->capture_default_str();
  surface->add_option("--m", uf.m, "input dimension (default: number of singular values)");
  surface->add_option("--n", uf.n, "sample count")->capture_default_str();
  surface->add_option("--seed", uf.seed, "data seed")->capture_default_str();
  surface->add_option("--grid", uf.grid, "points per axis")->capture_default_str();
  surface->add_option("--alpha-max", uf.alpha_max, "largest radial scale")->capture_default_str();
  surface->add_option("--output-dir", uf.output_dir, "output directory");
  surface->add_option("--output", uf.output, "file name inside the output directory")->capture_default_str();

  BoundsFlags bf;
  auto* bounds = app.add_subcommand("bounds", "condition-number lower bounds over k with curvature probe checks");
  bounds->add_option("--singular-values", bf.singular_values, "comma list, descending")->capture_default_str();
  bounds->add_option("--k-min", bf.k_min, "smallest k")->capture_default_str();
  bounds->add_option("--k-max", bf.k_max, "largest k (default: number of singular values)");
  bounds->add_option("--sqrt-lambda", bf.sqrt_lambda, "lo,hi for equally spaced sqrt(lambda)")->capture_default_str();
  bounds->add_option("--lambdas", bf.lambdas, "explicit increasing lambdas (overrides --sqrt-lambda)");
  bounds->add_option("--rho", bf.rho, "geometric nested-dropout prior parameter")->capture_default_str();
  bounds->add_option("--n", bf.n, "sample count of the probe dataset")->capture_default_str();
  bounds->add_option("--seed", bf.seed, "data seed")->capture_default_str();
  bounds->add_option("--output-dir", bf.output_dir, "output directory");
  bounds->add_option("--output", bf.output, "file name inside the output directory")->capture_default_str();

  CheckFlags cf;
  auto* check = app.add_subcommand("checkgrad", "finite-difference gradient check over all objectives");
  check->add_option("--instances", cf.opts.instances, "random instances")->capture_default_str();
  check->add_option("--seed", cf.opts.seed, "instance seed")->capture_default_str();
  check->add_option("--eps", cf.opts.eps, "finite-difference step")->capture_default_str();
  check->add_option("--tol", cf.opts.tolerance, "max relative error")->capture_default_str();
  check->add_option("--inject-fault", cf.opts.inject_fault, "negate one objective's decoder gradient (self-test)");
  check->add_option("--output-dir", cf.output_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return cmd_train(tf);
    if (*sweep) return cmd_sweep(sf);
    if (*surface) return cmd_surface(uf);
    if (*bounds) return cmd_bounds(bf);
    if (*check) return cmd_checkgrad(cf);
  } catch (const MissingInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_missing_input;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return exit_bad_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
  return exit_failure;
}

}  // namespace lae::harness
