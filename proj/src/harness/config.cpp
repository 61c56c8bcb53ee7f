#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lae/harness.hpp"

namespace lae::harness {

using nlohmann::json;

namespace {

// Reads one JSON object section, remembering which keys were consumed so that
// unknown keys can be rejected by name.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key), "required field missing");
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(raw(key), field(key));
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(field(key), "required field missing");
    return as<T>(raw(key), field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
  }

  template <class T>
  static T as(const json& v, const std::string& where) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where, "expected a number");
        double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(where, "expected a finite number");
        return d;
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw ConfigError(where, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
          if (v.get<std::int64_t>() < 0) throw ConfigError(where, "expected a non-negative integer");
        }
        return static_cast<T>(v.get<std::int64_t>());
      } else {
        return v.get<T>();
      }
    } catch (const json::exception&) {
      throw ConfigError(where, "wrong type");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class T>
std::vector<T> list_of(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(Section::as<T>(v[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

DatasetConfig parse_dataset(const json& j) {
  Section s(j, "dataset");
  DatasetConfig d;
  std::string kind = s.require<std::string>("kind");
  d.k = s.require<Index>("k");
  if (d.k < 1) throw ConfigError(s.field("k"), "must be positive");
  if (kind == "synthetic") {
    SyntheticSpec spec;
    spec.m = s.require<Index>("m");
    spec.n = s.require<Index>("n");
    spec.k = d.k;
    spec.seed = s.get<std::uint64_t>("seed", 0);
    if (spec.m < 1) throw ConfigError(s.field("m"), "must be positive");
    if (spec.n < 2) throw ConfigError(s.field("n"), "must be at least 2");
    // Centered data has rank at most n-1; the default "range" keeps the
    // sequence m, m-1, ... truncated at that rank.
    const Index count = std::min(spec.m, spec.n - 1);
    auto range = [&] {
      auto v = descending_range(spec.m);
      v.resize(static_cast<std::size_t>(count));
      return v;
    };
    if (!s.has("singular_values")) {
      spec.singular_values = range();
    } else {
      const json& sv = s.raw("singular_values");
      const std::string where = s.field("singular_values");
      if (sv.is_string()) {
        if (sv.get<std::string>() != "range") throw ConfigError(where, "expected \"range\", a list, or {\"linspace\": [hi, lo]}");
        spec.singular_values = range();
      } else if (sv.is_array()) {
        spec.singular_values = list_of<double>(sv, where);
      } else if (sv.is_object()) {
        Section ls(sv, where);
        auto ends = list_of<double>(ls.raw("linspace"), ls.field("linspace"));
        ls.finish();
        if (ends.size() != 2) throw ConfigError(ls.field("linspace"), "expected [hi, lo]");
        spec.singular_values = linspace_desc(ends[0], ends[1], count);
      } else {
        throw ConfigError(where, "unsupported value");
      }
    }
    d.synthetic = spec;
  } else if (kind == "file") {
    d.path = s.require<std::string>("path");
    std::string fmt = s.get<std::string>("format", "csv");
    try {
      d.format = parse_dataset_format(fmt);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(s.field("format"), e.what());
    }
  } else {
    throw ConfigError(s.field("kind"), "expected synthetic or file");
  }
  s.finish();
  return d;
}

SchemeTemplate parse_scheme_entry(const json& j, const std::string& where) {
  Section s(j, where);
  SchemeTemplate t;
  try {
    t.scheme = parse_scheme(s.require<std::string>("name"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.field("name"), e.what());
  }
  switch (t.scheme) {
    case Scheme::uniform:
      t.lambda = s.require<double>("lambda");
      if (!(t.lambda >= 0)) throw ConfigError(s.field("lambda"), "must be non-negative");
      break;
    case Scheme::nonuniform:
      if (s.has("lambdas")) {
        t.lambdas = list_of<double>(s.raw("lambdas"), s.field("lambdas"));
      } else {
        auto r = list_of<double>(s.raw("sqrt_lambda"), s.field("sqrt_lambda"));
        if (r.size() != 2 || !(r[0] > 0) || !(r[1] > r[0]))
          throw ConfigError(s.field("sqrt_lambda"), "expected [lo, hi] with 0 < lo < hi");
        t.sqrt_lambda_lo = r[0];
        t.sqrt_lambda_hi = r[1];
      }
      break;
    case Scheme::nd_stochastic:
    case Scheme::nd_deterministic:
      t.rho = s.get<double>("rho", 0.9);
      if (!(t.rho > 0 && t.rho < 1)) throw ConfigError(s.field("rho"), "must lie in (0, 1)");
      break;
    case Scheme::none:
    case Scheme::rag:
      break;
  }
  s.finish();
  return t;
}

OptimizerConfig parse_optimizer_entry(const json& j, const std::string& where) {
  Section s(j, where);
  OptimizerConfig o;
  try {
    o.optimizer = parse_optimizer(s.require<std::string>("name"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.field("name"), e.what());
  }
  o.alphas = list_of<double>(s.raw("alphas"), s.field("alphas"));
  if (o.alphas.empty()) throw ConfigError(s.field("alphas"), "must not be empty");
  for (std::size_t i = 0; i < o.alphas.size(); ++i)
    if (!(o.alphas[i] > 0)) throw ConfigError(s.field("alphas") + "[" + std::to_string(i) + "]", "must be positive");
  o.momentum = s.get<double>("momentum", 0.9);
  if (!(o.momentum >= 0 && o.momentum < 1)) throw ConfigError(s.field("momentum"), "must lie in [0, 1)");
  if (s.has("betas")) {
    auto b = list_of<double>(s.raw("betas"), s.field("betas"));
    if (b.size() != 2 || !(b[0] >= 0 && b[0] < 1 && b[1] >= 0 && b[1] < 1))
      throw ConfigError(s.field("betas"), "expected [beta1, beta2] in [0, 1)");
    o.adam.beta1 = b[0];
    o.adam.beta2 = b[1];
  }
  o.adam.eps = s.get<double>("eps", 1e-8);
  if (!(o.adam.eps > 0)) throw ConfigError(s.field("eps"), "must be positive");
  s.finish();
  return o;
}

}  // namespace

RegularizerSpec SchemeTemplate::instantiate(Index k) const {
  switch (scheme) {
    case Scheme::none: return RegularizerSpec::none();
    case Scheme::uniform: return RegularizerSpec::uniform(lambda);
    case Scheme::nonuniform:
      if (!lambdas.empty()) {
        if (static_cast<Index>(lambdas.size()) < k)
          throw ConfigError("schemes.lambdas", "fewer entries than latent dimension " + std::to_string(k));
        return RegularizerSpec::nonuniform(Eigen::Map<const Vector>(lambdas.data(), k));
      }
      return RegularizerSpec::nonuniform_sqrt_range(sqrt_lambda_lo, sqrt_lambda_hi, k);
    case Scheme::nd_stochastic: return RegularizerSpec::nested_dropout(geometric_prior(rho, k), false);
    case Scheme::nd_deterministic: return RegularizerSpec::nested_dropout(geometric_prior(rho, k), true);
    case Scheme::rag: return RegularizerSpec::rag();
  }
  throw std::logic_error("unhandled scheme");
}

ExperimentConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  Section s(root, "");
  ExperimentConfig c;
  if (!s.has("dataset")) throw ConfigError("dataset", "required field missing");
  c.dataset = parse_dataset(s.raw("dataset"));

  const json& schemes = s.raw("schemes");
  if (!schemes.is_array() || schemes.empty()) throw ConfigError("schemes", "expected a non-empty list");
  for (std::size_t i = 0; i < schemes.size(); ++i)
    c.schemes.push_back(parse_scheme_entry(schemes[i], "schemes[" + std::to_string(i) + "]"));

  const json& opts = s.raw("optimizers");
  if (!opts.is_array() || opts.empty()) throw ConfigError("optimizers", "expected a non-empty list");
  for (std::size_t i = 0; i < opts.size(); ++i)
    c.optimizers.push_back(parse_optimizer_entry(opts[i], "optimizers[" + std::to_string(i) + "]"));

  if (s.has("training")) {
    Section t(s.raw("training"), "training");
    c.epochs = t.get<long>("epochs", c.epochs);
    if (c.epochs < 0) throw ConfigError("training.epochs", "must be non-negative");
    c.eval_every = t.get<long>("eval_every", c.eval_every);
    if (c.eval_every < 1) throw ConfigError("training.eval_every", "must be positive");
    if (t.has("batch_size")) {
      const json& b = t.raw("batch_size");
      if (b.is_string() && b.get<std::string>() == "full") {
        c.batch_size = 0;
      } else {
        c.batch_size = Section::as<Index>(b, "training.batch_size");
        if (c.batch_size < 1) throw ConfigError("training.batch_size", "must be positive or \"full\"");
      }
    }
    c.init_std = t.get<double>("init_std", c.init_std);
    if (!(c.init_std > 0)) throw ConfigError("training.init_std", "must be positive");
    c.stop_at_threshold = t.get<bool>("stop_at_threshold", c.stop_at_threshold);
    t.finish();
  }
  if (s.has("thresholds")) {
    c.thresholds = list_of<double>(s.raw("thresholds"), "thresholds");
    if (c.thresholds.empty()) throw ConfigError("thresholds", "must not be empty");
  }
  if (s.has("threshold_metric")) {
    try {
      c.threshold_metric = parse_metric(s.get<std::string>("threshold_metric", "d_align"));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("threshold_metric", e.what());
    }
  }
  if (s.has("seeds")) {
    c.seeds = list_of<std::uint64_t>(s.raw("seeds"), "seeds");
    if (c.seeds.empty()) throw ConfigError("seeds", "must not be empty");
  }
  if (s.has("latent_dims")) {
    c.latent_dims = list_of<Index>(s.raw("latent_dims"), "latent_dims");
    for (Index k : c.latent_dims)
      if (k < 1) throw ConfigError("latent_dims", "entries must be positive");
  }
  if (c.latent_dims.empty()) c.latent_dims = {c.dataset.k};
  for (Index k : c.latent_dims)
    if (k > c.dataset.k) throw ConfigError("latent_dims", "entries may not exceed dataset.k");
  c.output_dir = s.get<std::string>("output_dir", c.output_dir);
  c.workers = s.get<unsigned>("workers", c.workers);
  c.write_traces = s.get<bool>("write_traces", c.write_traces);
  s.finish();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw MissingInputError("config file not found: " + path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

json scheme_json(const SchemeTemplate& t) {
  json j;
  j["name"] = to_string(t.scheme);
  switch (t.scheme) {
    case Scheme::uniform: j["lambda"] = t.lambda; break;
    case Scheme::nonuniform:
      if (!t.lambdas.empty())
        j["lambdas"] = t.lambdas;
      else
        j["sqrt_lambda"] = {t.sqrt_lambda_lo, t.sqrt_lambda_hi};
      break;
    case Scheme::nd_stochastic:
    case Scheme::nd_deterministic: j["rho"] = t.rho; break;
    default: break;
  }
  return j;
}

json optimizer_json(const OptimizerConfig& o, bool with_alphas) {
  json j;
  j["name"] = to_string(o.optimizer);
  if (with_alphas) j["alphas"] = o.alphas;
  if (o.optimizer == Optimizer::nesterov) j["momentum"] = o.momentum;
  if (o.optimizer == Optimizer::adam) {
    j["betas"] = {o.adam.beta1, o.adam.beta2};
    j["eps"] = o.adam.eps;
  }
  return j;
}

json dataset_json(const DatasetConfig& d) {
  json j;
  j["k"] = d.k;
  if (d.synthetic) {
    j["kind"] = "synthetic";
    j["m"] = d.synthetic->m;
    j["n"] = d.synthetic->n;
    j["seed"] = d.synthetic->seed;
    j["singular_values"] = d.synthetic->singular_values;
  } else {
    j["kind"] = "file";
    j["path"] = d.path;
    j["format"] = d.format == DatasetFormat::csv ? "csv" : "idx";
  }
  return j;
}

json training_json(const ExperimentConfig& c) {
  json t;
  t["epochs"] = c.epochs;
  t["eval_every"] = c.eval_every;
  if (c.batch_size == 0)
    t["batch_size"] = "full";
  else
    t["batch_size"] = c.batch_size;
  t["init_std"] = c.init_std;
  t["stop_at_threshold"] = c.stop_at_threshold;
  return t;
}

}  // namespace

std::string canonical_json(const ExperimentConfig& c) {
  json j;
  j["dataset"] = dataset_json(c.dataset);
  j["schemes"] = json::array();
  for (const auto& s : c.schemes) j["schemes"].push_back(scheme_json(s));
  j["optimizers"] = json::array();
  for (const auto& o : c.optimizers) j["optimizers"].push_back(optimizer_json(o, true));
  j["training"] = training_json(c);
  j["thresholds"] = c.thresholds;
  j["threshold_metric"] = to_string(c.threshold_metric);
  j["seeds"] = c.seeds;
  j["latent_dims"] = c.latent_dims;
  return j.dump();
}

std::string fingerprint(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string run_fingerprint(const ExperimentConfig& c, const RunSpec& run) {
  json j;
  j["dataset"] = dataset_json(c.dataset);
  j["scheme"] = scheme_json(run.scheme);
  j["optimizer"] = optimizer_json(run.optimizer, false);
  j["alpha"] = run.alpha;
  j["k"] = run.k;
  j["seed"] = run.seed;
  j["training"] = training_json(c);
  if (c.stop_at_threshold) {
    j["stop_metric"] = to_string(c.threshold_metric);
    j["thresholds"] = c.thresholds;
  }
  return fingerprint(j.dump());
}

}  // namespace lae::harness
