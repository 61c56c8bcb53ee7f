#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lae/data.hpp"
#include "lae/objectives.hpp"
#include "lae/optimizers.hpp"

namespace lae::harness {

/// Process exit codes used by the CLI.
enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_missing_input = 2, exit_bad_config = 3 };

/// Invalid configuration; `field` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& why)
      : std::runtime_error(field + ": " + why), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// A required input file does not exist.
class MissingInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetConfig {
  std::optional<SyntheticSpec> synthetic;
  std::string path;
  DatasetFormat format = DatasetFormat::csv;
  Index k = 0;
};

/// Scheme parameters that are instantiated once the latent size is known.
struct SchemeTemplate {
  Scheme scheme = Scheme::none;
  double lambda = 0.0;
  std::vector<double> lambdas;
  double sqrt_lambda_lo = 0.1;
  double sqrt_lambda_hi = 10.0;
  double rho = 0.9;

  RegularizerSpec instantiate(Index k) const;
};

struct OptimizerConfig {
  Optimizer optimizer = Optimizer::nesterov;
  std::vector<double> alphas;
  double momentum = 0.9;
  AdamParams adam;
};

struct ExperimentConfig {
  DatasetConfig dataset;
  std::vector<SchemeTemplate> schemes;
  std::vector<OptimizerConfig> optimizers;
  long epochs = 1000;
  long eval_every = 10;
  Index batch_size = 0;
  double init_std = 1e-2;
  bool stop_at_threshold = false;
  Metric threshold_metric = Metric::d_align;
  std::vector<double> thresholds{0.3, 0.05};
  std::vector<std::uint64_t> seeds{0};
  std::vector<Index> latent_dims;
  std::string output_dir = "out";
  unsigned workers = 0;
  bool write_traces = true;
};

/// Parses the JSON config text. Unknown keys and bad values raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical serialization with sorted keys; equal configs give equal text.
std::string canonical_json(const ExperimentConfig& config);

/// 64-bit FNV-1a as 16 hex digits.
std::string fingerprint(const std::string& text);

/// One fully specified training run.
struct RunSpec {
  SchemeTemplate scheme;
  OptimizerConfig optimizer;
  double alpha = 0;
  Index k = 0;
  std::uint64_t seed = 0;
};

struct RunRecord {
  std::string fingerprint;
  std::string scheme;
  std::string optimizer;
  double alpha = 0;
  Index k = 0;
  std::uint64_t seed = 0;
  bool diverged = false;
  std::string fault;
  TraceRecord final_metrics;
  std::map<double, std::optional<long>> epochs_to_threshold;
  std::string trace_file;
};

/// Loads or generates the dataset and its oracle spectrum with k_max components.
struct PreparedData {
  DataMatrix X;
  Spectrum spectrum;
};
PreparedData prepare_data(const DatasetConfig& dataset, Index k_max);

/// Restricts a spectrum to its top k components.
Spectrum top_components(const Spectrum& s, Index k);

std::string run_fingerprint(const ExperimentConfig& config, const RunSpec& run);
TrainConfig make_train_config(const ExperimentConfig& config, const RunSpec& run);
RunRecord execute_run(const ExperimentConfig& config, const PreparedData& data, const RunSpec& run,
                      const std::string& trace_dir);

void write_trace_csv(const MetricTrace& trace, const std::string& path);
std::string run_record_json(const RunRecord& record);

/// Minimal SVG line plot; each series is a list of (x, y) points.
void write_svg_lineplot(const std::string& path, const std::string& title, const std::string& x_label,
                        const std::string& y_label,
                        const std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>>& series);

struct GradCheckOptions {
  int instances = 50;
  std::uint64_t seed = 0;
  double eps = 1e-5;
  double tolerance = 1e-5;
  /// Test fixture: negates the analytic decoder gradient of this objective.
  std::string inject_fault;
};

struct GradCheckRow {
  std::string objective;
  double max_rel_error = 0;
  bool pass = false;
};

std::vector<GradCheckRow> run_gradient_check(const GradCheckOptions& opts);

/// Entry point shared by the CLI binary; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace lae::harness
