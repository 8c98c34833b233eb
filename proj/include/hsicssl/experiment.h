#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hsicssl/synthgen.h"
#include "hsicssl/trainer.h"

namespace hsicssl {

/// Everything needed to reproduce one run: data generator, architecture,
/// optimizer, loss and probe protocol.
///
/// Config files are flat `key=value` lines; `#` starts a comment. Unknown keys
/// are rejected. Keys (defaults in parentheses):
///   classes (4) samples (2560) latent_dim (4) input_dim (16)
///   class_separation (3) within_class_std (1) noise_std (0.8)
///   rotation_max_angle (0.5) coord_dropout_prob (0.1) scale_jitter (0.1)
///   data_seed (1)
///   encoder_widths (64,32)   hidden widths then feature width; input_dim is prepended
///   projector_widths (64)    hidden widths; feature width is prepended, proj_dim appended
///   proj_dim (8) activation (relu) init_seed (100)
///   loss (barlow_twins) lambda (auto = 1/proj_dim, or a positive number)
///   batch_size (64) epochs (50) learning_rate (0.05) momentum (0.9) train_seed (200)
///   probe_train_fraction (0.8) probe_epochs (200) probe_learning_rate (0.5) probe_seed (0)
/// The probe split is computed over all `samples`; self-supervised training
/// sees only the rows in its train split.
struct ExperimentConfig {
  GeneratorConfig gen;
  std::vector<int> encoder_widths{64, 32};
  std::vector<int> projector_hidden{64};
  int proj_dim = 8;
  Activation activation = Activation::ReLU;
  std::uint64_t init_seed = 100;
  LossKind loss = LossKind::BarlowTwins;
  std::optional<double> lambda;  // empty = 1/proj_dim
  int batch_size = 64;
  int epochs = 50;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t train_seed = 200;
  ProbeConfig probe;

  ExperimentConfig();

  EncoderConfig encoder_config() const;
  TrainConfig train_config() const;
  Lambda resolved_lambda() const;
  void validate() const;

  /// Canonical ordered key/value form; parse_config_entries() inverts it.
  std::vector<std::pair<std::string, std::string>> to_entries() const;
  /// Stable id derived from the canonical entries (FNV-1a).
  std::string run_id() const;
};

/// Applies one key=value assignment; throws ConfigError naming the key.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig parse_config_entries(const std::vector<std::pair<std::string, std::string>>& kv);

/// Reads `key=value` lines. Returns entries in file order.
std::vector<std::pair<std::string, std::string>> read_kv_file(const std::filesystem::path& path);
ExperimentConfig load_config(const std::filesystem::path& path);

enum class RunStatus { Ok, Diverged, Failed };
std::string_view to_string(RunStatus s);

struct ExperimentRecord {
  std::string run_id;
  ExperimentConfig config;
  RunStatus status = RunStatus::Ok;
  std::string message;  // failure reason, empty on success
  double accuracy = 0.0;
  std::vector<double> loss_trajectory;
  double wall_seconds = 0.0;
};

struct RunOutput {
  ExperimentRecord record;
  std::optional<TrainedModel> model;
};

/// Generates data, trains on the probe's train split, extracts encoder
/// features for all samples (view a) and runs the linear probe. Training
/// divergence is reported through the record status, not thrown.
RunOutput run_experiment(const ExperimentConfig& cfg);

/// Probe accuracy of a model against the dataset described by `cfg`.
ProbeResult evaluate_model(const TrainedModel& model, const ExperimentConfig& cfg);
ProbeResult evaluate_model(const TrainedModel& model, const TwoViewDataset& data,
                           const ProbeConfig& probe);

// ---- results CSV ----

std::vector<std::string> results_header();
std::vector<std::string> record_to_row(const ExperimentRecord& rec);
ExperimentRecord row_to_record(const std::vector<std::string>& header,
                               const std::vector<std::string>& row);

/// Creates the file with a header if missing or empty; otherwise checks the
/// header matches and appends.
void append_results(const std::filesystem::path& path, const std::vector<ExperimentRecord>& recs);
std::vector<ExperimentRecord> load_results(const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double v);
std::string csv_join(const std::vector<std::string>& fields);
std::vector<std::string> csv_split(const std::string& line);

// ---- sweeps ----

enum class SweepAxis { ProjectorDim, BatchSize, Epochs };
std::string_view to_string(SweepAxis a);
SweepAxis parse_sweep_axis(std::string_view text);

/// Plan files use the config keys for the base run plus
///   axis (proj_dim | batch_size | epochs), values (comma list),
///   repeats (3), both_losses (true).
/// Repeat r offsets init_seed and train_seed by r.
struct SweepPlan {
  ExperimentConfig base;
  SweepAxis axis = SweepAxis::ProjectorDim;
  std::vector<int> values;
  int repeats = 3;
  bool both_losses = true;

  void validate() const;
  /// Cross product in a fixed order: value, then loss, then repeat.
  std::vector<ExperimentConfig> expand() const;
};

SweepPlan load_plan(const std::filesystem::path& path);

int axis_value(const ExperimentConfig& cfg, SweepAxis axis);

/// Runs every config on `jobs` worker threads. Records come back in plan
/// order; when `results_path` is set each record is appended as soon as all
/// earlier ones are written, through one writer.
std::vector<ExperimentRecord> run_sweep(const std::vector<ExperimentConfig>& runs, int jobs,
                                        const std::optional<std::filesystem::path>& results_path);

/// Accuracy vs axis value, one series per loss, mean marker with a min-max
/// bar over repeats. Deterministic for a fixed record list.
std::string render_sweep_svg(const std::vector<ExperimentRecord>& recs, SweepAxis axis);

}  // namespace hsicssl
