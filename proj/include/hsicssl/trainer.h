#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hsicssl/losses.h"
#include "hsicssl/matrix.h"
#include "hsicssl/rng.h"
#include "hsicssl/synthgen.h"

namespace hsicssl {

enum class Activation { ReLU, Tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view text);

/// Fully connected layer, y = x W + b with W stored in_dim x out_dim.
struct DenseLayer {
  Matrix w;
  RowVector b;
};

/// Stack of dense layers. Hidden layers are always followed by the
/// activation; the last layer only when activate_output is set.
struct Mlp {
  std::vector<DenseLayer> layers;
  Activation activation = Activation::ReLU;
  bool activate_output = false;

  Eigen::Index input_dim() const { return layers.front().w.rows(); }
  Eigen::Index output_dim() const { return layers.back().w.cols(); }

  Matrix forward(const Matrix& x) const;
  bool all_finite() const;
  std::size_t parameter_count() const;
};

/// widths = {in, hidden..., out}; weights uniform in +-1/sqrt(fan_in), biases 0.
Mlp init_mlp(const std::vector<int>& widths, Activation act, bool activate_output, Rng& rng);

struct EncoderConfig {
  std::vector<int> encoder_widths;    // input_dim, hidden..., feature_dim
  std::vector<int> projector_widths;  // feature_dim, hidden..., proj_dim
  Activation activation = Activation::ReLU;
  std::uint64_t init_seed = 0;

  int feature_dim() const { return encoder_widths.back(); }
  int proj_dim() const { return projector_widths.back(); }
  void validate() const;
};

struct TrainConfig {
  LossKind loss = LossKind::BarlowTwins;
  Lambda lambda{};
  int batch_size = 64;
  int epochs = 50;
  double learning_rate = 0.05;
  double momentum = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Encoder (kept for evaluation) and projector (dropped for evaluation). Both
/// views of every batch go through this single parameter set.
struct TrainedModel {
  Mlp encoder;
  Mlp projector;
  std::vector<double> loss_trajectory;  // mean batch loss per epoch

  /// Encoder followed by projector.
  Matrix project(const Matrix& inputs) const;
};

TrainedModel init_model(const EncoderConfig& enc);

/// Minibatch SGD with momentum on the chosen loss. Each epoch draws a fresh
/// permutation from `cfg.seed` and drops the trailing partial batch. Batch
/// outputs are standardized with the batch's own statistics and the loss
/// gradient flows back through that standardization.
TrainedModel train(const TwoViewDataset& data, const EncoderConfig& enc, const TrainConfig& cfg);

/// Encoder-only forward pass.
Matrix extract_features(const TrainedModel& model, const Matrix& inputs);

struct ProbeConfig {
  double train_fraction = 0.8;
  int epochs = 200;
  double learning_rate = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ProbeSplit {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Seeded permutation of [0, n); the first round(train_fraction * n) indices
/// form the train split.
ProbeSplit probe_split(Eigen::Index n, double train_fraction, std::uint64_t seed);

struct ProbeResult {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;  // NaN where a class has no test samples
  std::vector<int> per_class_count;        // test samples per class
  Matrix weights;                          // f x k, applied to z-scored features
  RowVector bias;
  RowVector feature_mean;
  RowVector feature_scale;
};

/// Multinomial logistic regression trained by full-batch gradient descent on
/// frozen features (z-scored with train-split statistics), evaluated on the
/// held-out split.
ProbeResult linear_probe(const Matrix& features, const std::vector<int>& labels,
                         const ProbeConfig& cfg);

/// Text checkpoint. Layout (one item per line):
///   hsicssl-checkpoint <version>
///   meta <count>, then <count> lines of key=value
///   mlp <name> <activation> <activate_output> <layer count>
///   layer <in> <out>, then one line of in*out row-major weights, one line of biases
///   trajectory <count>, then one line of values
///   end
/// Values are C99 hex floats so a reload is bit-exact.
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model,
                     const std::map<std::string, std::string>& meta);

struct LoadedCheckpoint {
  TrainedModel model;
  std::map<std::string, std::string> meta;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hsicssl
