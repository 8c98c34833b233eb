#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "hsicssl/matrix.h"

namespace hsicssl {

/// Per-view augmentation applied to vector data.
struct AugmentSpec {
  double noise_std = 0.0;           // additive Gaussian noise
  double rotation_max_angle = 0.0;  // radians, Givens rotation in a random coordinate plane
  double coord_dropout_prob = 0.0;  // each coordinate zeroed independently, in [0, 1)
  double scale_jitter = 0.0;        // global scale drawn from [1 - j, 1 + j]

  static AugmentSpec none() { return {}; }
  static AugmentSpec defaults();
  void validate() const;
};

struct GeneratorConfig {
  int classes = 4;
  int samples = 512;
  int latent_dim = 4;
  int input_dim = 16;
  double class_separation = 3.0;  // std of the class centers in latent space
  double within_class_std = 1.0;
  AugmentSpec augment = AugmentSpec::defaults();
  std::uint64_t seed = 0;

  void validate() const;
};

struct TwoViewDataset {
  Matrix view_a;
  Matrix view_b;
  std::optional<std::vector<int>> labels;  // absent for unlabeled CSV input
  std::optional<GeneratorConfig> gen_config;

  Eigen::Index size() const { return view_a.rows(); }
  Eigen::Index input_dim() const { return view_a.cols(); }
  int num_classes() const;
  /// Rows in `indices`, in that order.
  TwoViewDataset subset(const std::vector<Eigen::Index>& indices) const;
};

/// Each sample draws a class, a latent point around that class's center, embeds
/// it with a fixed random linear map into input_dim dimensions, and augments
/// the embedding twice independently. Sample i uses its own substream derived
/// from (seed, i), so growing `samples` leaves earlier rows unchanged.
TwoViewDataset generate(const GeneratorConfig& cfg);

/// Reads two view CSVs (one header row each) and an optional labels file
/// (one integer per line). Errors name the offending 0-based data row.
TwoViewDataset load_paired_csv(const std::filesystem::path& path_a,
                               const std::filesystem::path& path_b,
                               const std::optional<std::filesystem::path>& path_labels);

/// Header "x0,x1,...", values printed with %.17g so reloads are exact.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const std::vector<int>& labels);
std::vector<int> read_labels(const std::filesystem::path& path);

void save_paired_csv(const TwoViewDataset& data, const std::filesystem::path& path_a,
                     const std::filesystem::path& path_b,
                     const std::optional<std::filesystem::path>& path_labels);

}  // namespace hsicssl
