#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hsicssl/error.h"
#include "hsicssl/trainer.h"
#include "support.h"

using namespace hsicssl;
namespace fs = std::filesystem;

namespace {

TwoViewDataset small_data(int samples = 256, std::uint64_t seed = 4) {
  GeneratorConfig g;
  g.samples = samples;
  g.seed = seed;
  return generate(g);
}

EncoderConfig small_encoder(int d = 8, std::uint64_t seed = 1) {
  EncoderConfig e;
  e.encoder_widths = {16, 32, 16};
  e.projector_widths = {16, 32, d};
  e.init_seed = seed;
  return e;
}

TrainConfig small_train(LossKind kind, int d = 8) {
  TrainConfig t;
  t.loss = kind;
  t.lambda = default_lambda(d);
  t.batch_size = 32;
  t.epochs = 3;
  t.learning_rate = 0.05;
  t.seed = 9;
  return t;
}

bool same_weights(const Mlp& a, const Mlp& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    if (a.layers[l].w != b.layers[l].w || a.layers[l].b != b.layers[l].b) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("zero learning rate leaves the weights at their initialization") {
  const TwoViewDataset data = small_data();
  TrainConfig t = small_train(LossKind::BarlowTwins);
  t.learning_rate = 0.0;
  t.epochs = 1;
  const TrainedModel m = train(data, small_encoder(), t);
  const TrainedModel init = init_model(small_encoder());
  CHECK(same_weights(m.encoder, init.encoder));
  CHECK(same_weights(m.projector, init.projector));
  CHECK(m.loss_trajectory.size() == 1);

  // One batch per epoch: only the row order changes between epochs.
  TrainConfig whole = t;
  whole.epochs = 4;
  whole.batch_size = static_cast<int>(data.size());
  const TrainedModel w = train(data, small_encoder(), whole);
  for (double v : w.loss_trajectory) CHECK(v == doctest::Approx(w.loss_trajectory.front()).epsilon(1e-12));
}

TEST_CASE("training is bitwise deterministic for fixed seeds") {
  const TwoViewDataset data = small_data();
  for (LossKind kind : {LossKind::BarlowTwins, LossKind::HsicSsl}) {
    const TrainedModel a = train(data, small_encoder(), small_train(kind));
    const TrainedModel b = train(data, small_encoder(), small_train(kind));
    CHECK(same_weights(a.encoder, b.encoder));
    CHECK(same_weights(a.projector, b.projector));
    CHECK(a.loss_trajectory == b.loss_trajectory);
  }
}

TEST_CASE("training lowers the loss for both kinds") {
  const TwoViewDataset data = small_data(512);
  for (LossKind kind : {LossKind::BarlowTwins, LossKind::HsicSsl}) {
    TrainConfig t = small_train(kind);
    t.epochs = 10;
    const TrainedModel m = train(data, small_encoder(), t);
    CHECK(m.loss_trajectory.back() < m.loss_trajectory.front());
  }
}

TEST_CASE("both views share one parameter set") {
  // Swapping the views transposes C, which leaves either loss unchanged and
  // swaps the two gradient contributions; with a single shared parameter set
  // the summed update is the same up to rounding.
  const TwoViewDataset data = small_data();
  TwoViewDataset swapped = data;
  std::swap(swapped.view_a, swapped.view_b);
  TrainConfig t = small_train(LossKind::HsicSsl);
  t.epochs = 1;
  const TrainedModel a = train(data, small_encoder(), t);
  const TrainedModel b = train(swapped, small_encoder(), t);
  for (std::size_t l = 0; l < a.encoder.layers.size(); ++l) {
    CHECK((a.encoder.layers[l].w - b.encoder.layers[l].w).cwiseAbs().maxCoeff() <= 1e-9);
  }
  CHECK(std::abs(a.loss_trajectory[0] - b.loss_trajectory[0]) <= 1e-9);
}

TEST_CASE("train config errors") {
  const TwoViewDataset data = small_data(64);
  TrainConfig t = small_train(LossKind::BarlowTwins);
  t.batch_size = 65;
  CHECK_THROWS_AS(train(data, small_encoder(), t), ConfigError);
  t = small_train(LossKind::BarlowTwins);
  t.batch_size = 1;
  CHECK_THROWS_AS(train(data, small_encoder(), t), ConfigError);
  t = small_train(LossKind::BarlowTwins);
  t.epochs = 0;
  CHECK_THROWS_AS(train(data, small_encoder(), t), ConfigError);
  EncoderConfig bad = small_encoder();
  bad.projector_widths.front() = 7;
  CHECK_THROWS_AS(train(data, bad, small_train(LossKind::BarlowTwins)), ConfigError);
}

TEST_CASE("divergence is detected and names the epoch") {
  const TwoViewDataset data = small_data(128);
  TrainConfig t = small_train(LossKind::HsicSsl);
  t.learning_rate = 1e200;
  t.epochs = 5;
  try {
    train(data, small_encoder(), t);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.epoch() >= 1);
    CHECK(std::string(e.what()).find("epoch " + std::to_string(e.epoch())) != std::string::npos);
  }
}

TEST_CASE("extract_features excludes the projector") {
  // Identity encoder: one ReLU layer with W = I, b = 0 on non-negative inputs.
  TrainedModel m;
  m.encoder.layers.push_back({Matrix::Identity(3, 3), RowVector::Zero(3)});
  m.encoder.activate_output = true;
  m.projector.layers.push_back({Matrix::Ones(3, 2), RowVector::Zero(2)});
  const Matrix x = hsicssl::testing::gaussian(3, 10, 3).cwiseAbs();
  CHECK(extract_features(m, x) == x);
  m.projector.layers[0].w *= 5.0;
  CHECK(extract_features(m, x) == x);
  CHECK_THROWS_AS(extract_features(m, Matrix::Ones(4, 2)), DimensionError);

  const TwoViewDataset data = small_data();
  const TrainedModel trained = train(data, small_encoder(), small_train(LossKind::BarlowTwins));
  const Matrix f = extract_features(trained, data.view_a);
  CHECK(f.rows() == data.size());
  CHECK(f.cols() == 16);
  CHECK(f.allFinite());
}

TEST_CASE("linear probe separates two separable classes") {
  Matrix f(200, 2);
  std::vector<int> labels(200);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    labels[static_cast<std::size_t>(i)] = i % 2;
    f(i, 0) = (i % 2 ? 3.0 : -3.0) + rng.uniform(-1, 1);
    f(i, 1) = rng.normal();
  }
  const ProbeResult r = linear_probe(f, labels, ProbeConfig{});
  CHECK(r.accuracy == 1.0);
  double weighted = 0.0;
  int total = 0;
  for (std::size_t c = 0; c < r.per_class_count.size(); ++c) {
    weighted += r.per_class_accuracy[c] * r.per_class_count[c];
    total += r.per_class_count[c];
  }
  CHECK(weighted / total == doctest::Approx(r.accuracy));
}

TEST_CASE("linear probe on shuffled labels is at chance") {
  const TwoViewDataset data = small_data(2000, 12);
  std::vector<int> labels = *data.labels;
  Rng rng(13);
  rng.shuffle(labels);
  const ProbeResult r = linear_probe(data.view_a, labels, ProbeConfig{});
  CHECK(std::abs(r.accuracy - 0.25) <= 0.1);
}

TEST_CASE("linear probe split errors and determinism") {
  Matrix f = hsicssl::testing::gaussian(1, 20, 2);
  std::vector<int> labels(20, 0);
  labels[0] = 1;  // class 1 can have at most one training sample
  CHECK_THROWS_AS(linear_probe(f, labels, ProbeConfig{}), SplitError);

  const TwoViewDataset data = small_data();
  const ProbeResult a = linear_probe(data.view_a, *data.labels, ProbeConfig{});
  const ProbeResult b = linear_probe(data.view_a, *data.labels, ProbeConfig{});
  CHECK(a.accuracy == b.accuracy);
  CHECK(a.weights == b.weights);

  const ProbeSplit s = probe_split(10, 0.8, 3);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const fs::path dir = fs::temp_directory_path() / "hsicssl_test_ckpt";
  fs::create_directories(dir);
  const TwoViewDataset data = small_data();
  const TrainedModel m = train(data, small_encoder(), small_train(LossKind::HsicSsl));
  save_checkpoint(dir / "m.ckpt", m, {{"run_id", "abc"}, {"config.loss", "hsic_ssl"}});
  const LoadedCheckpoint ck = load_checkpoint(dir / "m.ckpt");
  CHECK(same_weights(ck.model.encoder, m.encoder));
  CHECK(same_weights(ck.model.projector, m.projector));
  CHECK(ck.model.loss_trajectory == m.loss_trajectory);
  CHECK(ck.meta.at("run_id") == "abc");
  CHECK(extract_features(ck.model, data.view_a) == extract_features(m, data.view_a));
}

TEST_CASE("checkpoint version mismatch and corruption are rejected") {
  const fs::path dir = fs::temp_directory_path() / "hsicssl_test_ckpt_bad";
  fs::create_directories(dir);
  const TrainedModel m = init_model(small_encoder());
  save_checkpoint(dir / "m.ckpt", m, {});
  std::ifstream in(dir / "m.ckpt");
  std::string text((std::istreambuf_iterator<char>(in)), {});

  std::string v2 = text;
  v2.replace(v2.find("checkpoint 1"), 12, "checkpoint 2");
  std::ofstream(dir / "v2.ckpt") << v2;
  try {
    load_checkpoint(dir / "v2.ckpt");
    FAIL("expected a CheckpointError");
  } catch (const CheckpointError& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }

  std::ofstream(dir / "trunc.ckpt") << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(load_checkpoint(dir / "trunc.ckpt"), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.ckpt"), CheckpointError);
}

TEST_CASE("trained projections do not collapse and HSIC_SSL pushes C negative") {
  GeneratorConfig g;
  g.samples = 1024;
  g.seed = 31;
  const TwoViewDataset train_data = generate(g);
  g.seed = 32;
  g.samples = 256;
  const TwoViewDataset held_out = generate(g);

  double mean_off[2] = {0.0, 0.0};
  int idx = 0;
  for (LossKind kind : {LossKind::BarlowTwins, LossKind::HsicSsl}) {
    TrainConfig t = small_train(kind);
    t.epochs = 100;
    t.batch_size = 64;
    const TrainedModel m = train(train_data, small_encoder(), t);
    const FeatureBatch za = standardize(RawBatch(m.project(held_out.view_a)));
    const FeatureBatch zb = standardize(RawBatch(m.project(held_out.view_b)));
    const Matrix self = cross_correlation(za, za).c;
    const Matrix cross = cross_correlation(za, zb).c;
    // Participation ratio of the self-correlation spectrum: 1 for a fully
    // collapsed projection, d for a white one.
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Matrix>(self).eigenvalues();
    const double participation = eig.sum() * eig.sum() / eig.squaredNorm();
    CHECK(participation > 1.5);
    CHECK(cross.diagonal().mean() > 0.5);
    const Eigen::Index d = cross.rows();
    mean_off[idx++] = (cross.sum() - cross.diagonal().sum()) / (d * (d - 1));
  }
  MESSAGE("mean off-diagonal C: BT " << mean_off[0] << ", HSIC_SSL " << mean_off[1]);
  CHECK(mean_off[1] < mean_off[0]);
  CHECK(mean_off[1] < 0.0);
}
