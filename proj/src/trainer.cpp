#include "hsicssl/trainer.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "hsicssl/error.h"

namespace hsicssl {

std::string_view to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Activation parse_activation(std::string_view text) {
  std::string s;
  for (char c : text) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "relu") return Activation::ReLU;
  if (s == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + std::string(text) + "' (expected relu or tanh)");
}

namespace {

void apply_activation(Matrix& m, Activation act) {
  if (act == Activation::ReLU) {
    m = m.cwiseMax(0.0);
  } else {
    m = m.array().tanh().matrix();
  }
}

// Per-layer values kept from the forward pass for backprop.
struct LayerCache {
  Matrix input;
  Matrix output;  // post-activation when the layer is activated
  bool activated = false;
};

Matrix forward_cached(const Mlp& mlp, const Matrix& x, std::vector<LayerCache>& cache) {
  cache.resize(mlp.layers.size());
  Matrix h = x;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    const auto& layer = mlp.layers[l];
    cache[l].input = h;
    h = (h * layer.w).rowwise() + layer.b;
    cache[l].activated = (l + 1 < mlp.layers.size()) || mlp.activate_output;
    if (cache[l].activated) apply_activation(h, mlp.activation);
    cache[l].output = h;
  }
  return h;
}

// Accumulates parameter gradients into `grads` and returns dLoss/dInput.
Matrix backward(const Mlp& mlp, const std::vector<LayerCache>& cache, Matrix grad,
                std::vector<DenseLayer>& grads) {
  for (std::size_t l = mlp.layers.size(); l-- > 0;) {
    const auto& c = cache[l];
    if (c.activated) {
      if (mlp.activation == Activation::ReLU) {
        grad = (c.output.array() > 0.0).select(grad, 0.0);
      } else {
        grad = grad.cwiseProduct((1.0 - c.output.array().square()).matrix());
      }
    }
    grads[l].w.noalias() += c.input.transpose() * grad;
    grads[l].b += grad.colwise().sum();
    grad = grad * mlp.layers[l].w.transpose();
  }
  return grad;
}

std::vector<DenseLayer> zeros_like(const Mlp& mlp) {
  std::vector<DenseLayer> out;
  for (const auto& l : mlp.layers) {
    out.push_back({Matrix::Zero(l.w.rows(), l.w.cols()), RowVector::Zero(l.b.size())});
  }
  return out;
}

void reset(std::vector<DenseLayer>& g) {
  for (auto& l : g) {
    l.w.setZero();
    l.b.setZero();
  }
}

void momentum_step(Mlp& mlp, std::vector<DenseLayer>& velocity, const std::vector<DenseLayer>& grads,
                   double lr, double momentum) {
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    velocity[l].w = momentum * velocity[l].w - lr * grads[l].w;
    velocity[l].b = momentum * velocity[l].b - lr * grads[l].b;
    mlp.layers[l].w += velocity[l].w;
    mlp.layers[l].b += velocity[l].b;
  }
}

}  // namespace

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    h = (h * layers[l].w).rowwise() + layers[l].b;
    if (l + 1 < layers.size() || activate_output) apply_activation(h, activation);
  }
  return h;
}

bool Mlp::all_finite() const {
  return std::all_of(layers.begin(), layers.end(),
                     [](const DenseLayer& l) { return l.w.allFinite() && l.b.allFinite(); });
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.w.size() + l.b.size());
  return n;
}

Mlp init_mlp(const std::vector<int>& widths, Activation act, bool activate_output, Rng& rng) {
  if (widths.size() < 2) throw ConfigError("an MLP needs at least an input and an output width");
  Mlp mlp;
  mlp.activation = act;
  mlp.activate_output = activate_output;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const int in = widths[i], out = widths[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer{Matrix(in, out), RowVector::Zero(out)};
    for (int r = 0; r < in; ++r)
      for (int c = 0; c < out; ++c) layer.w(r, c) = rng.uniform(-bound, bound);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

void EncoderConfig::validate() const {
  if (encoder_widths.size() < 2) throw ConfigError("encoder_widths needs input and feature width");
  if (projector_widths.size() < 2) {
    throw ConfigError("projector_widths needs feature and projection width");
  }
  for (int w : encoder_widths)
    if (w < 1) throw ConfigError("encoder_widths entries must be >= 1");
  for (int w : projector_widths)
    if (w < 1) throw ConfigError("projector_widths entries must be >= 1");
  if (projector_widths.front() != encoder_widths.back()) {
    throw ConfigError("projector input width must equal the encoder feature width");
  }
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and >= 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (!(lambda.value > 0.0) || !std::isfinite(lambda.value)) {
    throw ConfigError("lambda must be positive");
  }
}

Matrix TrainedModel::project(const Matrix& inputs) const {
  return projector.forward(encoder.forward(inputs));
}

TrainedModel init_model(const EncoderConfig& enc) {
  enc.validate();
  Rng rng(enc.init_seed);
  TrainedModel model;
  model.encoder = init_mlp(enc.encoder_widths, enc.activation, true, rng);
  model.projector = init_mlp(enc.projector_widths, enc.activation, false, rng);
  return model;
}

TrainedModel train(const TwoViewDataset& data, const EncoderConfig& enc, const TrainConfig& cfg) {
  cfg.validate();
  enc.validate();
  if (data.size() < 2) throw ConfigError("dataset needs at least 2 samples");
  if (cfg.batch_size > data.size()) {
    throw ConfigError("batch_size " + std::to_string(cfg.batch_size) + " exceeds dataset size " +
                      std::to_string(data.size()));
  }
  if (data.input_dim() != enc.encoder_widths.front()) {
    throw ConfigError("dataset width " + std::to_string(data.input_dim()) +
                      " does not match encoder input width " +
                      std::to_string(enc.encoder_widths.front()));
  }
  if (cfg.lambda.origin == LambdaOrigin::OneOverD &&
      cfg.lambda.value != 1.0 / static_cast<double>(enc.proj_dim())) {
    throw ConfigError("lambda marked 1/d does not match projector width");
  }

  TrainedModel model = init_model(enc);
  auto enc_grad = zeros_like(model.encoder), proj_grad = zeros_like(model.projector);
  auto enc_vel = zeros_like(model.encoder), proj_vel = zeros_like(model.projector);
  std::vector<LayerCache> enc_cache, proj_cache;

  const Eigen::Index n = data.size();
  const Eigen::Index bs = cfg.batch_size;
  const Eigen::Index batches = n / bs;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  Rng rng(cfg.seed);

  Matrix xa(bs, data.input_dim()), xb(bs, data.input_dim());
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    rng.shuffle(order);

    double loss_sum = 0.0;
    for (Eigen::Index b = 0; b < batches; ++b) {
      for (Eigen::Index r = 0; r < bs; ++r) {
        const Eigen::Index src = order[static_cast<std::size_t>(b * bs + r)];
        xa.row(r) = data.view_a.row(src);
        xb.row(r) = data.view_b.row(src);
      }
      reset(enc_grad);
      reset(proj_grad);

      // View a, then view b, through the same encoder and projector.
      const Matrix za = forward_cached(model.projector,
                                       forward_cached(model.encoder, xa, enc_cache), proj_cache);
      auto enc_cache_a = std::move(enc_cache);
      auto proj_cache_a = std::move(proj_cache);
      const Matrix zb = forward_cached(model.projector,
                                       forward_cached(model.encoder, xb, enc_cache), proj_cache);

      const LossReport report = loss_gradients(za, zb, cfg.loss, cfg.lambda, true);
      loss_sum += report.terms.total;

      backward(model.encoder, enc_cache_a,
               backward(model.projector, proj_cache_a, report.grad_x, proj_grad), enc_grad);
      backward(model.encoder, enc_cache,
               backward(model.projector, proj_cache, report.grad_y, proj_grad), enc_grad);

      momentum_step(model.encoder, enc_vel, enc_grad, cfg.learning_rate, cfg.momentum);
      momentum_step(model.projector, proj_vel, proj_grad, cfg.learning_rate, cfg.momentum);
    }
    const double epoch_loss = loss_sum / static_cast<double>(batches);
    model.loss_trajectory.push_back(epoch_loss);
    if (!std::isfinite(epoch_loss) || !model.encoder.all_finite() ||
        !model.projector.all_finite()) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch), epoch);
    }
  }
  return model;
}

Matrix extract_features(const TrainedModel& model, const Matrix& inputs) {
  if (inputs.cols() != model.encoder.input_dim()) {
    throw DimensionError("input width " + std::to_string(inputs.cols()) +
                         " does not match encoder input width " +
                         std::to_string(model.encoder.input_dim()));
  }
  return model.encoder.forward(inputs);
}

void ProbeConfig::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("probe train_fraction must be in (0, 1)");
  }
  if (epochs < 1) throw ConfigError("probe epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("probe learning_rate must be > 0");
}

ProbeSplit probe_split(Eigen::Index n, double train_fraction, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed, 0x9B0BEULL);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  ProbeSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

ProbeResult linear_probe(const Matrix& features, const std::vector<int>& labels,
                         const ProbeConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = features.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) {
    throw DimensionError("probe: " + std::to_string(n) + " feature rows but " +
                         std::to_string(labels.size()) + " labels");
  }
  if (!features.allFinite()) throw InvalidInputError("probe features contain non-finite values");
  if (n < 2) throw SplitError("probe needs at least 2 samples");
  for (int l : labels)
    if (l < 0) throw InvalidInputError("negative label");
  const int k = *std::max_element(labels.begin(), labels.end()) + 1;

  const ProbeSplit split = probe_split(n, cfg.train_fraction, cfg.seed);
  if (split.test.empty()) throw SplitError("probe test split is empty");
  std::vector<int> train_count(static_cast<std::size_t>(k), 0);
  for (auto i : split.train) ++train_count[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
  for (int c = 0; c < k; ++c) {
    if (train_count[static_cast<std::size_t>(c)] < 2) {
      throw SplitError("class " + std::to_string(c) + " has " +
                       std::to_string(train_count[static_cast<std::size_t>(c)]) +
                       " samples in the probe train split (need >= 2)");
    }
  }

  const auto m = static_cast<Eigen::Index>(split.train.size());
  const Eigen::Index f = features.cols();
  Matrix xtr(m, f);
  Matrix onehot = Matrix::Zero(m, k);
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto src = split.train[static_cast<std::size_t>(r)];
    xtr.row(r) = features.row(src);
    onehot(r, labels[static_cast<std::size_t>(src)]) = 1.0;
  }

  ProbeResult res;
  const ColumnStats stats = column_stats(xtr, 1e-12);
  res.feature_mean = stats.mean;
  res.feature_scale = stats.std;
  for (Eigen::Index j = 0; j < f; ++j)
    if (!(res.feature_scale(j) > 1e-12)) res.feature_scale(j) = 1.0;
  xtr = (xtr.rowwise() - res.feature_mean).array().rowwise() / res.feature_scale.array();

  res.weights = Matrix::Zero(f, k);
  res.bias = RowVector::Zero(k);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (int it = 0; it < cfg.epochs; ++it) {
    Matrix logits = (xtr * res.weights).rowwise() + res.bias;
    const Vector row_max = logits.rowwise().maxCoeff();
    logits.colwise() -= row_max;
    Matrix prob = logits.array().exp().matrix();
    const Vector z = prob.rowwise().sum();
    prob.array().colwise() /= z.array();
    const Matrix residual = (prob - onehot) * inv_m;
    res.weights -= cfg.learning_rate * (xtr.transpose() * residual);
    res.bias -= cfg.learning_rate * residual.colwise().sum();
  }

  std::vector<int> correct(static_cast<std::size_t>(k), 0);
  res.per_class_count.assign(static_cast<std::size_t>(k), 0);
  int total_correct = 0;
  for (auto i : split.test) {
    const RowVector x = (features.row(i) - res.feature_mean).array() / res.feature_scale.array();
    const RowVector logits = x * res.weights + res.bias;
    Eigen::Index pred;
    logits.maxCoeff(&pred);
    const auto y = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    ++res.per_class_count[y];
    if (pred == static_cast<Eigen::Index>(y)) {
      ++correct[y];
      ++total_correct;
    }
  }
  res.accuracy = static_cast<double>(total_correct) / static_cast<double>(split.test.size());
  res.per_class_accuracy.resize(static_cast<std::size_t>(k));
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    res.per_class_accuracy[c] = res.per_class_count[c] > 0
                                    ? static_cast<double>(correct[c]) / res.per_class_count[c]
                                    : std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

// ---- checkpoint ----

namespace {

void write_values(std::ostream& out, const double* v, Eigen::Index count) {
  char buf[40];
  for (Eigen::Index i = 0; i < count; ++i) {
    std::snprintf(buf, sizeof buf, "%a", v[i]);
    out << (i ? " " : "") << buf;
  }
  out << '\n';
}

void write_mlp(std::ostream& out, const std::string& name, const Mlp& mlp) {
  out << "mlp " << name << ' ' << to_string(mlp.activation) << ' ' << (mlp.activate_output ? 1 : 0)
      << ' ' << mlp.layers.size() << '\n';
  for (const auto& l : mlp.layers) {
    out << "layer " << l.w.rows() << ' ' << l.w.cols() << '\n';
    write_values(out, l.w.data(), l.w.size());
    write_values(out, l.b.data(), l.b.size());
  }
}

class CheckpointReader {
 public:
  explicit CheckpointReader(const std::filesystem::path& path) : in_(path), path_(path.string()) {
    if (!in_) throw CheckpointError("cannot open checkpoint " + path_);
  }

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) fail("unexpected end of file");
    ++line_no_;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }

  std::istringstream tokens(const std::string& expected_tag) {
    std::istringstream ss(line());
    std::string tag;
    ss >> tag;
    if (tag != expected_tag) fail("expected '" + expected_tag + "', got '" + tag + "'");
    return ss;
  }

  void values(double* dst, Eigen::Index count) {
    const std::string s = line();
    const char* p = s.c_str();
    for (Eigen::Index i = 0; i < count; ++i) {
      char* end = nullptr;
      dst[i] = std::strtod(p, &end);
      if (end == p) fail("expected " + std::to_string(count) + " values");
      p = end;
    }
    while (*p == ' ') ++p;
    if (*p != '\0') fail("trailing data after " + std::to_string(count) + " values");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw CheckpointError(path_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::ifstream in_;
  std::string path_;
  int line_no_ = 0;
};

Mlp read_mlp(CheckpointReader& r, const std::string& expected_name) {
  auto ss = r.tokens("mlp");
  std::string name, act;
  int activate_output = 0;
  std::size_t layers = 0;
  if (!(ss >> name >> act >> activate_output >> layers)) r.fail("malformed mlp header");
  if (name != expected_name) r.fail("expected mlp '" + expected_name + "', got '" + name + "'");
  Mlp mlp;
  try {
    mlp.activation = parse_activation(act);
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }
  mlp.activate_output = activate_output != 0;
  if (layers == 0 || layers > 1024) r.fail("bad layer count");
  for (std::size_t l = 0; l < layers; ++l) {
    auto ls = r.tokens("layer");
    Eigen::Index in = 0, out = 0;
    if (!(ls >> in >> out) || in < 1 || out < 1) r.fail("malformed layer shape");
    if (l > 0 && mlp.layers.back().w.cols() != in) r.fail("layer shapes do not chain");
    DenseLayer layer{Matrix(in, out), RowVector(out)};
    r.values(layer.w.data(), layer.w.size());
    r.values(layer.b.data(), layer.b.size());
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TrainedModel& model,
                     const std::map<std::string, std::string>& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint " + path.string());
  out << "hsicssl-checkpoint " << kCheckpointVersion << '\n';
  out << "meta " << meta.size() << '\n';
  for (const auto& [k, v] : meta) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw CheckpointError("checkpoint metadata key/value not representable: " + k);
    }
    out << k << '=' << v << '\n';
  }
  write_mlp(out, "encoder", model.encoder);
  write_mlp(out, "projector", model.projector);
  out << "trajectory " << model.loss_trajectory.size() << '\n';
  write_values(out, model.loss_trajectory.data(),
               static_cast<Eigen::Index>(model.loss_trajectory.size()));
  out << "end\n";
  if (!out) throw CheckpointError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  CheckpointReader r(path);
  {
    auto ss = r.tokens("hsicssl-checkpoint");
    int version = -1;
    if (!(ss >> version)) r.fail("missing version tag");
    if (version != kCheckpointVersion) {
      r.fail("unsupported checkpoint version " + std::to_string(version) + " (expected " +
             std::to_string(kCheckpointVersion) + ")");
    }
  }
  LoadedCheckpoint ck;
  {
    auto ss = r.tokens("meta");
    std::size_t count = 0;
    if (!(ss >> count)) r.fail("malformed meta count");
    for (std::size_t i = 0; i < count; ++i) {
      const std::string kv = r.line();
      const auto eq = kv.find('=');
      if (eq == std::string::npos) r.fail("meta line without '='");
      ck.meta[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
  }
  ck.model.encoder = read_mlp(r, "encoder");
  ck.model.projector = read_mlp(r, "projector");
  if (ck.model.projector.input_dim() != ck.model.encoder.output_dim()) {
    r.fail("projector input width does not match encoder output width");
  }
  {
    auto ss = r.tokens("trajectory");
    std::size_t count = 0;
    if (!(ss >> count)) r.fail("malformed trajectory count");
    ck.model.loss_trajectory.resize(count);
    r.values(ck.model.loss_trajectory.data(), static_cast<Eigen::Index>(count));
  }
  r.tokens("end");
  return ck;
}

}  // namespace hsicssl
