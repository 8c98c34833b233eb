#include "hsicssl/experiment.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "hsicssl/error.h"

namespace hsicssl {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + value + "'");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return out;
}

int parse_int32(const std::string& key, const std::string& value) {
  const long long v = parse_int(key, value);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(key + ": value out of range");
  }
  return static_cast<int>(v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an unsigned 64-bit integer, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_int32(key, item));
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ";" : "") + format_double(v[i]);
  return out;
}

}  // namespace

// ---- config ----

ExperimentConfig::ExperimentConfig() {
  gen.classes = 4;
  gen.samples = 2560;
  gen.latent_dim = 4;
  gen.input_dim = 16;
  gen.seed = 1;
}

EncoderConfig ExperimentConfig::encoder_config() const {
  EncoderConfig e;
  e.encoder_widths.push_back(gen.input_dim);
  e.encoder_widths.insert(e.encoder_widths.end(), encoder_widths.begin(), encoder_widths.end());
  if (!encoder_widths.empty()) e.projector_widths.push_back(encoder_widths.back());
  e.projector_widths.insert(e.projector_widths.end(), projector_hidden.begin(),
                            projector_hidden.end());
  e.projector_widths.push_back(proj_dim);
  e.activation = activation;
  e.init_seed = init_seed;
  return e;
}

Lambda ExperimentConfig::resolved_lambda() const {
  return lambda ? Lambda::explicit_value(*lambda) : default_lambda(proj_dim);
}

TrainConfig ExperimentConfig::train_config() const {
  TrainConfig t;
  t.loss = loss;
  t.lambda = resolved_lambda();
  t.batch_size = batch_size;
  t.epochs = epochs;
  t.learning_rate = learning_rate;
  t.momentum = momentum;
  t.seed = train_seed;
  return t;
}

void ExperimentConfig::validate() const {
  gen.validate();
  if (encoder_widths.empty()) throw ConfigError("encoder_widths: need at least the feature width");
  if (proj_dim < 1) throw ConfigError("proj_dim: must be >= 1");
  if (lambda && !(*lambda > 0.0)) throw ConfigError("lambda: must be positive");
  encoder_config().validate();
  train_config().validate();
  probe.validate();
  const auto n_train =
      std::llround(probe.train_fraction * static_cast<double>(gen.samples));
  if (batch_size > n_train) {
    throw ConfigError("batch_size: " + std::to_string(batch_size) +
                      " exceeds the training split size " + std::to_string(n_train));
  }
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::to_entries() const {
  return {
      {"classes", std::to_string(gen.classes)},
      {"samples", std::to_string(gen.samples)},
      {"latent_dim", std::to_string(gen.latent_dim)},
      {"input_dim", std::to_string(gen.input_dim)},
      {"class_separation", format_double(gen.class_separation)},
      {"within_class_std", format_double(gen.within_class_std)},
      {"noise_std", format_double(gen.augment.noise_std)},
      {"rotation_max_angle", format_double(gen.augment.rotation_max_angle)},
      {"coord_dropout_prob", format_double(gen.augment.coord_dropout_prob)},
      {"scale_jitter", format_double(gen.augment.scale_jitter)},
      {"data_seed", std::to_string(gen.seed)},
      {"encoder_widths", join_ints(encoder_widths)},
      {"projector_widths", join_ints(projector_hidden)},
      {"proj_dim", std::to_string(proj_dim)},
      {"activation", std::string(to_string(activation))},
      {"init_seed", std::to_string(init_seed)},
      {"loss", std::string(to_string(loss))},
      {"lambda", lambda ? format_double(*lambda) : "auto"},
      {"batch_size", std::to_string(batch_size)},
      {"epochs", std::to_string(epochs)},
      {"learning_rate", format_double(learning_rate)},
      {"momentum", format_double(momentum)},
      {"train_seed", std::to_string(train_seed)},
      {"probe_train_fraction", format_double(probe.train_fraction)},
      {"probe_epochs", std::to_string(probe.epochs)},
      {"probe_learning_rate", format_double(probe.learning_rate)},
      {"probe_seed", std::to_string(probe.seed)},
  };
}

std::string ExperimentConfig::run_id() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : to_entries()) {
    for (char c : k + "=" + v + "\n") {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(to_string(loss)) + "-d" + std::to_string(proj_dim) + "-" +
         std::string(buf).substr(0, 10);
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& raw_key,
                        const std::string& value) {
  const std::string key = trim(raw_key);
  try {
    if (key == "classes") cfg.gen.classes = parse_int32(key, value);
    else if (key == "samples") cfg.gen.samples = parse_int32(key, value);
    else if (key == "latent_dim") cfg.gen.latent_dim = parse_int32(key, value);
    else if (key == "input_dim") cfg.gen.input_dim = parse_int32(key, value);
    else if (key == "class_separation") cfg.gen.class_separation = parse_double(key, value);
    else if (key == "within_class_std") cfg.gen.within_class_std = parse_double(key, value);
    else if (key == "noise_std") cfg.gen.augment.noise_std = parse_double(key, value);
    else if (key == "rotation_max_angle") cfg.gen.augment.rotation_max_angle = parse_double(key, value);
    else if (key == "coord_dropout_prob") cfg.gen.augment.coord_dropout_prob = parse_double(key, value);
    else if (key == "scale_jitter") cfg.gen.augment.scale_jitter = parse_double(key, value);
    else if (key == "data_seed") cfg.gen.seed = parse_u64(key, value);
    else if (key == "encoder_widths") cfg.encoder_widths = parse_int_list(key, value);
    else if (key == "projector_widths") cfg.projector_hidden = parse_int_list(key, value);
    else if (key == "proj_dim") cfg.proj_dim = parse_int32(key, value);
    else if (key == "activation") cfg.activation = parse_activation(trim(value));
    else if (key == "init_seed") cfg.init_seed = parse_u64(key, value);
    else if (key == "loss") cfg.loss = parse_loss_kind(trim(value));
    else if (key == "lambda") {
      const std::string v = trim(value);
      if (v == "auto" || v == "1/d") {
        cfg.lambda.reset();
      } else {
        const double lam = parse_double(key, v);
        if (!(lam > 0.0)) throw ConfigError("lambda: must be positive");
        cfg.lambda = lam;
      }
    }
    else if (key == "batch_size") cfg.batch_size = parse_int32(key, value);
    else if (key == "epochs") cfg.epochs = parse_int32(key, value);
    else if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
    else if (key == "momentum") cfg.momentum = parse_double(key, value);
    else if (key == "train_seed") cfg.train_seed = parse_u64(key, value);
    else if (key == "probe_train_fraction") cfg.probe.train_fraction = parse_double(key, value);
    else if (key == "probe_epochs") cfg.probe.epochs = parse_int32(key, value);
    else if (key == "probe_learning_rate") cfg.probe.learning_rate = parse_double(key, value);
    else if (key == "probe_seed") cfg.probe.seed = parse_u64(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

ExperimentConfig parse_config_entries(const std::vector<std::pair<std::string, std::string>>& kv) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : kv) apply_config_entry(cfg, k, v);
  return cfg;
}

std::vector<std::pair<std::string, std::string>> read_kv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  ExperimentConfig cfg = parse_config_entries(read_kv_file(path));
  cfg.validate();
  return cfg;
}

// ---- running ----

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok:
      return "ok";
    case RunStatus::Diverged:
      return "diverged";
    case RunStatus::Failed:
      return "failed";
  }
  return "failed";
}

ProbeResult evaluate_model(const TrainedModel& model, const TwoViewDataset& data,
                           const ProbeConfig& probe) {
  if (!data.labels) throw InvalidInputError("labels required for probe");
  return linear_probe(extract_features(model, data.view_a), *data.labels, probe);
}

ProbeResult evaluate_model(const TrainedModel& model, const ExperimentConfig& cfg) {
  return evaluate_model(model, generate(cfg.gen), cfg.probe);
}

RunOutput run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  out.record.config = cfg;
  out.record.run_id = cfg.run_id();
  out.record.accuracy = std::numeric_limits<double>::quiet_NaN();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  cfg.validate();
  const TwoViewDataset data = generate(cfg.gen);
  const ProbeSplit split = probe_split(data.size(), cfg.probe.train_fraction, cfg.probe.seed);
  const TwoViewDataset train_rows = data.subset(split.train);
  try {
    out.model = train(train_rows, cfg.encoder_config(), cfg.train_config());
  } catch (const DivergenceError& e) {
    out.record.status = RunStatus::Diverged;
    out.record.message = e.what();
    out.record.wall_seconds = elapsed();
    return out;
  }
  out.record.loss_trajectory = out.model->loss_trajectory;
  out.record.accuracy = evaluate_model(*out.model, data, cfg.probe).accuracy;
  out.record.wall_seconds = elapsed();
  return out;
}

// ---- CSV ----

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    const auto& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out += f;
    } else {
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
  }
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> results_header() {
  std::vector<std::string> h{"run_id", "status", "accuracy", "final_loss", "wall_seconds"};
  for (const auto& [k, v] : ExperimentConfig{}.to_entries()) h.push_back(k);
  h.push_back("loss_trajectory");
  h.push_back("message");
  return h;
}

std::vector<std::string> record_to_row(const ExperimentRecord& rec) {
  std::vector<std::string> row{
      rec.run_id, std::string(to_string(rec.status)), format_double(rec.accuracy),
      rec.loss_trajectory.empty() ? "nan" : format_double(rec.loss_trajectory.back()),
      format_double(std::round(rec.wall_seconds * 1e3) / 1e3)};
  for (const auto& [k, v] : rec.config.to_entries()) row.push_back(v);
  row.push_back(join_doubles(rec.loss_trajectory));
  row.push_back(rec.message);
  return row;
}

ExperimentRecord row_to_record(const std::vector<std::string>& header,
                               const std::vector<std::string>& row) {
  if (row.size() != header.size()) {
    throw IngestError("results row has " + std::to_string(row.size()) + " fields, header has " +
                      std::to_string(header.size()));
  }
  ExperimentRecord rec;
  std::vector<std::pair<std::string, std::string>> cfg_kv;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto& key = header[i];
    const auto& v = row[i];
    if (key == "run_id") {
      rec.run_id = v;
    } else if (key == "status") {
      rec.status = v == "ok" ? RunStatus::Ok : v == "diverged" ? RunStatus::Diverged : RunStatus::Failed;
    } else if (key == "accuracy") {
      rec.accuracy = v == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(key, v);
    } else if (key == "final_loss") {
      // derived from the trajectory
    } else if (key == "wall_seconds") {
      rec.wall_seconds = parse_double(key, v);
    } else if (key == "loss_trajectory") {
      std::string item;
      std::istringstream ss(v);
      while (std::getline(ss, item, ';')) rec.loss_trajectory.push_back(parse_double(key, item));
    } else if (key == "message") {
      rec.message = v;
    } else {
      cfg_kv.emplace_back(key, v);
    }
  }
  rec.config = parse_config_entries(cfg_kv);
  return rec;
}

void append_results(const std::filesystem::path& path, const std::vector<ExperimentRecord>& recs) {
  const auto header = results_header();
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  if (!fresh) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    if (csv_split(first) != header) {
      throw IngestError(path.string() + ": existing results file has a different header");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IngestError("cannot write " + path.string());
  if (fresh) out << csv_join(header) << '\n';
  for (const auto& r : recs) out << csv_join(record_to_row(r)) << '\n';
}

std::vector<ExperimentRecord> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IngestError(path.string() + ": empty results file");
  const auto header = csv_split(line);
  std::vector<ExperimentRecord> out;
  long row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(row_to_record(header, csv_split(line)));
    } catch (const Error& e) {
      throw IngestError(path.string() + ": row " + std::to_string(row) + ": " + e.what(), row);
    }
    ++row;
  }
  return out;
}

// ---- sweeps ----

std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::ProjectorDim:
      return "proj_dim";
    case SweepAxis::BatchSize:
      return "batch_size";
    case SweepAxis::Epochs:
      return "epochs";
  }
  return "proj_dim";
}

SweepAxis parse_sweep_axis(std::string_view text) {
  const std::string t = trim(text);
  if (t == "proj_dim" || t == "projector_dim" || t == "d") return SweepAxis::ProjectorDim;
  if (t == "batch_size") return SweepAxis::BatchSize;
  if (t == "epochs") return SweepAxis::Epochs;
  throw ConfigError("axis: unknown sweep axis '" + t + "' (expected proj_dim, batch_size or epochs)");
}

int axis_value(const ExperimentConfig& cfg, SweepAxis axis) {
  switch (axis) {
    case SweepAxis::ProjectorDim:
      return cfg.proj_dim;
    case SweepAxis::BatchSize:
      return cfg.batch_size;
    case SweepAxis::Epochs:
      return cfg.epochs;
  }
  return 0;
}

void SweepPlan::validate() const {
  if (values.empty()) throw ConfigError("values: sweep needs at least one value");
  if (repeats < 1) throw ConfigError("repeats: must be >= 1");
  for (const auto& c : expand()) c.validate();
}

std::vector<ExperimentConfig> SweepPlan::expand() const {
  std::vector<LossKind> losses{base.loss};
  if (both_losses) losses = {LossKind::BarlowTwins, LossKind::HsicSsl};
  std::vector<ExperimentConfig> out;
  for (int v : values) {
    for (LossKind l : losses) {
      for (int r = 0; r < repeats; ++r) {
        ExperimentConfig c = base;
        c.loss = l;
        switch (axis) {
          case SweepAxis::ProjectorDim:
            c.proj_dim = v;
            break;
          case SweepAxis::BatchSize:
            c.batch_size = v;
            break;
          case SweepAxis::Epochs:
            c.epochs = v;
            break;
        }
        c.init_seed = base.init_seed + static_cast<std::uint64_t>(r);
        c.train_seed = base.train_seed + static_cast<std::uint64_t>(r);
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

SweepPlan load_plan(const std::filesystem::path& path) {
  SweepPlan plan;
  bool have_axis = false, have_values = false;
  for (const auto& [k, v] : read_kv_file(path)) {
    if (k == "axis") {
      plan.axis = parse_sweep_axis(v);
      have_axis = true;
    } else if (k == "values") {
      plan.values = parse_int_list(k, v);
      have_values = true;
    } else if (k == "repeats") {
      plan.repeats = parse_int32(k, v);
    } else if (k == "both_losses") {
      plan.both_losses = parse_bool(k, v);
    } else {
      apply_config_entry(plan.base, k, v);
    }
  }
  if (!have_axis) throw ConfigError("axis: missing from plan " + path.string());
  if (!have_values) throw ConfigError("values: missing from plan " + path.string());
  plan.validate();
  return plan;
}

std::vector<ExperimentRecord> run_sweep(const std::vector<ExperimentConfig>& runs, int jobs,
                                        const std::optional<std::filesystem::path>& results_path) {
  const std::size_t total = runs.size();
  std::vector<ExperimentRecord> records(total);
  std::vector<char> done(total, 0);
  std::size_t next_to_write = 0;
  std::atomic<std::size_t> next_run{0};
  std::mutex mu;
  std::exception_ptr writer_error;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next_run.fetch_add(1);
      if (i >= total) return;
      ExperimentRecord rec;
      try {
        rec = run_experiment(runs[i]).record;
      } catch (const std::exception& e) {
        rec.config = runs[i];
        rec.run_id = runs[i].run_id();
        rec.status = RunStatus::Failed;
        rec.message = e.what();
        rec.accuracy = std::numeric_limits<double>::quiet_NaN();
      }
      std::lock_guard lock(mu);
      records[i] = std::move(rec);
      done[i] = 1;
      std::vector<ExperimentRecord> ready;
      while (next_to_write < total && done[next_to_write]) ready.push_back(records[next_to_write++]);
      if (results_path && !ready.empty() && !writer_error) {
        try {
          append_results(*results_path, ready);
        } catch (...) {
          writer_error = std::current_exception();
        }
      }
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (writer_error) std::rethrow_exception(writer_error);
  return records;
}

// ---- SVG ----

namespace {

struct SeriesPoint {
  int x = 0;
  double mean = 0.0, lo = 0.0, hi = 0.0;
  int count = 0;
};

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_sweep_svg(const std::vector<ExperimentRecord>& recs, SweepAxis axis) {
  std::map<LossKind, std::map<int, std::vector<double>>> series;
  std::vector<int> xs;
  for (const auto& r : recs) {
    if (r.status != RunStatus::Ok || !std::isfinite(r.accuracy)) continue;
    const int x = axis_value(r.config, axis);
    series[r.config.loss][x].push_back(r.accuracy);
    xs.push_back(x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

  double ymin = 1.0, ymax = 0.0;
  std::map<LossKind, std::vector<SeriesPoint>> points;
  for (const auto& [loss, by_x] : series) {
    for (const auto& [x, accs] : by_x) {
      SeriesPoint p;
      p.x = x;
      p.count = static_cast<int>(accs.size());
      double s = 0.0;
      for (double a : accs) s += a;
      p.mean = s / p.count;
      p.lo = *std::min_element(accs.begin(), accs.end());
      p.hi = *std::max_element(accs.begin(), accs.end());
      ymin = std::min(ymin, p.lo);
      ymax = std::max(ymax, p.hi);
      points[loss].push_back(p);
    }
  }
  if (ymin > ymax) {
    ymin = 0.0;
    ymax = 1.0;
  }
  ymin = std::max(0.0, std::floor(ymin * 20.0 - 1e-9) / 20.0);
  ymax = std::min(1.0, std::ceil(ymax * 20.0 + 1e-9) / 20.0);
  if (ymax - ymin < 0.1) {
    ymin = std::max(0.0, ymax - 0.1);
    ymax = ymin + 0.1;
  }

  const double width = 640, height = 420, left = 70, right = 170, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](std::size_t i) {
    return xs.size() <= 1 ? left + pw / 2 : left + pw * (0.08 + 0.84 * static_cast<double>(i) /
                                                                     static_cast<double>(xs.size() - 1));
  };
  auto py = [&](double y) { return top + ph * (1.0 - (y - ymin) / (ymax - ymin)); };
  auto index_of = [&](int x) {
    return static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << f2(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << "Linear probe accuracy vs " << to_string(axis) << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\""
      << top + ph << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double y = ymin + (ymax - ymin) * t / 5.0;
    svg << "<line x1=\"" << left - 4 << "\" y1=\"" << f2(py(y)) << "\" x2=\"" << left + pw
        << "\" y2=\"" << f2(py(y)) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << f2(py(y) + 4)
        << "\" text-anchor=\"end\">" << f2(y) << "</text>\n";
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    svg << "<text x=\"" << f2(px(i)) << "\" y=\"" << top + ph + 18
        << "\" text-anchor=\"middle\">" << xs[i] << "</text>\n";
  }
  svg << "<text x=\"" << f2(left + pw / 2) << "\" y=\"" << height - 15
      << "\" text-anchor=\"middle\">" << to_string(axis) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << f2(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << f2(top + ph / 2) << ")\">accuracy</text>\n";

  const std::map<LossKind, std::string> colors{{LossKind::BarlowTwins, "#1f77b4"},
                                               {LossKind::HsicSsl, "#d62728"}};
  int legend_row = 0;
  for (const auto& [loss, pts] : points) {
    const std::string& color = colors.at(loss);
    const double offset = loss == LossKind::BarlowTwins ? -4.0 : 4.0;
    svg << "<g stroke=\"" << color << "\" fill=\"" << color << "\">\n";
    svg << "<polyline fill=\"none\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      svg << (i ? " " : "") << f2(px(index_of(pts[i].x)) + offset) << ',' << f2(py(pts[i].mean));
    }
    svg << "\"/>\n";
    for (const auto& p : pts) {
      const double x = px(index_of(p.x)) + offset;
      svg << "<line x1=\"" << f2(x) << "\" y1=\"" << f2(py(p.lo)) << "\" x2=\"" << f2(x)
          << "\" y2=\"" << f2(py(p.hi)) << "\"/>\n";
      svg << "<line x1=\"" << f2(x - 4) << "\" y1=\"" << f2(py(p.lo)) << "\" x2=\"" << f2(x + 4)
          << "\" y2=\"" << f2(py(p.lo)) << "\"/>\n";
      svg << "<line x1=\"" << f2(x - 4) << "\" y1=\"" << f2(py(p.hi)) << "\" x2=\"" << f2(x + 4)
          << "\" y2=\"" << f2(py(p.hi)) << "\"/>\n";
      svg << "<circle cx=\"" << f2(x) << "\" cy=\"" << f2(py(p.mean)) << "\" r=\"3.5\"/>\n";
    }
    svg << "</g>\n";
    const double ly = top + 10 + 20.0 * legend_row++;
    svg << "<line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">" << to_string(loss)
        << "</text>\n";
  }
  svg << "<text x=\"" << left + pw + 15 << "\" y=\"" << top + 10 + 20.0 * legend_row + 6
      << "\" font-size=\"10\" fill=\"#555555\">mean, bar = min..max</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace hsicssl
