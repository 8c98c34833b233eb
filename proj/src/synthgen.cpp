#include "hsicssl/synthgen.h"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "hsicssl/error.h"
#include "hsicssl/rng.h"

namespace hsicssl {

namespace {

// Substream ids. Sample substreams use the sample index directly.
constexpr std::uint64_t kCenterStream = 0xC0FFEE00ULL << 32;
constexpr std::uint64_t kEmbedStream = 0xE111BEDULL << 32;
constexpr std::uint64_t kSampleStreamBase = 1ULL << 20;

void augment_inplace(Eigen::Ref<RowVector> v, const AugmentSpec& spec, Rng& rng) {
  const Eigen::Index p = v.size();
  if (spec.scale_jitter > 0.0) {
    v *= rng.uniform(1.0 - spec.scale_jitter, 1.0 + spec.scale_jitter);
  }
  if (spec.rotation_max_angle > 0.0 && p >= 2) {
    const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(p)));
    auto j = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(p - 1)));
    if (j >= i) ++j;
    const double theta = rng.uniform(-spec.rotation_max_angle, spec.rotation_max_angle);
    const double c = std::cos(theta), s = std::sin(theta);
    const double vi = v(i), vj = v(j);
    v(i) = c * vi - s * vj;
    v(j) = s * vi + c * vj;
  }
  if (spec.noise_std > 0.0) {
    for (Eigen::Index k = 0; k < p; ++k) v(k) += spec.noise_std * rng.normal();
  }
  if (spec.coord_dropout_prob > 0.0) {
    for (Eigen::Index k = 0; k < p; ++k) {
      if (rng.uniform() < spec.coord_dropout_prob) v(k) = 0.0;
    }
  }
}

}  // namespace

AugmentSpec AugmentSpec::defaults() { return {0.8, 0.5, 0.1, 0.1}; }

void AugmentSpec::validate() const {
  if (!(noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  if (!(rotation_max_angle >= 0.0)) throw ConfigError("rotation_max_angle must be >= 0");
  if (!(coord_dropout_prob >= 0.0 && coord_dropout_prob < 1.0)) {
    throw ConfigError("coord_dropout_prob must be in [0, 1)");
  }
  if (!(scale_jitter >= 0.0)) throw ConfigError("scale_jitter must be >= 0");
}

void GeneratorConfig::validate() const {
  if (classes < 2) throw ConfigError("classes must be >= 2");
  if (samples < 2 * classes) throw ConfigError("samples must be >= 2 * classes");
  if (latent_dim < 1) throw ConfigError("latent_dim must be >= 1");
  if (input_dim < latent_dim) throw ConfigError("input_dim must be >= latent_dim");
  if (!(class_separation >= 0.0)) throw ConfigError("class_separation must be >= 0");
  if (!(within_class_std >= 0.0)) throw ConfigError("within_class_std must be >= 0");
  augment.validate();
}

int TwoViewDataset::num_classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

TwoViewDataset TwoViewDataset::subset(const std::vector<Eigen::Index>& indices) const {
  TwoViewDataset out;
  out.gen_config = gen_config;
  const auto m = static_cast<Eigen::Index>(indices.size());
  out.view_a.resize(m, view_a.cols());
  out.view_b.resize(m, view_b.cols());
  if (labels) out.labels.emplace();
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index src = indices[static_cast<std::size_t>(r)];
    if (src < 0 || src >= size()) throw InvalidInputError("subset index out of range");
    out.view_a.row(r) = view_a.row(src);
    out.view_b.row(r) = view_b.row(src);
    if (labels) out.labels->push_back((*labels)[static_cast<std::size_t>(src)]);
  }
  return out;
}

TwoViewDataset generate(const GeneratorConfig& cfg) {
  cfg.validate();
  const int k = cfg.classes, q = cfg.latent_dim, p = cfg.input_dim;

  Matrix centers(k, q);
  {
    Rng rng(cfg.seed, kCenterStream);
    for (int c = 0; c < k; ++c)
      for (int j = 0; j < q; ++j) centers(c, j) = cfg.class_separation * rng.normal();
  }
  // Embedding q -> p, entries N(0, 1/q) so embedded norms stay O(latent norm).
  Matrix embed(q, p);
  {
    Rng rng(cfg.seed, kEmbedStream);
    const double scale = 1.0 / std::sqrt(static_cast<double>(q));
    for (int i = 0; i < q; ++i)
      for (int j = 0; j < p; ++j) embed(i, j) = scale * rng.normal();
  }

  TwoViewDataset out;
  out.gen_config = cfg;
  out.view_a.resize(cfg.samples, p);
  out.view_b.resize(cfg.samples, p);
  out.labels.emplace(static_cast<std::size_t>(cfg.samples));

  RowVector z(q);
  for (int i = 0; i < cfg.samples; ++i) {
    Rng rng(cfg.seed, kSampleStreamBase + static_cast<std::uint64_t>(i));
    const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    (*out.labels)[static_cast<std::size_t>(i)] = c;
    for (int j = 0; j < q; ++j) z(j) = centers(c, j) + cfg.within_class_std * rng.normal();
    const RowVector clean = z * embed;
    out.view_a.row(i) = clean;
    out.view_b.row(i) = clean;
    augment_inplace(out.view_a.row(i), cfg.augment, rng);
    augment_inplace(out.view_b.row(i), cfg.augment, rng);
  }
  return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& field, long row, const std::string& file) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\t')) ++end;
  if (end == begin || *end != '\0') {
    throw IngestError(file + ": row " + std::to_string(row) + ": cannot parse '" + field + "'",
                      row);
  }
  if (!std::isfinite(v)) {
    throw IngestError(file + ": row " + std::to_string(row) + ": non-finite value '" + field + "'",
                      row);
  }
  return v;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  const std::string file = path.string();
  std::string line;
  if (!std::getline(in, line)) throw IngestError(file + ": missing header row");
  const std::size_t cols = split_fields(strip_cr(line)).size();
  if (cols == 0) throw IngestError(file + ": empty header row");

  std::vector<double> values;
  long row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != cols) {
      throw IngestError(file + ": row " + std::to_string(row) + ": expected " +
                            std::to_string(cols) + " fields, got " + std::to_string(fields.size()),
                        row);
    }
    for (const auto& f : fields) values.push_back(parse_double(f, row, file));
    ++row;
  }
  Matrix m(row, static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << 'x' << j;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt_double(m(i, j));
    out << '\n';
  }
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  std::vector<int> labels;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(line.c_str(), &end, 10);
    if (end == line.c_str() || *end != '\0' || v < 0 || v > 1'000'000) {
      throw IngestError(path.string() + ": row " + std::to_string(row) + ": invalid label '" +
                            line + "'",
                        row);
    }
    labels.push_back(static_cast<int>(v));
    ++row;
  }
  return labels;
}

void write_labels(const std::filesystem::path& path, const std::vector<int>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestError("cannot write " + path.string());
  for (int l : labels) out << l << '\n';
}

TwoViewDataset load_paired_csv(const std::filesystem::path& path_a,
                               const std::filesystem::path& path_b,
                               const std::optional<std::filesystem::path>& path_labels) {
  TwoViewDataset out;
  out.view_a = read_matrix_csv(path_a);
  out.view_b = read_matrix_csv(path_b);
  if (out.view_a.rows() != out.view_b.rows()) {
    throw IngestError("row-count mismatch: " + path_a.string() + " has " +
                      std::to_string(out.view_a.rows()) + " rows, " + path_b.string() + " has " +
                      std::to_string(out.view_b.rows()) + " rows");
  }
  if (out.view_a.cols() != out.view_b.cols()) {
    throw IngestError("column-count mismatch: " + std::to_string(out.view_a.cols()) + " vs " +
                      std::to_string(out.view_b.cols()));
  }
  if (path_labels) {
    auto labels = read_labels(*path_labels);
    if (static_cast<Eigen::Index>(labels.size()) != out.view_a.rows()) {
      throw IngestError("row-count mismatch: views have " + std::to_string(out.view_a.rows()) +
                        " rows, labels have " + std::to_string(labels.size()));
    }
    out.labels = std::move(labels);
  }
  return out;
}

void save_paired_csv(const TwoViewDataset& data, const std::filesystem::path& path_a,
                     const std::filesystem::path& path_b,
                     const std::optional<std::filesystem::path>& path_labels) {
  write_matrix_csv(path_a, data.view_a);
  write_matrix_csv(path_b, data.view_b);
  if (path_labels) {
    if (!data.labels) throw InvalidInputError("dataset has no labels to export");
    write_labels(*path_labels, *data.labels);
  }
}

}  // namespace hsicssl
