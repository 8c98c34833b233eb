#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "hsicssl/error.h"
#include "hsicssl/experiment.h"
#include "hsicssl/verify.h"

using namespace hsicssl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.gen.samples = 320;
  c.encoder_widths = {16, 8};
  c.projector_hidden = {16};
  c.proj_dim = 4;
  c.batch_size = 32;
  c.epochs = 2;
  c.probe.epochs = 50;
  return c;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hsicssl_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("config entries round trip") {
  ExperimentConfig c = tiny_config();
  c.loss = LossKind::HsicSsl;
  c.lambda = 0.03125;
  c.learning_rate = 0.1 + 0.2;
  c.activation = Activation::Tanh;
  const ExperimentConfig r = parse_config_entries(c.to_entries());
  CHECK(r.to_entries() == c.to_entries());
  CHECK(r.run_id() == c.run_id());
  CHECK(r.learning_rate == c.learning_rate);

  ExperimentConfig other = c;
  other.train_seed += 1;
  CHECK(other.run_id() != c.run_id());
}

TEST_CASE("config parsing errors name the key") {
  ExperimentConfig c;
  try {
    apply_config_entry(c, "bogus_key", "1");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_config_entry(c, "epochs", "ten"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "loss", "simclr"), ConfigError);
  CHECK_THROWS_AS(apply_config_entry(c, "lambda", "-1"), ConfigError);

  const fs::path dir = temp_dir("cfg");
  std::ofstream(dir / "c.cfg") << "# comment\nloss = hsic_ssl\nproj_dim=32\n\nlambda=auto\n";
  const ExperimentConfig f = load_config(dir / "c.cfg");
  CHECK(f.loss == LossKind::HsicSsl);
  CHECK(f.resolved_lambda().value == 1.0 / 32.0);
  std::ofstream(dir / "bad.cfg") << "loss\n";
  CHECK_THROWS_AS(load_config(dir / "bad.cfg"), ConfigError);

  ExperimentConfig big = tiny_config();
  big.batch_size = 300;  // train split holds 256 rows
  CHECK_THROWS_AS(big.validate(), ConfigError);
}

TEST_CASE("results rows round trip through CSV") {
  ExperimentRecord rec;
  rec.config = tiny_config();
  rec.run_id = rec.config.run_id();
  rec.accuracy = 0.1 + 0.7;
  rec.loss_trajectory = {3.5, 1.0 / 3.0, 1e-17};
  rec.wall_seconds = 1.25;
  rec.status = RunStatus::Failed;
  rec.message = "quote \" and, comma";
  const auto header = results_header();
  const std::vector<std::string> fields = csv_split(csv_join(record_to_row(rec)));
  const ExperimentRecord back = row_to_record(header, fields);
  CHECK(back.run_id == rec.run_id);
  CHECK(back.accuracy == rec.accuracy);
  CHECK(back.loss_trajectory == rec.loss_trajectory);
  CHECK(back.message == rec.message);
  CHECK(back.status == RunStatus::Failed);
  CHECK(back.config.to_entries() == rec.config.to_entries());
}

TEST_CASE("a recorded run reproduces bit for bit") {
  const fs::path dir = temp_dir("repro");
  const RunOutput first = run_experiment(tiny_config());
  REQUIRE(first.record.status == RunStatus::Ok);
  append_results(dir / "results.csv", {first.record});
  const auto loaded = load_results(dir / "results.csv");
  REQUIRE(loaded.size() == 1);
  const RunOutput again = run_experiment(loaded[0].config);
  CHECK(again.record.accuracy == first.record.accuracy);
  CHECK(again.record.loss_trajectory == first.record.loss_trajectory);
  CHECK(again.record.run_id == first.record.run_id);

  // Evaluating the returned model on the described data gives the recorded accuracy.
  const ProbeResult p = evaluate_model(*first.model, first.record.config);
  CHECK(p.accuracy == first.record.accuracy);
}

TEST_CASE("zero learning rate matches the untrained encoder") {
  ExperimentConfig c = tiny_config();
  c.learning_rate = 0.0;
  const RunOutput out = run_experiment(c);
  const TrainedModel untrained = init_model(c.encoder_config());
  CHECK(evaluate_model(untrained, c).accuracy == out.record.accuracy);
}

TEST_CASE("probing unlabeled data fails clearly") {
  ExperimentConfig c = tiny_config();
  TwoViewDataset data = generate(c.gen);
  data.labels.reset();
  const TrainedModel m = init_model(c.encoder_config());
  try {
    evaluate_model(m, data, c.probe);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("labels required for probe") != std::string::npos);
  }
}

TEST_CASE("divergence is recorded, not thrown") {
  ExperimentConfig c = tiny_config();
  c.learning_rate = 1e200;
  const RunOutput out = run_experiment(c);
  CHECK(out.record.status == RunStatus::Diverged);
  CHECK_FALSE(out.record.message.empty());
}

TEST_CASE("sweep writes one row per run in plan order") {
  const fs::path dir = temp_dir("sweep");
  SweepPlan plan;
  plan.base = tiny_config();
  plan.base.epochs = 1;
  plan.axis = SweepAxis::ProjectorDim;
  plan.values = {4, 8, 16};
  const auto runs = plan.expand();
  REQUIRE(runs.size() == 18);
  CHECK(runs[0].loss == LossKind::BarlowTwins);
  CHECK(runs[3].loss == LossKind::HsicSsl);
  CHECK(runs[1].init_seed == runs[0].init_seed + 1);
  CHECK(axis_value(runs[17], SweepAxis::ProjectorDim) == 16);
  CHECK(runs[6].resolved_lambda().value == 1.0 / 8.0);

  const auto recs = run_sweep(runs, 4, dir / "sweep.csv");
  const auto loaded = load_results(dir / "sweep.csv");
  REQUIRE(loaded.size() == 18);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    CHECK(loaded[i].run_id == runs[i].run_id());
    CHECK(loaded[i].accuracy == recs[i].accuracy);
  }

  const std::string svg = render_sweep_svg(loaded, plan.axis);
  CHECK(svg == render_sweep_svg(recs, plan.axis));
  CHECK(svg.rfind("<svg", 0) == 0);

  // Thread count does not change results.
  const auto serial = run_sweep(std::vector<ExperimentConfig>(runs.begin(), runs.begin() + 4), 1,
                                std::nullopt);
  for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial[i].accuracy == recs[i].accuracy);
}

TEST_CASE("appending to a results file with a different header fails") {
  const fs::path dir = temp_dir("header");
  std::ofstream(dir / "r.csv") << "a,b,c\n";
  ExperimentRecord rec;
  rec.run_id = rec.config.run_id();
  CHECK_THROWS_AS(append_results(dir / "r.csv", {rec}), Error);
}

TEST_CASE("verify suite passes and the perturbation hook is caught") {
  const VerifyReport ok = run_verification();
  CHECK(ok.all_passed());
  CHECK(ok.family_count() >= 6);

  VerifyOptions bad;
  bad.perturb_hsic_fast = 1e-3;
  const VerifyReport broken = run_verification(bad);
  CHECK_FALSE(broken.all_passed());
  bool identity_failed = false;
  for (const CheckResult& c : broken.checks) {
    if (c.family == "hsic_linear_identity" && !c.passed) identity_failed = true;
  }
  CHECK(identity_failed);
}
