// Command-line front end: train / sweep / verify / eval.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure,
// 3 verification failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "hsicssl/error.h"
#include "hsicssl/experiment.h"
#include "hsicssl/verify.h"

namespace fs = std::filesystem;
using namespace hsicssl;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitVerification = 3;

fs::path output_root(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("HSICSSL_OUT_DIR"); env && *env) return env;
  return "hsicssl_out";
}

void apply_seed(ExperimentConfig& cfg, const std::optional<std::uint64_t>& seed) {
  if (!seed) return;
  cfg.init_seed = *seed;
  cfg.train_seed = *seed;
}

std::map<std::string, std::string> checkpoint_meta(const ExperimentRecord& rec) {
  std::map<std::string, std::string> meta;
  for (const auto& [k, v] : rec.config.to_entries()) meta["config." + k] = v;
  meta["run_id"] = rec.run_id;
  meta["accuracy"] = format_double(rec.accuracy);
  return meta;
}

ExperimentConfig config_from_meta(const std::map<std::string, std::string>& meta) {
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto& [k, v] : meta) {
    if (k.rfind("config.", 0) == 0) kv.emplace_back(k.substr(7), v);
  }
  if (kv.empty()) throw CheckpointError("checkpoint carries no run configuration");
  return parse_config_entries(kv);
}

int cmd_train(const std::string& config_path, const fs::path& out,
              const std::optional<std::uint64_t>& seed) {
  ExperimentConfig cfg = parse_config_entries(read_kv_file(config_path));
  apply_seed(cfg, seed);
  cfg.validate();
  fs::create_directories(out);

  RunOutput run = run_experiment(cfg);
  const fs::path results = out / "results.csv";
  append_results(results, {run.record});
  if (run.record.status != RunStatus::Ok) {
    std::cerr << "error: run " << run.record.run_id << " " << to_string(run.record.status) << ": "
              << run.record.message << "\n";
    return kExitRuntime;
  }
  const fs::path ckpt = out / (run.record.run_id + ".ckpt");
  save_checkpoint(ckpt, *run.model, checkpoint_meta(run.record));
  std::printf("run %s  loss %s  lambda %.6g  accuracy %.4f  final loss %.6g  (%.1f s)\n",
              run.record.run_id.c_str(), std::string(to_string(cfg.loss)).c_str(),
              cfg.resolved_lambda().value, run.record.accuracy, run.record.loss_trajectory.back(),
              run.record.wall_seconds);
  std::printf("results: %s\ncheckpoint: %s\n", results.string().c_str(), ckpt.string().c_str());
  return 0;
}

int cmd_sweep(const std::string& plan_path, const fs::path& out, bool plot, int jobs,
              const std::optional<std::uint64_t>& seed) {
  SweepPlan plan = load_plan(plan_path);
  apply_seed(plan.base, seed);
  plan.validate();
  fs::create_directories(out);

  const std::string stem = "sweep_" + std::string(to_string(plan.axis));
  const fs::path results = out / (stem + ".csv");
  fs::remove(results);
  const auto runs = plan.expand();
  std::printf("sweep over %s: %zu runs on %d worker(s)\n",
              std::string(to_string(plan.axis)).c_str(), runs.size(), jobs);
  const auto records = run_sweep(runs, jobs, results);

  std::size_t ok = 0;
  for (const auto& r : records) {
    std::printf("  %-32s %-12s %s=%-5d %s", r.run_id.c_str(),
                std::string(to_string(r.config.loss)).c_str(),
                std::string(to_string(plan.axis)).c_str(), axis_value(r.config, plan.axis),
                std::string(to_string(r.status)).c_str());
    if (r.status == RunStatus::Ok) {
      ++ok;
      std::printf("  accuracy %.4f\n", r.accuracy);
    } else {
      std::printf("  (%s)\n", r.message.c_str());
    }
  }
  std::printf("results: %s\n", results.string().c_str());
  if (plot) {
    const fs::path svg = out / (stem + ".svg");
    std::ofstream(svg, std::ios::binary) << render_sweep_svg(load_results(results), plan.axis);
    std::printf("plot: %s\n", svg.string().c_str());
  }
  if (ok == 0) {
    std::cerr << "error: every run in the sweep failed\n";
    return kExitRuntime;
  }
  return 0;
}

int cmd_verify(const fs::path& out, const std::optional<std::uint64_t>& seed, double perturb) {
  VerifyOptions opts;
  if (seed) opts.seed = *seed;
  opts.perturb_hsic_fast = perturb;
  const VerifyReport report = run_verification(opts);
  std::cout << format_report(report);
  fs::create_directories(out);
  write_report_csv(report, out / "verify.csv");
  std::printf("report: %s\n", (out / "verify.csv").string().c_str());
  if (!report.all_passed()) {
    for (const auto& c : report.checks) {
      if (!c.passed) {
        std::fprintf(stderr, "verification failed: %s/%s observed %.6g tolerance %.3g\n",
                     c.family.c_str(), c.name.c_str(), c.observed, c.tolerance);
      }
    }
    return kExitVerification;
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& config_path,
             const std::string& view_a, const std::string& view_b, const std::string& labels,
             const fs::path& out) {
  const LoadedCheckpoint ck = load_checkpoint(checkpoint);
  ExperimentConfig cfg = config_path.empty() ? config_from_meta(ck.meta)
                                             : parse_config_entries(read_kv_file(config_path));

  ProbeResult res;
  if (!view_a.empty()) {
    const TwoViewDataset data =
        load_paired_csv(view_a, view_b.empty() ? view_a : view_b,
                        labels.empty() ? std::nullopt : std::optional<fs::path>(labels));
    res = evaluate_model(ck.model, data, cfg.probe);
  } else {
    cfg.validate();
    res = evaluate_model(ck.model, cfg);
  }

  fs::create_directories(out);
  const fs::path path = out / "eval.csv";
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream csv(path, std::ios::binary | std::ios::app);
  if (fresh) csv << "checkpoint,run_id,accuracy,per_class_accuracy,per_class_count\n";
  std::string per_class, counts;
  for (std::size_t c = 0; c < res.per_class_accuracy.size(); ++c) {
    per_class += (c ? ";" : "") + format_double(res.per_class_accuracy[c]);
    counts += (c ? ";" : "") + std::to_string(res.per_class_count[c]);
  }
  const auto run_id = ck.meta.count("run_id") ? ck.meta.at("run_id") : std::string();
  csv << csv_join({checkpoint, run_id, format_double(res.accuracy), per_class, counts}) << '\n';
  std::printf("checkpoint %s  accuracy %.4f\nresults: %s\n", checkpoint.c_str(), res.accuracy,
              path.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barlow Twins / HSIC_SSL objective kit: training, sweeps, verification"};
  app.require_subcommand(1);

  std::string out_flag;
  std::optional<std::uint64_t> seed;
  app.add_option("--out", out_flag, "Output directory (default: $HSICSSL_OUT_DIR or ./hsicssl_out)");
  app.add_option("--seed", seed, "Override init/train seeds (train, sweep) or the verify seed");

  std::string config_path, plan_path, checkpoint, view_a, view_b, labels;
  bool plot = false;
  int jobs = 1;
  double perturb = 0.0;

  auto* train = app.add_subcommand("train", "Run one experiment from a config file");
  train->add_option("--config", config_path, "key=value config file")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a sweep plan");
  sweep->add_option("--plan", plan_path, "key=value plan file")->required();
  sweep->add_flag("--plot", plot, "Write an SVG plot of the sweep");
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* verify = app.add_subcommand("verify", "Run the identity / gradient oracle suite");
  verify->add_option("--perturb-hsic-fast", perturb, "Test hook: offset the fast-path HSIC")
      ->group("");

  auto* eval = app.add_subcommand("eval", "Linear-probe a checkpoint's encoder");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--config", config_path, "Dataset/probe config (default: the checkpoint's)");
  eval->add_option("--view-a", view_a, "CSV inputs to probe instead of generated data");
  eval->add_option("--view-b", view_b, "Second view CSV (optional)");
  eval->add_option("--labels", labels, "Labels file, one integer per line");

  for (auto* sub : {train, sweep, verify, eval}) {
    sub->add_option("--out", out_flag, "Output directory");
    sub->add_option("--seed", seed, "Seed override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  const fs::path out = output_root(out_flag);
  try {
    if (*train) return cmd_train(config_path, out, seed);
    if (*sweep) return cmd_sweep(plan_path, out, plot, jobs, seed);
    if (*verify) return cmd_verify(out, seed, perturb);
    if (*eval) return cmd_eval(checkpoint, config_path, view_a, view_b, labels, out);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const ConfigError& e) {
    std::cerr << "error: invalid config: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
