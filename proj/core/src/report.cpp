#include "leap/train/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "leap/errors.hpp"
#include "leap/gnn/checkpoint.hpp"

namespace leap::train {

namespace {

using json = nlohmann::ordered_json;

json config_json(const RunConfig& config) {
  json j = json::object();
  for (const auto& [key, value] : config.echo()) j[key] = value;
  return j;
}

json epoch_record(const RunConfig& config, const std::string& run_name,
                  const EpochRecord& e) {
  json j = json::object();
  j["record"] = "epoch";
  j["run"] = run_name;
  j["seed"] = config.seed;
  j["epoch"] = e.epoch;
  j["train_loss"] = e.train_loss;
  j["train_metric"] = e.train_metric;
  j["val_metric"] = e.val_metric;
  j["mean_ecr"] = e.mean_ecr;
  j["mean_distinct_edited"] = e.mean_distinct_edited;
  j["config"] = config_json(config);
  return j;
}

json final_record(const RunConfig& config, const std::string& run_name,
                  const RunMetrics& m) {
  json j = json::object();
  j["record"] = "final";
  j["run"] = run_name;
  j["seed"] = config.seed;
  j["roc_auc"] = m.roc_auc;
  j["accuracy"] = m.accuracy;
  j["macro_f1"] = m.macro_f1;
  j["epochs_run"] = m.epochs_run;
  j["policy_updates"] = m.policy_updates;
  j["best_epoch"] = m.best_epoch;
  j["best_val_metric"] = m.best_val_metric;
  j["episodes"] = m.episodes;
  j["mean_distinct_edited"] = m.mean_distinct_edited;
  j["mean_episode_edits"] = m.mean_episode_edits;
  j["backbone_checksum"] = m.backbone_checksum;
  j["config"] = config_json(config);
  return j;
}

}  // namespace

std::string metrics_jsonl(const RunConfig& config, const std::string& run_name,
                          const RunMetrics& metrics) {
  std::ostringstream os;
  for (const auto& e : metrics.curve) os << epoch_record(config, run_name, e).dump() << '\n';
  os << final_record(config, run_name, metrics).dump() << '\n';
  return os.str();
}

std::string sweep_jsonl(const RunConfig& config, const SweepResult& sweep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < sweep.per_seed.size(); ++i) {
    RunConfig per_seed = config;
    per_seed.seed = sweep.seeds[i];
    os << final_record(per_seed, "sweep_seed_" + std::to_string(sweep.seeds[i]),
                       sweep.per_seed[i])
              .dump()
       << '\n';
  }
  json agg = json::object();
  agg["record"] = "aggregate";
  agg["runs"] = sweep.per_seed.size();
  agg["roc_auc_mean"] = sweep.roc_auc.mean;
  agg["roc_auc_std"] = sweep.roc_auc.stddev;
  agg["accuracy_mean"] = sweep.accuracy.mean;
  agg["accuracy_std"] = sweep.accuracy.stddev;
  agg["macro_f1_mean"] = sweep.macro_f1.mean;
  agg["macro_f1_std"] = sweep.macro_f1.stddev;
  agg["config"] = config_json(config);
  os << agg.dump() << '\n';
  return os.str();
}

std::string curve_tsv(const RunMetrics& metrics) {
  std::ostringstream os;
  char buf[64];
  os << "epoch\ttrain_metric\tval_metric\n";
  for (const auto& e : metrics.curve) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.17g\t%.17g\n", e.epoch, e.train_metric,
                  e.val_metric);
    os << buf;
  }
  return os.str();
}

std::string summary_table(const std::string& run_name, const RunMetrics& m) {
  std::ostringstream os;
  char buf[128];
  os << "run\troc_auc\taccuracy\tmacro_f1\tepochs\tpolicy_updates\tbest_epoch\n";
  std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%.6f\t%.6f\t%zu\t%zu\t%zu\n", run_name.c_str(),
                m.roc_auc, m.accuracy, m.macro_f1, m.epochs_run, m.policy_updates,
                m.best_epoch);
  os << buf;
  return os.str();
}

std::string verify_jsonl(const verify::TrialSummary& sufficiency,
                         const verify::TrialSummary& necessity, std::uint64_t seed) {
  std::ostringstream os;
  auto emit = [&](const verify::TrialRecord& r) {
    json j = json::object();
    j["record"] = "trial";
    j["seed"] = seed;
    j["kind"] = r.kind;
    j["n"] = r.n;
    j["d"] = r.d;
    j["l"] = r.l;
    j["residual"] = r.residual;
    j["solvable"] = r.solvable;
    j["pass"] = r.pass;
    os << j.dump() << '\n';
  };
  for (const auto& r : sufficiency.records) emit(r);
  for (const auto& r : necessity.records) emit(r);
  json s = json::object();
  s["record"] = "summary";
  s["seed"] = seed;
  s["max_residual_feature"] = sufficiency.max_residual_feature;
  s["max_residual_structure"] = sufficiency.max_residual_structure;
  s["max_residual_component"] = sufficiency.max_residual_component;
  s["max_residual_consistent"] = necessity.max_residual_consistent;
  s["min_residual_inconsistent"] = necessity.min_residual_inconsistent;
  s["all_pass"] = sufficiency.all_pass && necessity.all_pass;
  os << s.dump() << '\n';
  return os.str();
}

void write_run_files(const std::string& out_dir, const RunConfig& config,
                     const std::string& run_name, const TrainResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  auto write = [&](const std::string& name, const std::string& content) {
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("cannot write " + (dir / name).string());
    out << content;
  };
  write(run_name + "_metrics.jsonl", metrics_jsonl(config, run_name, result.metrics));
  write(run_name + "_curve.tsv", curve_tsv(result.metrics));
  write(run_name + "_summary.txt", summary_table(run_name, result.metrics));
  gnn::save_checkpoint(result.checkpoint, (dir / (run_name + "_checkpoint.leap")).string());
}

}  // namespace leap::train
