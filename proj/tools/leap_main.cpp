// Command-line entry point: dataset generation, theorem verification, masked
// edge pretraining, LEAP training, ablations and seed sweeps.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "leap/errors.hpp"
#include "leap/graph_io.hpp"
#include "leap/train/report.hpp"
#include "leap/train/trainer.hpp"
#include "leap/verify/verifier.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;

struct ConfigArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("--config", args.config_path, "flat key = value config file");
  cmd->add_option("--set", args.overrides, "override, key=value (repeatable)");
}

leap::train::RunConfig load_config(const ConfigArgs& args) {
  std::map<std::string, std::string> kv;
  if (!args.config_path.empty()) kv = leap::train::read_config_file(args.config_path);
  for (const auto& assignment : args.overrides)
    leap::train::apply_override(kv, assignment);
  leap::train::RunConfig config = leap::train::config_from_map(kv);
  if (const char* env = std::getenv("LEAP_OUT_DIR"); env && *env) config.out_dir = env;
  return config;
}

std::string split_name(const leap::DatasetSplit& split, std::size_t idx) {
  for (auto v : split.train)
    if (v == idx) return "train";
  for (auto v : split.val)
    if (v == idx) return "val";
  for (auto v : split.test)
    if (v == idx) return "test";
  return "none";
}

int cmd_gen(const ConfigArgs& args) {
  const auto config = load_config(args);
  fs::create_directories(config.out_dir);
  std::vector<leap::Graph> graphs;
  if (config.task == "graph") {
    graphs = leap::generate_synthetic_dataset(config.gen, config.seed);
  } else {
    graphs.push_back(leap::generate_node_task_graph(config.gen, config.seed));
  }
  const auto split = leap::split_dataset(graphs.size(), {0.8, 0.1, 0.1}, config.seed);
  std::vector<leap::ManifestEntry> entries;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "g%05zu.graph", i);
    leap::save_graph(graphs[i], (fs::path(config.out_dir) / name).string());
    leap::ManifestEntry e;
    e.file = name;
    e.label = graphs[i].graph_label.value_or(-1);
    e.split = config.task == "graph" ? split_name(split, i) : "none";
    entries.push_back(std::move(e));
  }
  std::ofstream manifest(fs::path(config.out_dir) / "manifest.txt");
  manifest << leap::serialize_manifest(entries);
  std::cout << "wrote " << graphs.size() << " graphs to " << config.out_dir << "\n";
  return kExitOk;
}

int cmd_verify(std::size_t cases, std::size_t max_nodes, const std::string& layers,
               double tolerance, std::uint64_t seed, const std::string& out_path) {
  leap::verify::TrialConfig cfg;
  cfg.cases = cases;
  cfg.max_nodes = max_nodes;
  cfg.seed = seed;
  if (!layers.empty()) {
    cfg.layer_choices.clear();
    std::istringstream ls(layers);
    std::string tok;
    while (std::getline(ls, tok, ','))
      cfg.layer_choices.push_back(static_cast<std::size_t>(std::stoul(tok)));
    if (cfg.layer_choices.empty()) throw leap::ConfigError("--layers: empty list");
  }
  if (tolerance >= 0.0) {
    cfg.tol_case1 = tolerance;
    cfg.tol_case2 = tolerance;
    cfg.tol_case3 = tolerance;
    cfg.tol_consistent = tolerance;
  }

  const auto sufficiency = leap::verify::run_sufficiency_trials(cfg);
  const auto necessity = leap::verify::run_necessity_trials(cfg);

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw leap::ConfigError("cannot write " + out_path);
    out << leap::train::verify_jsonl(sufficiency, necessity, seed);
  }

  std::printf("feature      max residual %.3e  (tol %.1e)\n",
              sufficiency.max_residual_feature, cfg.tol_case1);
  std::printf("structure    max residual %.3e  (tol %.1e)\n",
              sufficiency.max_residual_structure, cfg.tol_case2);
  std::printf("component    max residual %.3e  (tol %.1e)\n",
              sufficiency.max_residual_component, cfg.tol_case3);
  std::printf("necessity    max consistent residual %.3e  (tol %.1e)\n",
              necessity.max_residual_consistent, cfg.tol_consistent);
  std::printf("necessity    min inconsistent residual %.3e  (must exceed %.1e)\n",
              necessity.min_residual_inconsistent, cfg.tol_inconsistent);
  const bool ok = sufficiency.all_pass && necessity.all_pass;
  std::printf("%s\n", ok ? "verification PASS" : "verification FAIL");
  return ok ? kExitOk : kExitNumeric;
}

leap::gnn::GinModel obtain_backbone(const leap::train::RunConfig& config,
                                    const leap::train::TaskData& data) {
  if (!config.backbone.empty()) {
    const auto ckpt = leap::gnn::load_checkpoint(config.backbone);
    return leap::gnn::unpack_gin(ckpt, "backbone");
  }
  return leap::train::pretrain_backbone(config, data);
}

int cmd_pretrain(const ConfigArgs& args) {
  const auto config = load_config(args);
  const auto data = leap::train::build_task_data(config);
  const auto backbone = leap::train::pretrain_backbone(config, data);
  fs::create_directories(config.out_dir);
  leap::gnn::CheckpointData ckpt;
  for (const auto& [key, value] : config.echo()) ckpt.meta["cfg." + key] = value;
  leap::gnn::pack_gin(ckpt, backbone, "backbone");
  const std::string path = (fs::path(config.out_dir) / "backbone.leap").string();
  leap::gnn::save_checkpoint(ckpt, path);
  std::cout << "pretrained backbone written to " << path << "\n";
  return kExitOk;
}

int cmd_train(const ConfigArgs& args) {
  const auto config = load_config(args);
  const auto data = leap::train::build_task_data(config);
  const auto backbone = obtain_backbone(config, data);
  const auto variant = leap::train::variant_from_name(config.variant);

  std::ofstream dump;
  std::ostream* dump_ptr = nullptr;
  if (config.dump_trajectories) {
    fs::create_directories(config.out_dir);
    dump.open(fs::path(config.out_dir) / "trajectories.jsonl");
    dump_ptr = &dump;
  }
  const auto result = leap::train::train_leap(data, backbone, config, variant, dump_ptr);
  leap::train::write_run_files(config.out_dir, config, "train_" + config.variant, result);
  std::printf("test roc_auc %.4f accuracy %.4f macro_f1 %.4f (best epoch %zu)\n",
              result.metrics.roc_auc, result.metrics.accuracy, result.metrics.macro_f1,
              result.metrics.best_epoch);
  return kExitOk;
}

int cmd_ablate(const ConfigArgs& args) {
  const auto config = load_config(args);
  const auto data = leap::train::build_task_data(config);
  const auto backbone = obtain_backbone(config, data);
  using leap::train::Variant;
  for (Variant variant : {Variant::kFull, Variant::kGpf, Variant::kGpfPlus,
                          Variant::kNoEcr, Variant::kHeadOnly}) {
    leap::train::RunConfig per_variant = config;
    per_variant.variant = leap::train::variant_name(variant);
    const auto result = leap::train::train_leap(data, backbone, per_variant, variant);
    leap::train::write_run_files(config.out_dir, per_variant,
                                 "ablate_" + per_variant.variant, result);
    std::printf("%-9s roc_auc %.4f accuracy %.4f macro_f1 %.4f\n",
                per_variant.variant.c_str(), result.metrics.roc_auc,
                result.metrics.accuracy, result.metrics.macro_f1);
  }
  return kExitOk;
}

int cmd_sweep(const ConfigArgs& args, const std::string& seed_list) {
  const auto config = load_config(args);
  std::vector<std::uint64_t> seeds;
  std::istringstream ls(seed_list);
  std::string tok;
  while (std::getline(ls, tok, ',')) seeds.push_back(std::stoull(tok));
  if (seeds.empty()) throw leap::ConfigError("--seeds: empty list");

  const auto data = leap::train::build_task_data(config);
  const auto backbone = obtain_backbone(config, data);
  const auto variant = leap::train::variant_from_name(config.variant);
  const auto sweep = leap::train::seed_sweep(data, backbone, config, variant, seeds);

  fs::create_directories(config.out_dir);
  std::ofstream out(fs::path(config.out_dir) / "sweep.jsonl");
  out << leap::train::sweep_jsonl(config, sweep);
  std::printf("sweep over %zu seeds: roc_auc %.4f +- %.4f\n", seeds.size(),
              sweep.roc_auc.mean, sweep.roc_auc.stddev);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph prompt tuning lab: universal prompt equivalence checks and "
               "RL-edited prompt training on synthetic graph tasks"};
  app.require_subcommand(1);

  ConfigArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset + manifest");
  add_config_options(gen, gen_args);

  std::size_t cases = 200, max_nodes = 8;
  std::string layers;
  double tolerance = -1.0;
  std::uint64_t verify_seed = 42;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "run equivalence + necessity trials");
  verify->add_option("--cases", cases, "trials per atomic manipulation");
  verify->add_option("--max-nodes", max_nodes, "largest graph size");
  verify->add_option("--layers", layers, "comma list of layer counts, e.g. 1,2,3");
  verify->add_option("--tolerance", tolerance, "override all pass tolerances");
  verify->add_option("--seed", verify_seed, "trial seed");
  verify->add_option("--out", verify_out, "write per-trial records to this file");

  ConfigArgs pre_args;
  auto* pretrain = app.add_subcommand("pretrain", "masked-edge pretrain a backbone");
  add_config_options(pretrain, pre_args);

  ConfigArgs train_args;
  auto* train = app.add_subcommand("train", "train prompts + policies + head");
  add_config_options(train, train_args);

  ConfigArgs ablate_args;
  auto* ablate = app.add_subcommand("ablate", "run all prompt variants");
  add_config_options(ablate, ablate_args);

  ConfigArgs sweep_args;
  std::string seed_list = "1,2,3,4,5";
  auto* sweep = app.add_subcommand("sweep", "repeat training over seeds");
  add_config_options(sweep, sweep_args);
  sweep->add_option("--seeds", seed_list, "comma list of seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (verify->parsed())
      return cmd_verify(cases, max_nodes, layers, tolerance, verify_seed, verify_out);
    if (pretrain->parsed()) return cmd_pretrain(pre_args);
    if (train->parsed()) return cmd_train(train_args);
    if (ablate->parsed()) return cmd_ablate(ablate_args);
    if (sweep->parsed()) return cmd_sweep(sweep_args, seed_list);
  } catch (const leap::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const leap::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const leap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitUsage;
}
