#include "leap/train/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "leap/errors.hpp"

namespace leap::train {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kGpf: return "gpf";
    case Variant::kGpfPlus: return "gpf_plus";
    case Variant::kNoEcr: return "no_ecr";
    case Variant::kHeadOnly: return "head_only";
  }
  return "full";
}

Variant variant_from_name(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "gpf") return Variant::kGpf;
  if (name == "gpf_plus") return Variant::kGpfPlus;
  if (name == "no_ecr") return Variant::kNoEcr;
  if (name == "head_only") return Variant::kHeadOnly;
  throw ConfigError("unknown variant '" + name + "'");
}

void RunConfig::resolve() {
  if (task != "graph" && task != "node")
    throw ConfigError("task must be 'graph' or 'node', got '" + task + "'");
  if (h < 0) h = task == "graph" ? 3 : 4;
  if (gin_layers < 0) gin_layers = task == "graph" ? 3 : 2;
  if (horizon_frac < 0.0) horizon_frac = shots > 0 ? 0.5 : 0.25;

  if (lr_policy <= 0.0 || lr_head <= 0.0) throw ConfigError("learning rates must be positive");
  if (k < 1) throw ConfigError("k must be >= 1");
  if (h < 1) throw ConfigError("h must be >= 1");
  if (readout != "sum" && readout != "mean")
    throw ConfigError("readout must be 'sum' or 'mean'");
  if (head_layers < 1 || head_layers > 3)
    throw ConfigError("head_layers must be in [1,3]");
  variant_from_name(variant);
  rl_config().validate();
}

rl::RlConfig RunConfig::rl_config() const {
  rl::RlConfig rc;
  rc.gamma = gamma;
  rc.gae_lambda = gae_lambda;
  rc.clip = clip;
  rc.beta_d = beta_d;
  rc.beta_c = beta_c;
  rc.theta = theta;
  rc.lambda_e = lambda_e;
  rc.sigma = sigma;
  rc.critic_weight = critic_weight;
  rc.update_interval = static_cast<std::size_t>(h < 1 ? 1 : h);
  rc.minibatch = ppo_minibatch;
  return rc;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + s + "'");
  }
}

long to_long(const std::string& key, const std::string& s) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + s + "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& s) {
  const long v = to_long(key, s);
  if (v < 0) throw ConfigError("config key '" + key + "' must be non-negative");
  return static_cast<std::size_t>(v);
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + s + "'");
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> f;
    auto str = [&f](const std::string& key, std::string RunConfig::*member) {
      f[key] = {[member](RunConfig& c, const std::string& s) { c.*member = s; },
                [member](const RunConfig& c) { return c.*member; }};
    };
    auto dbl = [&f](const std::string& key, double RunConfig::*member) {
      f[key] = {[member, key](RunConfig& c, const std::string& s) { c.*member = to_double(key, s); },
                [member](const RunConfig& c) { return fmt(c.*member); }};
    };
    auto sz = [&f](const std::string& key, std::size_t RunConfig::*member) {
      f[key] = {[member, key](RunConfig& c, const std::string& s) { c.*member = to_size(key, s); },
                [member](const RunConfig& c) { return std::to_string(c.*member); }};
    };
    auto lng = [&f](const std::string& key, long RunConfig::*member) {
      f[key] = {[member, key](RunConfig& c, const std::string& s) { c.*member = to_long(key, s); },
                [member](const RunConfig& c) { return std::to_string(c.*member); }};
    };
    auto gen_dbl = [&f](const std::string& key, double GeneratorSpec::*member) {
      f[key] = {[member, key](RunConfig& c, const std::string& s) { c.gen.*member = to_double(key, s); },
                [member](const RunConfig& c) { return fmt(c.gen.*member); }};
    };
    auto gen_sz = [&f](const std::string& key, std::size_t GeneratorSpec::*member) {
      f[key] = {[member, key](RunConfig& c, const std::string& s) { c.gen.*member = to_size(key, s); },
                [member](const RunConfig& c) { return std::to_string(c.gen.*member); }};
    };

    str("task", &RunConfig::task);
    f["seed"] = {[](RunConfig& c, const std::string& s) {
                   c.seed = static_cast<std::uint64_t>(to_long("seed", s));
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }};
    sz("epochs", &RunConfig::epochs);
    sz("batch_size", &RunConfig::batch_size);
    dbl("lr_policy", &RunConfig::lr_policy);
    dbl("lr_head", &RunConfig::lr_head);
    dbl("weight_decay_head", &RunConfig::weight_decay_head);
    dbl("momentum", &RunConfig::momentum);
    sz("k", &RunConfig::k);
    dbl("theta", &RunConfig::theta);
    dbl("lambda_e", &RunConfig::lambda_e);
    lng("h", &RunConfig::h);
    dbl("horizon_frac", &RunConfig::horizon_frac);
    sz("shots", &RunConfig::shots);
    sz("patience", &RunConfig::patience);
    dbl("gamma", &RunConfig::gamma);
    dbl("gae_lambda", &RunConfig::gae_lambda);
    dbl("clip", &RunConfig::clip);
    dbl("beta_d", &RunConfig::beta_d);
    dbl("beta_c", &RunConfig::beta_c);
    dbl("sigma", &RunConfig::sigma);
    dbl("critic_weight", &RunConfig::critic_weight);
    sz("ppo_minibatch", &RunConfig::ppo_minibatch);
    sz("policy_hidden", &RunConfig::policy_hidden);
    lng("gin_layers", &RunConfig::gin_layers);
    sz("gin_hidden", &RunConfig::gin_hidden);
    dbl("gin_init_scale", &RunConfig::gin_init_scale);
    dbl("dropout", &RunConfig::dropout);
    str("readout", &RunConfig::readout);
    sz("head_layers", &RunConfig::head_layers);
    sz("head_hidden", &RunConfig::head_hidden);
    sz("hops", &RunConfig::hops);
    gen_sz("gen_classes", &GeneratorSpec::num_classes);
    gen_sz("gen_graphs_per_class", &GeneratorSpec::graphs_per_class);
    gen_sz("gen_nodes_min", &GeneratorSpec::nodes_min);
    gen_sz("gen_nodes_max", &GeneratorSpec::nodes_max);
    gen_sz("gen_feature_dim", &GeneratorSpec::feature_dim);
    gen_dbl("gen_p_in", &GeneratorSpec::p_in);
    gen_dbl("gen_p_out", &GeneratorSpec::p_out);
    gen_dbl("gen_feature_shift", &GeneratorSpec::feature_shift);
    gen_dbl("gen_feature_noise", &GeneratorSpec::feature_noise);
    gen_sz("gen_hubs", &GeneratorSpec::hubs);
    gen_dbl("gen_hub_degree", &GeneratorSpec::hub_degree);
    gen_sz("gen_node_task_nodes", &GeneratorSpec::node_task_nodes);
    sz("pretrain_epochs", &RunConfig::pretrain_epochs);
    dbl("pretrain_lr", &RunConfig::pretrain_lr);
    str("out_dir", &RunConfig::out_dir);
    str("data_dir", &RunConfig::data_dir);
    str("backbone", &RunConfig::backbone);
    str("variant", &RunConfig::variant);
    f["dump_trajectories"] = {
        [](RunConfig& c, const std::string& s) { c.dump_trajectories = to_bool("dump_trajectories", s); },
        [](const RunConfig& c) { return c.dump_trajectories ? std::string("true") : std::string("false"); }};
    return f;
  }();
  return table;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [key, field] : fields()) out.emplace_back(key, field.get(*this));
  return out;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    std::string eq;
    ls >> eq;
    std::string value;
    if (eq == "=") {
      ls >> value;
    } else {
      value = eq;  // "key value" form
    }
    if (value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": key '" + key +
                        "' has no value");
    kv[key] = value;
  }
  return kv;
}

void apply_override(std::map<std::string, std::string>& kv, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must be key=value, got '" + assignment + "'");
  kv[assignment.substr(0, eq)] = assignment.substr(eq + 1);
}

RunConfig config_from_map(const std::map<std::string, std::string>& kv) {
  RunConfig config;
  const auto& table = fields();
  for (const auto& [key, value] : kv) {
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(config, value);
  }
  config.resolve();
  return config;
}

}  // namespace leap::train
