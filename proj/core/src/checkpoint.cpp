#include "leap/gnn/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "leap/errors.hpp"

namespace leap::gnn {

const Tensor& CheckpointData::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return t;
  throw ParseError("checkpoint: missing tensor '" + name + "'");
}

const std::string& CheckpointData::meta_value(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw ParseError("checkpoint: missing meta key '" + key + "'");
  return it->second;
}

std::string serialize_checkpoint(const CheckpointData& data) {
  std::ostringstream os;
  os << "leap-weights 1\n";
  for (const auto& [k, v] : data.meta) os << "meta " << k << ' ' << v << '\n';
  char buf[32];
  for (const auto& [name, t] : data.tensors) {
    os << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (std::size_t i = 0; i < t.rows(); ++i) {
      for (std::size_t j = 0; j < t.cols(); ++j) {
        if (j) os << ' ';
        std::snprintf(buf, sizeof(buf), "%.17g", t.at(i, j));
        os << buf;
      }
      os << '\n';
    }
  }
  os << "end\n";
  return os.str();
}

CheckpointData parse_checkpoint(const std::string& content) {
  std::istringstream is(content);
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    ++line_no;
    return static_cast<bool>(std::getline(is, line));
  };
  auto fail = [&](const std::string& what) -> void {
    throw ParseError("checkpoint line " + std::to_string(line_no) + ": " + what);
  };

  if (!next_line() || line != "leap-weights 1") fail("bad header, expected 'leap-weights 1'");

  CheckpointData data;
  bool done = false;
  while (!done && next_line()) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag.empty()) continue;
    if (tag == "end") {
      done = true;
    } else if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      if (key.empty()) fail("meta line without key");
      data.meta[key] = value;
    } else if (tag == "tensor") {
      std::string name;
      std::size_t rows = 0, cols = 0;
      if (!(ls >> name >> rows >> cols)) fail("malformed tensor header");
      Tensor t(rows, cols);
      for (std::size_t i = 0; i < rows; ++i) {
        if (!next_line()) fail("truncated tensor '" + name + "'");
        std::istringstream row(line);
        for (std::size_t j = 0; j < cols; ++j)
          if (!(row >> t.at(i, j))) fail("bad value in tensor '" + name + "'");
      }
      data.tensors.emplace_back(std::move(name), std::move(t));
    } else {
      fail("unknown tag '" + tag + "'");
    }
  }
  if (!done) throw ParseError("checkpoint: missing 'end' marker");
  return data;
}

void save_checkpoint(const CheckpointData& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write checkpoint " + path);
  out << serialize_checkpoint(data);
}

CheckpointData load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open checkpoint " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_checkpoint(os.str());
}

void pack_gin(CheckpointData& data, const GinModel& model, const std::string& prefix) {
  data.meta[prefix + ".layers"] = std::to_string(model.mlps.size());
  data.meta[prefix + ".dropout"] = std::to_string(model.dropout_rate);
  data.meta[prefix + ".frozen"] = model.frozen ? "1" : "0";
  for (std::size_t l = 0; l < model.mlps.size(); ++l) {
    data.meta[prefix + ".eps" + std::to_string(l)] = std::to_string(model.eps[l]);
    const auto& mlp = model.mlps[l];
    for (std::size_t k = 0; k < mlp.weights.size(); ++k) {
      const std::string base = prefix + ".l" + std::to_string(l) + "." + std::to_string(k);
      data.tensors.emplace_back(base + ".w", mlp.weights[k].value);
      data.tensors.emplace_back(base + ".b", mlp.biases[k].value);
    }
  }
}

GinModel unpack_gin(const CheckpointData& data, const std::string& prefix) {
  GinModel model;
  const std::size_t layers = std::stoul(data.meta_value(prefix + ".layers"));
  model.dropout_rate = std::stod(data.meta_value(prefix + ".dropout"));
  for (std::size_t l = 0; l < layers; ++l) {
    model.eps.push_back(std::stod(data.meta_value(prefix + ".eps" + std::to_string(l))));
    ad::Mlp mlp;
    for (std::size_t k = 0;; ++k) {
      const std::string base = prefix + ".l" + std::to_string(l) + "." + std::to_string(k);
      bool found = false;
      for (const auto& [n, t] : data.tensors)
        if (n == base + ".w") found = true;
      if (!found) break;
      mlp.weights.emplace_back(base + ".w", data.tensor(base + ".w"));
      mlp.biases.emplace_back(base + ".b", data.tensor(base + ".b"));
    }
    if (mlp.weights.empty()) throw ParseError("checkpoint: gin layer " + std::to_string(l) +
                                              " has no weights under prefix " + prefix);
    model.mlps.push_back(std::move(mlp));
  }
  model.set_frozen(data.meta_value(prefix + ".frozen") == "1");
  return model;
}

}  // namespace leap::gnn
