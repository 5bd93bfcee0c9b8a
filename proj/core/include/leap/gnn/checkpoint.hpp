#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "leap/gnn/gin.hpp"
#include "leap/tensor.hpp"

namespace leap::gnn {

// Versioned text checkpoint: a meta key/value section followed by a shape
// table with flat values written at 17 significant digits, so the round trip
// is exact for doubles.
struct CheckpointData {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
  const std::string& meta_value(const std::string& key) const;
};

std::string serialize_checkpoint(const CheckpointData& data);
CheckpointData parse_checkpoint(const std::string& content);

void save_checkpoint(const CheckpointData& data, const std::string& path);
CheckpointData load_checkpoint(const std::string& path);

// GinModel <-> named tensors (prefix allows several models in one file).
void pack_gin(CheckpointData& data, const GinModel& model, const std::string& prefix);
GinModel unpack_gin(const CheckpointData& data, const std::string& prefix);

}  // namespace leap::gnn
