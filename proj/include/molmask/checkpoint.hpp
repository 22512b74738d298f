#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "molmask/optim.hpp"

namespace molmask::ad {

struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

/// Flat archive: magic "MOLMASK1", u64 manifest length + JSON manifest bytes,
/// u64 entry count, then per entry: u64 name length, name, u64 rank, u64
/// dims, raw little-endian float64 values. All integers little-endian.
struct Checkpoint {
  nlohmann::json manifest;
  std::vector<NamedArray> entries;

  const NamedArray& find(const std::string& name) const;
};

std::string encode_checkpoint(const nlohmann::json& manifest, const ParameterList& params);
Checkpoint decode_checkpoint(const std::string& bytes);

void write_checkpoint(const std::string& path, const nlohmann::json& manifest, const ParameterList& params);
Checkpoint read_checkpoint(const std::string& path);

/// Copies archived values into matching parameters; shapes must agree.
void load_parameters(const Checkpoint& ckpt, ParameterList& params);

}  // namespace molmask::ad
