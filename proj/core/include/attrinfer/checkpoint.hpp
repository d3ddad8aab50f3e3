#pragma once

#include <filesystem>
#include <string>

#include "attrinfer/graph.hpp"
#include "attrinfer/model.hpp"
#include "attrinfer/training.hpp"

namespace attrinfer {

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  std::string schema_hash;
};

// JSON file with the schema hash, training config, model dims and every
// parameter tensor. Doubles are written in shortest round-trip form, so a
// reload reproduces the parameters bit for bit.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const TrainConfig& config, const AttributeSchema& schema);

// Throws IoError when the file cannot be read, ParseError when it is malformed
// and SchemaError when its schema hash differs from `schema`'s.
Checkpoint load_checkpoint(const std::filesystem::path& path, const AttributeSchema& schema);

}  // namespace attrinfer
