#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "signpose/nn/graph.hpp"

namespace signpose {

// Binary parameter container: magic, count, then per tensor
// {name, rows, cols, row-major little-endian doubles}. Written atomically;
// reload restores values bit-exactly.
void save_parameters(const std::filesystem::path& path, const std::vector<nn::Parameter*>& params);

// Restores parameter values by name. Every file tensor must match an existing
// parameter's shape. With allow_missing, parameters absent from the file keep
// their current values (fresh heads on top of a pretrained backbone);
// otherwise any mismatch in either direction is an error.
void load_parameters(const std::filesystem::path& path, const std::vector<nn::Parameter*>& params,
                     bool allow_missing = false);

// Names stored in a parameter file.
std::vector<std::string> parameter_names_in_file(const std::filesystem::path& path);

// Checkpoint directory: model.bin + config.json (+ log.jsonl written by the
// training loops).
struct CheckpointInfo {
  nlohmann::json config;
  long long step = 0;
  std::string kind;  // "pretrain", "islr", "cslr", "slt"
};

void save_checkpoint_info(const std::filesystem::path& dir, const CheckpointInfo& info);
CheckpointInfo load_checkpoint_info(const std::filesystem::path& dir);

}  // namespace signpose
