// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "trelab/model/transformer.hpp"

namespace trelab::model {

inline constexpr std::string_view kCheckpointMagic = "trelab-ckpt v1";

struct NamedTensor {
  std::string name;
  Tensor value;
};

// On-disk layout:
//
//   trelab-ckpt v1\n
//   <header byte length>\n
//   <JSON header: config, vocab_fingerprint, metadata, tensor manifest>
//   <payload: little-endian float64 values, tensors in manifest order>
//
// Manifest offsets are relative to the payload start and must be contiguous.
struct Checkpoint {
  ModelConfig config;
  std::string vocab_fingerprint;
  // Free-form string entries (embedded vocabulary, label set, training state).
  std::map<std::string, std::string> metadata;
  std::vector<NamedTensor> tensors;

  const Tensor* find(std::string_view name) const;
  const std::string* meta(std::string_view key) const;
};

std::string encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(std::string_view bytes);
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Model parameters as checkpoint tensors, keyed by parameter name.
std::vector<NamedTensor> model_tensors(Model& model);
// Rebuilds a model from a checkpoint; every parameter must be present with the
// shape implied by the stored config.
Model restore_model(const Checkpoint& checkpoint);

}  // namespace trelab::model
