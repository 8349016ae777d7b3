// SPDX-License-Identifier: Apache-2.0
#include "trelab/training/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "internal/model_config_json.hpp"
#include "trelab/error.hpp"

namespace trelab::training {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(peak_lr > 0.0)) throw ConfigError("peak_lr must be > 0");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw ConfigError("warmup_fraction must lie in [0, 1)");
  if (!(lambda_lm >= 0.0)) throw ConfigError("lambda_lm must be >= 0");
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (model) apply_model_overrides(*this, model::ModelConfig{});
}

TrainConfig default_config(data::DatasetFormat format) {
  TrainConfig c;
  if (format == data::DatasetFormat::kSemEval) {
    c.peak_lr = 6.25e-5;
    c.lambda_lm = 0.7;
    c.model = R"({"attention_dropout":0.15})";
  }
  return c;
}

double reference_warmup_lr(data::DatasetFormat format) {
  return format == data::DatasetFormat::kSemEval ? 1e-3 : 2e-3;
}

TrainConfig parse_train_config(std::string_view json_text, TrainConfig c) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("training config must be a JSON object");
  static const std::set<std::string> known = {
      "epochs",  "batch_size", "peak_lr",           "warmup_fraction",   "lambda_lm",
      "seed",    "masking",    "use_pretrained_lm", "use_pretrained_bpe_embeddings",
      "total_steps", "checkpoint_every", "model"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.contains(it.key())) throw ConfigError("unknown training config key '" + it.key() + "'");
  }
  try {
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
    if (j.contains("peak_lr")) c.peak_lr = j["peak_lr"].get<double>();
    if (j.contains("warmup_fraction")) c.warmup_fraction = j["warmup_fraction"].get<double>();
    if (j.contains("lambda_lm")) c.lambda_lm = j["lambda_lm"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("masking")) c.masking = data::parse_masking(j["masking"].get<std::string>());
    if (j.contains("use_pretrained_lm")) c.use_pretrained_lm = j["use_pretrained_lm"].get<bool>();
    if (j.contains("use_pretrained_bpe_embeddings"))
      c.use_pretrained_bpe_embeddings = j["use_pretrained_bpe_embeddings"].get<bool>();
    if (j.contains("total_steps")) c.total_steps = j["total_steps"].get<long>();
    if (j.contains("checkpoint_every")) c.checkpoint_every = j["checkpoint_every"].get<long>();
    if (j.contains("model")) {
      if (!j["model"].is_object()) throw ConfigError("'model' must be an object");
      c.model = j["model"].dump();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read training config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_train_config(buf.str(), std::move(base));
}

std::string to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["peak_lr"] = c.peak_lr;
  j["warmup_fraction"] = c.warmup_fraction;
  j["lambda_lm"] = c.lambda_lm;
  j["seed"] = c.seed;
  j["masking"] = std::string(data::to_string(c.masking));
  j["use_pretrained_lm"] = c.use_pretrained_lm;
  j["use_pretrained_bpe_embeddings"] = c.use_pretrained_bpe_embeddings;
  j["total_steps"] = c.total_steps;
  j["checkpoint_every"] = c.checkpoint_every;
  if (c.model) j["model"] = nlohmann::ordered_json::parse(*c.model);
  return j.dump();
}

model::ModelConfig apply_model_overrides(const TrainConfig& config, model::ModelConfig base) {
  if (!config.model) return base;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(*config.model);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model overrides are not valid JSON: ") + e.what());
  }
  return internal::model_config_from_json(j, base);
}

}  // namespace trelab::training
