// SPDX-License-Identifier: Apache-2.0
#include "trelab/model/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "internal/model_config_json.hpp"
#include "trelab/error.hpp"

namespace trelab::model {
namespace {

using Json = nlohmann::ordered_json;

void append_le(std::string& out, double value) {
  auto bits = std::bit_cast<std::uint64_t>(value);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  char buf[8];
  std::memcpy(buf, &bits, 8);
  out.append(buf, 8);
}

double read_le(const char* p) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, p, 8);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

[[noreturn]] void fail(const std::string& what) { throw ParseError("checkpoint: " + what); }

}  // namespace

const Tensor* Checkpoint::find(std::string_view name) const {
  for (const NamedTensor& t : tensors)
    if (t.name == name) return &t.value;
  return nullptr;
}

const std::string* Checkpoint::meta(std::string_view key) const {
  auto it = metadata.find(std::string(key));
  return it == metadata.end() ? nullptr : &it->second;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  Json header;
  header["format"] = "trelab-ckpt";
  header["version"] = 1;
  header["config"] = internal::model_config_to_json(ckpt.config);
  header["vocab_fingerprint"] = ckpt.vocab_fingerprint;
  header["metadata"] = Json::object();
  for (const auto& [k, v] : ckpt.metadata) header["metadata"][k] = v;
  Json manifest = Json::array();
  std::size_t offset = 0;
  for (const NamedTensor& t : ckpt.tensors) {
    const std::size_t length = t.value.size() * sizeof(double);
    manifest.push_back(Json{{"name", t.name}, {"shape", t.value.shape()}, {"offset", offset}, {"length", length}});
    offset += length;
  }
  header["tensors"] = std::move(manifest);

  const std::string header_text = header.dump();
  std::string out(kCheckpointMagic);
  out += '\n';
  out += std::to_string(header_text.size());
  out += '\n';
  out += header_text;
  out.reserve(out.size() + offset);
  for (const NamedTensor& t : ckpt.tensors)
    for (double v : t.value.data()) append_le(out, v);
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  const std::size_t magic_end = bytes.find('\n');
  if (magic_end == std::string_view::npos || bytes.substr(0, magic_end) != kCheckpointMagic) {
    fail("missing '" + std::string(kCheckpointMagic) + "' magic line");
  }
  const std::size_t len_end = bytes.find('\n', magic_end + 1);
  if (len_end == std::string_view::npos) fail("missing header length line");
  std::size_t header_len = 0;
  const std::string_view len_text = bytes.substr(magic_end + 1, len_end - magic_end - 1);
  auto [ptr, ec] = std::from_chars(len_text.data(), len_text.data() + len_text.size(), header_len);
  if (ec != std::errc() || ptr != len_text.data() + len_text.size()) fail("malformed header length");
  const std::size_t header_begin = len_end + 1;
  if (bytes.size() - header_begin < header_len) fail("header truncated");

  Json header;
  try {
    header = Json::parse(bytes.substr(header_begin, header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("header is not valid JSON: ") + e.what());
  }
  const std::string_view payload = bytes.substr(header_begin + header_len);

  Checkpoint ckpt;
  try {
    if (header.at("format") != "trelab-ckpt" || header.at("version") != 1) fail("unsupported format/version");
    ckpt.config = internal::model_config_from_json(header.at("config"));
    ckpt.vocab_fingerprint = header.at("vocab_fingerprint").get<std::string>();
    for (auto it = header.at("metadata").begin(); it != header.at("metadata").end(); ++it) {
      ckpt.metadata[it.key()] = it.value().get<std::string>();
    }
    std::size_t expected_offset = 0;
    for (const Json& entry : header.at("tensors")) {
      const std::string name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<numerics::Shape>();
      const auto offset = entry.at("offset").get<std::size_t>();
      const auto length = entry.at("length").get<std::size_t>();
      if (offset != expected_offset) {
        fail("tensor '" + name + "' offset " + std::to_string(offset) + " != expected " +
             std::to_string(expected_offset));
      }
      const std::size_t count = numerics::element_count(shape);
      if (shape.empty() || length != count * sizeof(double)) fail("tensor '" + name + "' length does not match shape");
      if (offset + length > payload.size()) fail("tensor '" + name + "' extends past end of file");
      std::vector<double> data(count);
      for (std::size_t i = 0; i < count; ++i) data[i] = read_le(payload.data() + offset + i * sizeof(double));
      ckpt.tensors.push_back(NamedTensor{name, Tensor(shape, std::move(data))});
      expected_offset += length;
    }
    if (expected_offset != payload.size()) {
      fail("payload is " + std::to_string(payload.size()) + " bytes but manifest covers " +
           std::to_string(expected_offset));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(std::string("malformed header: ") + e.what());
  } catch (const ConfigError& e) {
    fail(e.what());
  } catch (const DimensionError& e) {
    fail(e.what());
  }
  return ckpt;
}

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

std::vector<NamedTensor> model_tensors(Model& model) {
  std::vector<NamedTensor> out;
  for (Parameter* p : model.parameters()) out.push_back(NamedTensor{p->name, p->value});
  return out;
}

Model restore_model(const Checkpoint& checkpoint) {
  Rng scratch(0);
  Model model = init_model(checkpoint.config, scratch);
  for (Parameter* p : model.parameters()) {
    const Tensor* stored = checkpoint.find(p->name);
    if (!stored) throw ParseError("checkpoint: missing tensor '" + p->name + "'");
    if (stored->shape() != p->value.shape()) {
      throw ParseError("checkpoint: tensor '" + p->name + "' has shape " + numerics::to_string(stored->shape()) +
                       ", config implies " + numerics::to_string(p->value.shape()));
    }
    p->value = *stored;
    p->zero_grad();
  }
  return model;
}

}  // namespace trelab::model
