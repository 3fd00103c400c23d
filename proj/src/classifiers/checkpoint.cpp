#include "assist/classifiers/checkpoint.h"

#include <bit>
#include <cstring>

#include <fmt/format.h>
#include <json.hpp>

#include "assist/core/errors.h"
#include "assist/core/io.h"

namespace assist::classifiers {

namespace {

using nlohmann::ordered_json;

void append_le32(std::string& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu));
}

float read_le32(const char* p) {
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  return std::bit_cast<float>(bits);
}

template <typename T>
T field(const nlohmann::json& header, const char* name) {
  if (!header.contains(name)) throw FormatError(fmt::format("checkpoint header: missing field '{}'", name));
  try {
    return header.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(fmt::format("checkpoint header: field '{}' has the wrong type", name));
  }
}

}  // namespace

std::string serialize_checkpoint(const ReferenceCNN& model) {
  const Shape in = model.input_shape();
  ordered_json header;
  header["format_version"] = kCheckpointVersion;
  header["architecture"] = kReferenceArchitecture;
  header["input_shape"] = {in.height, in.width, 3};
  header["num_classes"] = model.num_classes();
  header["seed"] = model.seed();
  header["layers"] = ordered_json::array();
  for (const auto& layer : cnn_layers(in, model.num_classes())) {
    header["layers"].push_back({{"name", layer.name}, {"shape", layer.shape}});
  }
  std::string out = std::string(kCheckpointMagic) + "\n" + header.dump() + "\n";
  for (const auto* blob : model.params().blobs()) {
    for (float v : *blob) append_le32(out, v);
  }
  return out;
}

ReferenceCNN parse_checkpoint(std::string_view bytes) {
  const auto magic_end = bytes.find('\n');
  if (magic_end == std::string_view::npos || bytes.substr(0, magic_end) != kCheckpointMagic) {
    throw FormatError("checkpoint: bad magic line");
  }
  const auto header_end = bytes.find('\n', magic_end + 1);
  if (header_end == std::string_view::npos) throw FormatError("checkpoint: header line is not terminated");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(magic_end + 1, header_end - magic_end - 1));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("checkpoint header: {}", e.what()));
  }

  if (field<int>(header, "format_version") != kCheckpointVersion) {
    throw FormatError("checkpoint header: unsupported 'format_version'");
  }
  if (field<std::string>(header, "architecture") != kReferenceArchitecture) {
    throw FormatError("checkpoint header: unknown 'architecture'");
  }
  const auto shape = field<std::vector<int>>(header, "input_shape");
  if (shape.size() != 3 || shape[2] != 3 || shape[0] <= 0 || shape[1] <= 0 || shape[0] % 4 || shape[1] % 4) {
    throw FormatError("checkpoint header: invalid 'input_shape'");
  }
  const Shape input{shape[0], shape[1]};
  const int num_classes = field<int>(header, "num_classes");
  if (num_classes < 2) throw FormatError("checkpoint header: invalid 'num_classes'");
  const auto seed = field<std::uint64_t>(header, "seed");

  const auto expected = cnn_layers(input, num_classes);
  if (!header.contains("layers") || !header["layers"].is_array() || header["layers"].size() != expected.size()) {
    throw FormatError("checkpoint header: 'layers' does not match the architecture");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& layer = header["layers"][i];
    const auto name = layer.value("name", std::string{});
    std::vector<int> dims;
    try {
      dims = layer.at("shape").get<std::vector<int>>();
    } catch (const nlohmann::json::exception&) {
      throw FormatError(fmt::format("checkpoint header: layers[{}].shape is malformed", i));
    }
    if (name != expected[i].name) throw FormatError(fmt::format("checkpoint header: layers[{}].name", i));
    if (dims != expected[i].shape) {
      // The dense layer shape is where a wrong num_classes shows up.
      throw FormatError(fmt::format("checkpoint header: layers[{}] '{}' shape disagrees with num_classes/input_shape",
                                    i, name));
    }
  }

  auto params = CnnParams::zeros(input, num_classes);
  const std::size_t need = params.count() * 4;
  const std::string_view payload = bytes.substr(header_end + 1);
  if (payload.size() != need) {
    throw FormatError(fmt::format("checkpoint weights: expected {} bytes, found {}", need, payload.size()));
  }
  const char* p = payload.data();
  for (auto* blob : params.blobs()) {
    for (float& v : *blob) {
      v = read_le32(p);
      p += 4;
    }
  }
  return ReferenceCNN(input, num_classes, std::move(params), seed);
}

void save_checkpoint(const ReferenceCNN& model, const std::filesystem::path& path) {
  core::write_file_bytes(path, serialize_checkpoint(model));
}

ReferenceCNN load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = core::read_file_bytes(path);
  return parse_checkpoint(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace assist::classifiers
