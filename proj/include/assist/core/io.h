#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "assist/core/image.h"

namespace assist::core {

/// 8-bit RGB PNG. Load maps byte b to b / 255; save maps v to
/// floor(v * 255 + 0.5) after clamping to [0, 1].
Image load_png(const std::filesystem::path& path);
void save_png(const Image& image, const std::filesystem::path& path);

std::uint8_t quantize_unit(double v);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::string_view bytes);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace assist::core
