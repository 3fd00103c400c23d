#pragma once

#include <filesystem>

#include "assist/classifiers/reference_cnn.h"

namespace assist::classifiers {

inline constexpr int kCheckpointVersion = 1;
inline constexpr const char* kCheckpointMagic = "ASSIST-CHECKPOINT";

// Layout:
//   line 1: ASSIST-CHECKPOINT
//   line 2: one-line JSON header {format_version, architecture, input_shape,
//           num_classes, seed, layers:[{name, shape}]}
//   rest:   little-endian float32 blobs in declared layer order.
void save_checkpoint(const ReferenceCNN& model, const std::filesystem::path& path);

/// Throws FormatError naming the offending field on any inconsistency.
ReferenceCNN load_checkpoint(const std::filesystem::path& path);

std::string serialize_checkpoint(const ReferenceCNN& model);
ReferenceCNN parse_checkpoint(std::string_view bytes);

}  // namespace assist::classifiers
