#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "assist/eval/table.h"

namespace assist::eval {

inline constexpr int kReportSchemaVersion = 1;

struct EvalReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<Table> tables;
  std::vector<std::string> artifacts;
  /// Free-form scalar results (accuracies, counts, ...).
  nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
};

/// Cells are stored as their formatted strings, so the JSON and CSV forms
/// always agree.
nlohmann::ordered_json to_json(const EvalReport& report);

}  // namespace assist::eval
