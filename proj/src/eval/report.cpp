#include "assist/eval/report.h"

namespace assist::eval {

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config_hash"] = report.config_hash;
  j["seed"] = report.seed;
  j["metrics"] = report.metrics;
  auto& tables = j["tables"] = nlohmann::ordered_json::array();
  for (const auto& t : report.tables) {
    nlohmann::ordered_json jt;
    jt["name"] = t.name;
    jt["columns"] = t.columns;
    jt["rows"] = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      std::vector<std::string> cells;
      for (const auto& c : t.rows[r]) cells.push_back(c.format());
      jt["rows"].push_back({{"label", t.row_labels[r]}, {"cells", cells}});
    }
    tables.push_back(std::move(jt));
  }
  j["artifacts"] = report.artifacts;
  return j;
}

}  // namespace assist::eval
