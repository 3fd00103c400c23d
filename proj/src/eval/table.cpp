#include "assist/eval/table.h"

#include <fmt/format.h>

#include "assist/core/errors.h"

namespace assist::eval {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string Cell::format() const {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += '/';
    if (!parts[i]) {
      out += 'x';
    } else {
      out += percent ? fmt::format("{:.1f}", *parts[i] * 100.0) : fmt::format("{:.2f}", *parts[i]);
    }
  }
  return out;
}

void Table::add_row(std::string label, std::vector<Cell> cells) {
  if (cells.size() != columns.size()) {
    throw DimensionError(fmt::format("table '{}': row '{}' has {} cells for {} columns", name, label, cells.size(),
                                     columns.size()));
  }
  row_labels.push_back(std::move(label));
  rows.push_back(std::move(cells));
}

std::string to_csv(const Table& table) {
  std::string out = "row";
  for (const auto& c : table.columns) out += "," + csv_field(c);
  out += "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out += csv_field(table.row_labels[r]);
    for (const auto& cell : table.rows[r]) out += "," + cell.format();
    out += "\n";
  }
  return out;
}

}  // namespace assist::eval
