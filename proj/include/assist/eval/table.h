#pragma once

#include <optional>
#include <string>
#include <vector>

namespace assist::eval {

/// One table entry: one or more numbers joined by "/", where a missing
/// number prints as "x" (the predicted class was wrong).
struct Cell {
  std::vector<std::optional<double>> parts;
  /// Accuracies print as percentages with one decimal ("98.1/81.2").
  bool percent = false;

  static Cell value(double v) { return {{v}}; }
  static Cell miss() { return {{std::nullopt}}; }
  static Cell pair(double a, double b) { return {{a, b}}; }
  static Cell percent_value(double v) { return {{v}, true}; }
  static Cell percent_pair(double a, double b) { return {{a, b}, true}; }

  /// Two fraction digits per number, or a percentage with one decimal.
  std::string format() const;
  bool operator==(const Cell&) const = default;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;
  std::vector<std::vector<Cell>> rows;

  /// DimensionError unless `cells` has one entry per column.
  void add_row(std::string label, std::vector<Cell> cells);
  const Cell& at(std::size_t row, std::size_t col) const { return rows.at(row).at(col); }
  bool operator==(const Table&) const = default;
};

/// Header "row,<columns...>", then one line per row. Fields containing
/// commas or quotes are quoted.
std::string to_csv(const Table& table);

}  // namespace assist::eval
