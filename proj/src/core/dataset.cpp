#include "assist/core/dataset.h"

#include <fstream>

#include <fmt/format.h>
#include <json.hpp>

#include "assist/core/errors.h"
#include "assist/core/io.h"

namespace assist::core {

LabeledDataset::LabeledDataset(int num_classes) : num_classes_(num_classes) {
  if (num_classes <= 0) throw DomainError("num_classes must be positive");
}

void LabeledDataset::add(Image image, int label) {
  if (label < 0 || label >= num_classes_) {
    throw IndexError(fmt::format("label {} outside [0, {})", label, num_classes_));
  }
  items_.push_back({std::move(image), label});
}

LabeledDataset LabeledDataset::filter_label(int label) const {
  LabeledDataset out(num_classes_);
  for (const auto& item : items_) {
    if (item.label == label) out.add(item.image, item.label);
  }
  return out;
}

LabeledDataset LabeledDataset::head(std::size_t count) const {
  LabeledDataset out(num_classes_);
  for (std::size_t i = 0; i < items_.size() && i < count; ++i) out.add(items_[i].image, items_[i].label);
  return out;
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json index;
  index["num_classes"] = dataset.num_classes();
  index["items"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const std::string file = fmt::format("{:06d}.png", i);
    save_png(dataset[i].image, dir / file);
    index["items"].push_back({{"file", file}, {"label", dataset[i].label}});
  }
  write_text_file(dir / "dataset.json", index.dump(2) + "\n");
}

LabeledDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "dataset.json");
  if (!in) throw IoError(fmt::format("missing '{}'", (dir / "dataset.json").string()));
  nlohmann::json index;
  try {
    index = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("dataset.json: {}", e.what()));
  }
  if (!index.contains("num_classes") || !index["num_classes"].is_number_integer()) {
    throw FormatError("dataset.json: field 'num_classes' missing or not an integer");
  }
  if (!index.contains("items") || !index["items"].is_array()) {
    throw FormatError("dataset.json: field 'items' missing or not an array");
  }
  LabeledDataset out(index["num_classes"].get<int>());
  for (std::size_t i = 0; i < index["items"].size(); ++i) {
    const auto& item = index["items"][i];
    if (!item.contains("file") || !item["file"].is_string() || !item.contains("label") ||
        !item["label"].is_number_integer()) {
      throw FormatError(fmt::format("dataset.json: items[{}] needs string 'file' and integer 'label'", i));
    }
    out.add(load_png(dir / item["file"].get<std::string>()), item["label"].get<int>());
  }
  return out;
}

}  // namespace assist::core
