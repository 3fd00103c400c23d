#pragma once

#include <filesystem>
#include <vector>

#include "assist/core/image.h"

namespace assist::core {

struct LabeledImage {
  Image image;
  int label = 0;
};

/// Ordered (image, label) collection. Labels always lie in [0, num_classes).
class LabeledDataset {
 public:
  explicit LabeledDataset(int num_classes = 1);

  void add(Image image, int label);

  int num_classes() const { return num_classes_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  const LabeledImage& operator[](std::size_t i) const { return items_[i]; }
  const std::vector<LabeledImage>& items() const { return items_; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  /// Items with the given label, in order.
  LabeledDataset filter_label(int label) const;
  /// First `count` items (or all, if fewer).
  LabeledDataset head(std::size_t count) const;

 private:
  int num_classes_;
  std::vector<LabeledImage> items_;
};

/// Directory layout: dataset.json listing {file, label} entries plus one PNG
/// per item.
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir);
LabeledDataset load_dataset(const std::filesystem::path& dir);

}  // namespace assist::core
