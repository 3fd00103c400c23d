#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "assist/classifiers/classifier.h"
#include "assist/core/dataset.h"
#include "assist/eval/table.h"
#include "assist/renderer/scene.h"

namespace assist::eval {

using classifiers::Classifier;
using core::LabeledDataset;

struct AccuracyResult {
  double accuracy = 0.0;
  double mean_confidence = 0.0;  // of the true class
};

AccuracyResult evaluate_accuracy(const Classifier& c, const LabeledDataset& data);

enum class AttackKind { fgsm, pgd };

/// PGD defaults to 40 steps of epsilon / 10.
struct AttackSpec {
  AttackKind kind = AttackKind::fgsm;
  std::vector<double> epsilons;
  std::optional<double> step_size;
  int steps = 40;
};

void validate(const AttackSpec& spec);

/// Accuracy under the attack at one budget.
double attacked_accuracy(const Classifier& c, const LabeledDataset& data, const AttackSpec& spec, double epsilon);

/// Column names: "clean", then "<kind>@<eps>" per attack and budget.
std::vector<std::string> robustness_columns(const std::vector<AttackSpec>& attacks);

/// One row of accuracies named `row`.
Table robustness_table(const Classifier& c, const LabeledDataset& data, const std::vector<AttackSpec>& attacks,
                       const std::string& row = "accuracy");

/// Single row of "hardened/original" accuracy pairs.
Table robustness_table_paired(const Classifier& c, const LabeledDataset& hardened, const LabeledDataset& original,
                              const std::vector<AttackSpec>& attacks);

struct ViewResult {
  int predicted = 0;
  double confidence = 0.0;  // of the true class, even when predicted is wrong
  bool correct = false;

  /// The confidence, or "x" when the prediction is wrong.
  Cell cell() const { return correct ? Cell::value(confidence) : Cell::miss(); }
};

/// Renders `texture` on the scene mesh from each view and classifies it.
std::vector<ViewResult> multiview_confidence(const Classifier& c, const renderer::Scene& scene,
                                             const renderer::Texture& texture,
                                             const std::vector<renderer::View>& views, int true_label);

/// Columns "view 1", "view 2", ...; one row per labelled result list.
Table multiview_table(const std::string& name,
                      const std::vector<std::pair<std::string, std::vector<ViewResult>>>& rows);

struct NamedClassifier {
  std::string name;
  classifiers::ClassifierPtr model;
};

struct TransferResult {
  Table table;
  /// Mean true-class confidence over all views in diagonal (train = eval)
  /// and off-diagonal cells; wrong predictions still count their value.
  double mean_diagonal = 0.0;
  double mean_off_diagonal = 0.0;
  std::vector<std::vector<std::vector<ViewResult>>> cells;  // [train][eval][view]
};

/// Rows are the model each texture was optimized on, columns the model it is
/// evaluated on. A model without a texture is a ConfigError.
TransferResult transfer_matrix(const std::vector<NamedClassifier>& models,
                               const std::map<std::string, renderer::Texture>& textures,
                               const renderer::Scene& scene, const std::vector<renderer::View>& views, int true_label);

/// Evenly spaced values from lo to hi inclusive; a single step yields lo.
struct SweepAxis {
  double lo = 0.0;
  double hi = 0.0;
  int steps = 1;

  std::vector<double> values() const;
};

struct SweepRanges {
  SweepAxis azimuth_deg{0.0, 288.0, 5};
  SweepAxis elevation_deg{0.0, 40.0, 5};
  SweepAxis distance{2.4, 2.4, 1};
  SweepAxis light_cone_deg{0.0, 60.0, 3};
  SweepAxis light_roll_deg{0.0, 0.0, 1};
  SweepAxis ambient{0.4, 0.4, 1};
  SweepAxis diffuse{0.6, 0.6, 1};
  double fov_y_deg = 40.0;
  std::size_t cell_cap = 10000;
};

std::size_t sweep_cell_count(const SweepRanges& ranges);
/// Cells in row-major order over (azimuth, elevation, distance, light cone,
/// light roll, ambient, diffuse), the last axis varying fastest.
std::vector<renderer::View> sweep_views(const SweepRanges& ranges);

struct SweepCell {
  renderer::View view;
  ViewResult result;
};

struct SweepGrid {
  SweepRanges ranges;
  std::vector<SweepCell> cells;

  std::size_t misclassified() const;
  /// azimuth, elevation, distance, light_cone, light_roll, ambient, diffuse,
  /// predicted, confidence ("x" when wrong).
  std::string to_csv() const;
};

/// Empty axes are a DomainError; more cells than ranges.cell_cap is a
/// ResourceError raised before anything is rendered.
SweepGrid scene_sweep(const Classifier& c, const renderer::Scene& scene, const renderer::Texture& texture,
                      const SweepRanges& ranges, int true_label);

}  // namespace assist::eval
