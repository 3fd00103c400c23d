#include "assist/eval/metrics.h"

#include <algorithm>

#include <fmt/format.h>

#include "assist/core/errors.h"
#include "assist/renderer/render.h"
#include "assist/signals2d/attacks.h"

namespace assist::eval {

AccuracyResult evaluate_accuracy(const Classifier& c, const LabeledDataset& data) {
  if (data.empty()) throw DomainError("evaluate_accuracy: empty dataset");
  std::size_t correct = 0;
  double confidence = 0.0;
  for (const auto& item : data) {
    const auto probs = c.predict(item.image);
    correct += core::argmax_label(probs) == item.label ? 1 : 0;
    confidence += probs[static_cast<std::size_t>(item.label)];
  }
  const double n = static_cast<double>(data.size());
  return {static_cast<double>(correct) / n, confidence / n};
}

void validate(const AttackSpec& spec) {
  if (spec.epsilons.empty()) throw ConfigError("attack needs at least one epsilon");
  for (std::size_t i = 0; i < spec.epsilons.size(); ++i) {
    if (!(spec.epsilons[i] >= 0.0)) throw ConfigError("attack epsilons must be >= 0");
    if (i && spec.epsilons[i] < spec.epsilons[i - 1]) throw ConfigError("attack epsilons must be sorted ascending");
  }
  if (spec.kind == AttackKind::pgd) {
    if (spec.steps < 1) throw ConfigError("pgd needs at least one step");
    if (spec.step_size && !(*spec.step_size > 0.0)) throw ConfigError("pgd step size must be positive");
  }
}

double attacked_accuracy(const Classifier& c, const LabeledDataset& data, const AttackSpec& spec, double epsilon) {
  if (data.empty()) throw DomainError("attacked_accuracy: empty dataset");
  std::size_t correct = 0;
  for (const auto& item : data) {
    const core::Image adv =
        spec.kind == AttackKind::fgsm
            ? signals2d::fgsm_attack(c, item.image, item.label, epsilon)
            : signals2d::pgd_attack(c, item.image, item.label, epsilon, spec.step_size.value_or(epsilon / 10.0),
                                    spec.steps);
    correct += core::argmax_label(c.predict(adv)) == item.label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<std::string> robustness_columns(const std::vector<AttackSpec>& attacks) {
  std::vector<std::string> cols{"clean"};
  for (const auto& a : attacks) {
    for (double eps : a.epsilons) cols.push_back(fmt::format("{}@{:g}", a.kind == AttackKind::fgsm ? "fgsm" : "pgd", eps));
  }
  return cols;
}

namespace {

std::vector<double> robustness_row(const Classifier& c, const LabeledDataset& data,
                                   const std::vector<AttackSpec>& attacks) {
  std::vector<double> row{evaluate_accuracy(c, data).accuracy};
  for (const auto& a : attacks) {
    validate(a);
    for (double eps : a.epsilons) {
      try {
        row.push_back(attacked_accuracy(c, data, a, eps));
      } catch (const Error&) {
        rethrow_with_context(fmt::format("cell {}@{:g}", a.kind == AttackKind::fgsm ? "fgsm" : "pgd", eps));
      }
    }
  }
  return row;
}

}  // namespace

Table robustness_table(const Classifier& c, const LabeledDataset& data, const std::vector<AttackSpec>& attacks,
                       const std::string& row) {
  Table t{"robustness", robustness_columns(attacks), {}, {}};
  std::vector<Cell> cells;
  for (double v : robustness_row(c, data, attacks)) cells.push_back(Cell::percent_value(v));
  t.add_row(row, std::move(cells));
  return t;
}

Table robustness_table_paired(const Classifier& c, const LabeledDataset& hardened, const LabeledDataset& original,
                              const std::vector<AttackSpec>& attacks) {
  Table t{"robustness", robustness_columns(attacks), {}, {}};
  const auto a = robustness_row(c, hardened, attacks);
  const auto b = robustness_row(c, original, attacks);
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < a.size(); ++i) cells.push_back(Cell::percent_pair(a[i], b[i]));
  t.add_row(c.identity(), std::move(cells));
  return t;
}

std::vector<ViewResult> multiview_confidence(const Classifier& c, const renderer::Scene& scene,
                                             const renderer::Texture& texture,
                                             const std::vector<renderer::View>& views, int true_label) {
  if (views.empty()) throw DomainError("multiview_confidence needs at least one view");
  if (true_label < 0 || true_label >= c.num_classes()) {
    throw IndexError(fmt::format("true label {} outside [0, {})", true_label, c.num_classes()));
  }
  renderer::Scene s = renderer::with_views(scene, views);
  s.texture = texture;
  const auto batch = renderer::render_batch(s);
  std::vector<ViewResult> out;
  for (const auto& image : batch.images) {
    const auto probs = c.predict(image);
    ViewResult r;
    r.predicted = core::argmax_label(probs);
    r.confidence = probs[static_cast<std::size_t>(true_label)];
    r.correct = r.predicted == true_label;
    out.push_back(r);
  }
  return out;
}

Table multiview_table(const std::string& name,
                      const std::vector<std::pair<std::string, std::vector<ViewResult>>>& rows) {
  Table t{name, {}, {}, {}};
  if (!rows.empty()) {
    for (std::size_t v = 0; v < rows.front().second.size(); ++v) t.columns.push_back(fmt::format("view {}", v + 1));
  }
  for (const auto& [label, results] : rows) {
    std::vector<Cell> cells;
    for (const auto& r : results) cells.push_back(r.cell());
    t.add_row(label, std::move(cells));
  }
  return t;
}

TransferResult transfer_matrix(const std::vector<NamedClassifier>& models,
                               const std::map<std::string, renderer::Texture>& textures,
                               const renderer::Scene& scene, const std::vector<renderer::View>& views,
                               int true_label) {
  if (models.empty()) throw DomainError("transfer_matrix needs at least one model");
  TransferResult out;
  out.table.name = "transfer";
  for (const auto& m : models) out.table.columns.push_back(m.name);
  double diag = 0.0, off = 0.0;
  std::size_t n_diag = 0, n_off = 0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto it = textures.find(models[i].name);
    if (it == textures.end()) throw ConfigError(fmt::format("no texture for model '{}'", models[i].name));
    std::vector<Cell> cells;
    out.cells.emplace_back();
    for (std::size_t j = 0; j < models.size(); ++j) {
      const auto results = multiview_confidence(*models[j].model, scene, it->second, views, true_label);
      Cell cell;
      for (const auto& r : results) {
        cell.parts.push_back(r.correct ? std::optional<double>(r.confidence) : std::nullopt);
        (i == j ? diag : off) += r.confidence;
        (i == j ? n_diag : n_off) += 1;
      }
      cells.push_back(std::move(cell));
      out.cells.back().push_back(results);
    }
    out.table.add_row(models[i].name, std::move(cells));
  }
  out.mean_diagonal = diag / static_cast<double>(n_diag);
  out.mean_off_diagonal = n_off ? off / static_cast<double>(n_off) : 0.0;
  return out;
}

std::vector<double> SweepAxis::values() const {
  if (steps < 1) throw DomainError("sweep axis needs at least one step");
  if (!(lo <= hi)) throw DomainError(fmt::format("sweep axis is empty ({} > {})", lo, hi));
  std::vector<double> v;
  for (int k = 0; k < steps; ++k) v.push_back(steps == 1 ? lo : lo + (hi - lo) * k / (steps - 1));
  return v;
}

namespace {

using AxisValues = std::array<std::vector<double>, 7>;

std::array<const SweepAxis*, 7> axes(const SweepRanges& r) {
  return {&r.azimuth_deg, &r.elevation_deg, &r.distance, &r.light_cone_deg, &r.light_roll_deg, &r.ambient, &r.diffuse};
}

AxisValues axis_values(const SweepRanges& r) {
  AxisValues v;
  const auto ax = axes(r);
  for (std::size_t k = 0; k < 7; ++k) v[k] = ax[k]->values();
  return v;
}

// Row-major decode, last axis fastest.
std::array<double, 7> decode(const AxisValues& values, std::size_t cell) {
  std::array<double, 7> v{};
  for (std::size_t k = 7; k-- > 0;) {
    v[k] = values[k][cell % values[k].size()];
    cell /= values[k].size();
  }
  return v;
}

}  // namespace

std::size_t sweep_cell_count(const SweepRanges& ranges) {
  std::size_t n = 1;
  for (const auto* a : axes(ranges)) {
    a->values();
    n *= static_cast<std::size_t>(a->steps);
  }
  return n;
}

std::vector<renderer::View> sweep_views(const SweepRanges& ranges) {
  const std::size_t count = sweep_cell_count(ranges);
  if (count > ranges.cell_cap) {
    throw ResourceError(fmt::format("sweep grid has {} cells, cap is {}", count, ranges.cell_cap));
  }
  const AxisValues values = axis_values(ranges);
  std::vector<renderer::View> views;
  views.reserve(count);
  for (std::size_t cell = 0; cell < count; ++cell) {
    const auto v = decode(values, cell);
    renderer::View view;
    view.camera.azimuth_deg = v[0];
    view.camera.elevation_deg = v[1];
    view.camera.distance = v[2];
    view.camera.fov_y_deg = ranges.fov_y_deg;
    view.light = renderer::light_relative_to(view.camera, v[3], v[4], v[5], v[6]);
    views.push_back(view);
  }
  return views;
}

std::size_t SweepGrid::misclassified() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return !c.result.correct; }));
}

std::string SweepGrid::to_csv() const {
  std::string out = "azimuth,elevation,distance,light_cone,light_roll,ambient,diffuse,predicted,confidence\n";
  const AxisValues values = axis_values(ranges);
  for (std::size_t cell = 0; cell < cells.size(); ++cell) {
    const auto v = decode(values, cell);
    const auto& r = cells[cell].result;
    out += fmt::format("{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{:.2f},{},{}\n", v[0], v[1], v[2], v[3], v[4], v[5],
                       v[6], r.predicted, r.cell().format());
  }
  return out;
}

SweepGrid scene_sweep(const Classifier& c, const renderer::Scene& scene, const renderer::Texture& texture,
                      const SweepRanges& ranges, int true_label) {
  const auto views = sweep_views(ranges);
  SweepGrid grid{ranges, {}};
  constexpr std::size_t kChunk = 32;
  for (std::size_t start = 0; start < views.size(); start += kChunk) {
    const std::vector<renderer::View> chunk(views.begin() + static_cast<std::ptrdiff_t>(start),
                                            views.begin() + static_cast<std::ptrdiff_t>(std::min(views.size(), start + kChunk)));
    const auto results = multiview_confidence(c, scene, texture, chunk, true_label);
    for (std::size_t k = 0; k < chunk.size(); ++k) grid.cells.push_back({chunk[k], results[k]});
  }
  return grid;
}

}  // namespace assist::eval
