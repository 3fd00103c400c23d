#include "assist/cli/runner.h"

#include <chrono>
#include <ctime>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "assist/classifiers/checkpoint.h"
#include "assist/classifiers/oracles.h"
#include "assist/core/errors.h"
#include "assist/core/io.h"
#include "assist/eval/desk_world.h"
#include "assist/renderer/mesh_io.h"
#include "assist/renderer/render.h"
#include "assist/signals2d/attacks.h"

namespace assist::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::string_view kBuiltin = "builtin:";

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y%m%dT%H%M%SZ}", fmt::gmtime(t));
}

// Runs `f`, prefixing any toolkit error with the module name.
template <typename F>
auto in_module(const char* module, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error&) {
    rethrow_with_context(module);
  }
}

bool is_builtin(const std::string& s) { return s.rfind(kBuiltin, 0) == 0; }

core::LabeledDataset load_data(const std::optional<DataSource>& src, const char* field, const ExperimentConfig& cfg) {
  if (!src) throw ConfigError(fmt::format("{}: required for job '{}'", field, job_name(cfg.job)));
  if (src->dir) return core::load_dataset(*src->dir);
  eval::DeskConfig desk;
  desk.image_size = cfg.image_size;
  return eval::make_desk_dataset(src->per_class, src->seed, desk);
}

classifiers::ClassifierPtr load_one(const std::string& spec, const ExperimentConfig& cfg) {
  if (is_builtin(spec)) {
    const std::string name = spec.substr(kBuiltin.size());
    if (name == "mean-red-probe") return std::make_shared<classifiers::MeanRedProbe>(cfg.image_size, 1);
    if (name == "linear-softmax") {
      return std::make_shared<classifiers::LinearSoftmaxClassifier>(cfg.image_size, eval::kDeskClasses, cfg.seed);
    }
    throw ConfigError(fmt::format("classifiers: unknown builtin '{}'", name));
  }
  auto model = std::make_shared<classifiers::ReferenceCNN>(classifiers::load_checkpoint(spec));
  return model;
}

std::vector<classifiers::ClassifierPtr> load_models(const ExperimentConfig& cfg) {
  if (cfg.classifiers.empty()) throw ConfigError(fmt::format("classifiers: required for job '{}'", job_name(cfg.job)));
  std::vector<classifiers::ClassifierPtr> out;
  for (const auto& spec : cfg.classifiers) {
    auto c = load_one(spec, cfg);
    if (c->input_shape() != cfg.image_size) {
      throw ConfigError(fmt::format("scene.image_size: {}x{} but classifier '{}' expects {}x{}", cfg.image_size.height,
                                    cfg.image_size.width, spec, c->input_shape().height, c->input_shape().width));
    }
    out.push_back(std::move(c));
  }
  return out;
}

classifiers::ClassifierPtr load_classifier(const ExperimentConfig& cfg) {
  auto models = load_models(cfg);
  if (models.size() == 1) return models.front();
  return std::make_shared<classifiers::Ensemble>(std::move(models));
}

renderer::Scene load_scene(const std::string& mesh_spec, const std::string& texture_spec, const ExperimentConfig& cfg) {
  renderer::Scene scene;
  scene.image_size = cfg.image_size;
  scene.background = cfg.background;
  std::optional<fs::path> diffuse;
  std::optional<renderer::Texture> shipped;
  if (is_builtin(mesh_spec)) {
    scene.mesh = eval::desk_mesh(mesh_spec.substr(kBuiltin.size()));
  } else {
    const fs::path p(mesh_spec);
    if (p.extension() == ".obj") {
      auto loaded = renderer::load_obj(p);
      scene.mesh = std::make_shared<const renderer::Mesh>(std::move(loaded.mesh));
      diffuse = loaded.diffuse_map;
    } else if (p.extension() == ".ply") {
      auto loaded = renderer::load_ply(p);
      scene.mesh = std::make_shared<const renderer::Mesh>(std::move(loaded.mesh));
      shipped = std::move(loaded.colors);
    } else {
      throw FormatError(fmt::format("scene.mesh: '{}' is neither .obj nor .ply", mesh_spec));
    }
  }
  const renderer::Mesh& mesh = *scene.mesh;
  if (texture_spec == "gray") {
    scene.texture = mesh.has_uv() ? renderer::Texture::uv(cfg.texture_resolution, {0.5, 0.5, 0.5})
                                  : signals3d::init_texture_gray(mesh);
  } else if (texture_spec == "mesh") {
    if (diffuse) {
      scene.texture = renderer::Texture::from_image(core::load_png(*diffuse));
    } else if (shipped) {
      scene.texture = *shipped;
    } else {
      throw FormatError(fmt::format("scene.texture: mesh '{}' ships no texture", mesh_spec));
    }
  } else if (texture_spec.rfind("desk:", 0) == 0) {
    core::Rng rng = core::Rng(cfg.seed).split("desk-texture");
    scene.texture = eval::desk_texture(eval::desk_class(texture_spec.substr(5)), rng, cfg.texture_resolution);
  } else {
    const fs::path p(texture_spec);
    if (p.extension() == ".png") {
      scene.texture = renderer::Texture::from_image(core::load_png(p));
    } else if (p.extension() == ".ply") {
      auto loaded = renderer::load_ply(p);
      if (!loaded.colors) throw FormatError(fmt::format("scene.texture: '{}' has no vertex colors", texture_spec));
      scene.texture = *loaded.colors;
    } else {
      throw FormatError(fmt::format("scene.texture: cannot read '{}'", texture_spec));
    }
  }
  scene.texture.check_binding(mesh);
  return scene;
}

std::vector<renderer::View> held_out_views(const ExperimentConfig& cfg) {
  std::vector<renderer::View> views;
  if (!cfg.views.list.empty()) {
    for (const auto& v : cfg.views.list) views.push_back(v.view());
    return views;
  }
  core::Rng rng = core::Rng(cfg.views.seed).split("held-out-views");
  return renderer::sample_scene_params(rng, cfg.eot.ranges, cfg.views.count);
}

std::string texture_file(const renderer::Texture& t, const std::string& stem) {
  return stem + (t.kind() == renderer::TextureKind::uv ? ".png" : ".ply");
}

signals3d::TextureMask build_mask(const renderer::Scene& scene, const ExperimentConfig& cfg) {
  auto mask = cfg.mask_groups.empty() ? signals3d::TextureMask::all(scene.texture)
                                      : signals3d::group_mask(*scene.mesh, scene.texture, cfg.mask_groups);
  if (!cfg.frozen_groups.empty()) {
    const auto frozen = signals3d::group_mask(*scene.mesh, scene.texture, cfg.frozen_groups);
    for (std::size_t i = 0; i < mask.mask.size(); ++i) {
      if (frozen.mask[i]) mask.mask[i] = 0;
    }
  }
  return mask;
}

void save_views(const renderer::Scene& scene, const renderer::Texture& texture, const std::vector<renderer::View>& views,
                const fs::path& dir, const std::string& prefix) {
  renderer::Scene s = renderer::with_views(scene, views);
  s.texture = texture;
  const auto batch = renderer::render_batch(s);
  for (std::size_t v = 0; v < batch.images.size(); ++v) {
    core::save_png(batch.images[v], dir / fmt::format("{}_{:02d}.png", prefix, v + 1));
  }
}

ordered_json trace_summary(const std::vector<signals3d::TraceEntry>& trace) {
  if (trace.empty()) return nullptr;
  return {{"iterations", trace.size()},
          {"first_loss", trace.front().loss},
          {"first_confidence", trace.front().mean_confidence},
          {"last_loss", trace.back().loss},
          {"last_confidence", trace.back().mean_confidence}};
}

double mean_confidence(const std::vector<eval::ViewResult>& r) {
  double s = 0.0;
  for (const auto& v : r) s += v.confidence;
  return s / static_cast<double>(r.size());
}

// Each job fills `report` and writes its artifacts into `dir`.
void job_train_ref(const ExperimentConfig& cfg, const fs::path& dir, eval::EvalReport& report) {
  const auto train = in_module("core", [&] { return load_data(cfg.train_data, "train_data", cfg); });
  std::optional<core::LabeledDataset> test;
  if (cfg.test_data) test = in_module("core", [&] { return load_data(cfg.test_data, "test_data", cfg); });
  const auto result =
      in_module("classifiers", [&] { return classifiers::train_reference(train, cfg.train, test ? &*test : nullptr); });
  classifiers::save_checkpoint(result.model, dir / "model.ckpt");
  report.metrics["train_accuracy"] = result.train_accuracy;
  report.metrics["final_loss"] = result.final_loss;
  eval::Table t{"accuracy", {"accuracy"}, {}, {}};
  t.add_row("train", {eval::Cell::percent_value(result.train_accuracy)});
  if (result.test_accuracy) {
    report.metrics["test_accuracy"] = *result.test_accuracy;
    t.add_row("test", {eval::Cell::percent_value(*result.test_accuracy)});
  }
  report.tables.push_back(std::move(t));
}

void job_harden(const ExperimentConfig& cfg, const fs::path& dir, eval::EvalReport& report) {
  const auto c = in_module("classifiers", [&] { return load_classifier(cfg); });
  const auto data = in_module("core", [&] { return load_data(cfg.data, "data", cfg); });
  const auto hardened = in_module("signals2d", [&] { return signals2d::harden_dataset(*c, data, cfg.optim); });
  core::save_dataset(hardened.data, dir / "hardened");
  std::string warnings;
  for (const auto& w : hardened.warnings) warnings += w + "\n";
  core::write_text_file(dir / "warnings.txt", warnings);
  const auto before = eval::evaluate_accuracy(*c, data);
  const auto after = eval::evaluate_accuracy(*c, hardened.data);
  eval::Table t{"hardening", {"accuracy", "mean_confidence"}, {}, {}};
  t.add_row("original", {eval::Cell::percent_value(before.accuracy), eval::Cell::value(before.mean_confidence)});
  t.add_row("hardened", {eval::Cell::percent_value(after.accuracy), eval::Cell::value(after.mean_confidence)});
  report.tables.push_back(std::move(t));
  report.metrics["original_accuracy"] = before.accuracy;
  report.metrics["hardened_accuracy"] = after.accuracy;
  report.metrics["warnings"] = hardened.warnings.size();
}

void job_attack_eval(const ExperimentConfig& cfg, const fs::path&, eval::EvalReport& report) {
  if (cfg.attacks.empty()) throw ConfigError("attacks: required for job 'attack-eval'");
  const auto c = in_module("classifiers", [&] { return load_classifier(cfg); });
  const auto data = in_module("core", [&] { return load_data(cfg.data, "data", cfg); });
  if (cfg.hardened_data) {
    const auto hardened = in_module("core", [&] { return load_data(cfg.hardened_data, "hardened_data", cfg); });
    report.tables.push_back(in_module("eval", [&] { return eval::robustness_table_paired(*c, hardened, data, cfg.attacks); }));
  } else {
    report.tables.push_back(in_module("eval", [&] { return eval::robustness_table(*c, data, cfg.attacks); }));
  }
}

void job_patch2d(const ExperimentConfig& cfg, const fs::path& dir, eval::EvalReport& report) {
  const auto c = in_module("classifiers", [&] { return load_classifier(cfg); });
  const auto data = in_module("core", [&] { return load_data(cfg.data, "data", cfg); });
  const int label = cfg.signal.true_label;
  const auto positives = data.filter_label(label);
  if (positives.empty()) throw ConfigError(fmt::format("data: no images of class {}", label));
  const auto patch = in_module("signals2d", [&] { return signals2d::train_patch_2d(*c, positives, label, cfg.patch2d, cfg.optim); });
  signals2d::save_patch(patch, dir / "patch.png", {config_hash(cfg), cfg.seed});
  const double without = signals2d::mean_patched_confidence(*c, positives, nullptr, label, cfg.seed);
  const double with = signals2d::mean_patched_confidence(*c, positives, &patch.pixels, label, cfg.seed);
  eval::Table t{"patch2d", {"no patch", "patch"}, {}, {}};
  std::vector<eval::Cell> cells{eval::Cell::value(without), eval::Cell::value(with)};
  report.metrics["confidence_without_patch"] = without;
  report.metrics["confidence_with_patch"] = with;
  if (cfg.patch2d.resize_for_eval) {
    const auto small = core::resize_bilinear(patch.pixels, *cfg.patch2d.resize_for_eval);
    const double resized = signals2d::mean_patched_confidence(*c, positives, &small, label, cfg.seed);
    t.columns.push_back(fmt::format("patch {}x{}", small.height(), small.width()));
    cells.push_back(eval::Cell::value(resized));
    report.metrics["confidence_with_resized_patch"] = resized;
  }
  t.add_row("mean_confidence", std::move(cells));
  report.tables.push_back(std::move(t));
}

void job_texture3d(const ExperimentConfig& cfg, const fs::path& dir, eval::EvalReport& report, bool patch) {
  const auto c = in_module("classifiers", [&] { return load_classifier(cfg); });
  const auto scene = in_module("renderer", [&] { return load_scene(cfg.mesh, cfg.texture, cfg); });
  const auto mode = signal_mode(cfg);
  const auto views = held_out_views(cfg);
  renderer::Texture result = scene.texture;
  std::vector<signals3d::TraceEntry> trace;
  if (patch) {
    auto r = in_module("signals3d", [&] {
      return signals3d::optimize_patch_3d(*c, scene, cfg.patch_region, mode, cfg.optim, cfg.eot);
    });
    core::save_png(r.patch, dir / "patch.png");
    result = std::move(r.texture);
    trace = std::move(r.trace);
  } else {
    auto r = in_module("signals3d", [&] {
      const auto mask = build_mask(scene, cfg);
      return signals3d::optimize_masked_texture(*c, scene, mask, mode, cfg.optim, cfg.eot);
    });
    result = std::move(r.texture);
    trace = std::move(r.trace);
  }
  signals3d::save_texture(result, *scene.mesh, dir / texture_file(result, "texture"));
  core::write_text_file(dir / "trace.csv", signals3d::format_trace(trace));
  const auto before = in_module("eval", [&] { return eval::multiview_confidence(*c, scene, scene.texture, views, mode.true_label); });
  const auto after = in_module("eval", [&] { return eval::multiview_confidence(*c, scene, result, views, mode.true_label); });
  report.tables.push_back(eval::multiview_table(
      "multiview", {{patch ? "unpatched" : "original", before}, {patch ? "patched" : "optimized", after}}));
  save_views(scene, scene.texture, views, dir / "views", "original");
  save_views(scene, result, views, dir / "views", "optimized");
  report.metrics["trace"] = trace_summary(trace);
  report.metrics["held_out_confidence_before"] = mean_confidence(before);
  report.metrics["held_out_confidence_after"] = mean_confidence(after);
}

void job_sweep(const ExperimentConfig& cfg, const fs::path& dir, eval::EvalReport& report) {
  const auto c = in_module("classifiers", [&] { return load_classifier(cfg); });
  const auto scene = in_module("renderer", [&] { return load_scene(cfg.mesh, cfg.texture, cfg); });
  const auto grid = in_module("eval", [&] { return eval::scene_sweep(*c, scene, scene.texture, cfg.sweep, cfg.signal.true_label); });
  core::write_text_file(dir / "sweep.csv", grid.to_csv());
  report.metrics["cells"] = grid.cells.size();
  report.metrics["misclassified"] = grid.misclassified();
  ordered_json lost = ordered_json::array();
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    if (!grid.cells[i].result.correct) lost.push_back(i);
  }
  report.metrics["misclassified_cells"] = lost;
}

void job_transfer(const ExperimentConfig& cfg, const fs::path& dir, eval::EvalReport& report) {
  const auto models = in_module("classifiers", [&] { return load_models(cfg); });
  if (models.size() < 2) throw ConfigError("classifiers: transfer needs at least two models");
  const auto scene = in_module("renderer", [&] { return load_scene(cfg.mesh, cfg.texture, cfg); });
  const auto mode = signal_mode(cfg);
  const auto views = held_out_views(cfg);
  std::vector<eval::NamedClassifier> named;
  std::map<std::string, renderer::Texture> textures;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string name = fmt::format("model{}", i + 1);
    named.push_back({name, models[i]});
    auto r = in_module("signals3d", [&] { return signals3d::optimize_full_texture(*models[i], scene, mode, cfg.optim, cfg.eot); });
    signals3d::save_texture(r.texture, *scene.mesh, dir / texture_file(r.texture, "texture_" + name));
    core::write_text_file(dir / fmt::format("trace_{}.csv", name), signals3d::format_trace(r.trace));
    textures.emplace(name, std::move(r.texture));
  }
  const auto t = in_module("eval", [&] { return eval::transfer_matrix(named, textures, scene, views, mode.true_label); });
  report.tables.push_back(t.table);
  report.metrics["mean_diagonal"] = t.mean_diagonal;
  report.metrics["mean_off_diagonal"] = t.mean_off_diagonal;
  ordered_json sources = ordered_json::object();
  for (std::size_t i = 0; i < models.size(); ++i) sources[named[i].name] = cfg.classifiers[i];
  report.metrics["models"] = sources;
}

void job_render(const ExperimentConfig& cfg, const fs::path& dir, eval::EvalReport& report) {
  const auto views = held_out_views(cfg);
  const auto files = render_preview(cfg.mesh, cfg.texture, views, dir / "views", cfg);
  report.metrics["views"] = files.size();
}

fs::path fresh_run_dir(const fs::path& root, const std::string& stamp, const std::string& hash) {
  const std::string base = fmt::format("{}-{}", stamp, hash.substr(0, 12));
  fs::path dir = root / base;
  for (int k = 2; fs::exists(dir); ++k) dir = root / fmt::format("{}-{}", base, k);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create run directory '{}': {}", dir.string(), ec.message()));
  return dir;
}

std::vector<ArtifactEntry> manifest(const fs::path& dir) {
  std::vector<ArtifactEntry> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "run_record.json") continue;
    out.push_back({fs::relative(e.path(), dir).generic_string(), core::sha256_file(e.path()), e.file_size()});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return out;
}

}  // namespace

ordered_json to_json(const RunRecord& r) {
  ordered_json j;
  j["tool_version"] = r.tool_version;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["started_at"] = r.started_at;
  j["finished_at"] = r.finished_at;
  j["config"] = r.config;
  j["artifacts"] = ordered_json::array();
  for (const auto& a : r.artifacts) j["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  return j;
}

std::vector<fs::path> write_report(const fs::path& run_dir, const eval::EvalReport& report) {
  if (!fs::is_directory(run_dir)) throw IoError(fmt::format("run directory '{}' does not exist", run_dir.string()));
  std::vector<fs::path> files;
  const fs::path summary = run_dir / "summary.json";
  core::write_text_file(summary, eval::to_json(report).dump(2) + "\n");
  files.push_back(summary);
  for (const auto& t : report.tables) {
    const fs::path p = run_dir / (t.name + ".csv");
    core::write_text_file(p, eval::to_csv(t));
    files.push_back(p);
  }
  return files;
}

std::vector<fs::path> render_preview(const std::string& mesh, const std::string& texture,
                                     const std::vector<renderer::View>& views, const fs::path& out_dir,
                                     const ExperimentConfig& cfg) {
  if (views.empty()) throw DomainError("render_preview needs at least one view");
  const auto scene = in_module("renderer", [&] { return load_scene(mesh, texture, cfg); });
  renderer::Scene s = renderer::with_views(scene, views);
  const auto batch = in_module("renderer", [&] { return renderer::render_batch(s); });
  std::vector<fs::path> files;
  for (std::size_t v = 0; v < batch.images.size(); ++v) {
    files.push_back(out_dir / fmt::format("view_{:02d}.png", v + 1));
    core::save_png(batch.images[v], files.back());
  }
  return files;
}

bool verify_manifest(const RunRecord& record) {
  for (const auto& a : record.artifacts) {
    const fs::path p = record.run_dir / a.path;
    if (!fs::is_regular_file(p) || core::sha256_file(p) != a.sha256) return false;
  }
  return true;
}

RunRecord run_experiment(const ExperimentConfig& cfg) {
  RunRecord record;
  record.config = to_json(cfg);
  record.config_hash = config_hash(cfg);
  record.seed = cfg.seed;
  record.started_at = utc_now();
  record.run_dir = fresh_run_dir(cfg.output_dir, record.started_at, record.config_hash);
  const fs::path& dir = record.run_dir;
  core::write_text_file(dir / "config.json", record.config.dump(2) + "\n");

  eval::EvalReport report;
  report.config_hash = record.config_hash;
  report.seed = cfg.seed;
  switch (cfg.job) {
    case JobKind::train_ref: job_train_ref(cfg, dir, report); break;
    case JobKind::harden: job_harden(cfg, dir, report); break;
    case JobKind::attack_eval: job_attack_eval(cfg, dir, report); break;
    case JobKind::patch2d: job_patch2d(cfg, dir, report); break;
    case JobKind::texture3d: job_texture3d(cfg, dir, report, false); break;
    case JobKind::patch3d: job_texture3d(cfg, dir, report, true); break;
    case JobKind::sweep: job_sweep(cfg, dir, report); break;
    case JobKind::transfer: job_transfer(cfg, dir, report); break;
    case JobKind::render: job_render(cfg, dir, report); break;
  }
  for (const auto& e : manifest(dir)) report.artifacts.push_back(e.path);
  for (const auto& t : report.tables) report.artifacts.push_back(t.name + ".csv");
  std::sort(report.artifacts.begin(), report.artifacts.end());
  write_report(dir, report);

  record.artifacts = manifest(dir);
  record.finished_at = utc_now();
  core::write_text_file(dir / "run_record.json", to_json(record).dump(2) + "\n");
  return record;
}

}  // namespace assist::cli
