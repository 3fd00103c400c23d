#include "assist/cli/config.h"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "assist/core/errors.h"
#include "assist/core/io.h"
#include "assist/eval/desk_world.h"

namespace assist::cli {

using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<std::string>& job_names() {
  static const std::vector<std::string> names = {"train-ref", "harden", "attack-eval", "patch2d", "texture3d",
                                                 "patch3d",   "sweep",  "transfer",    "render"};
  return names;
}

std::string job_name(JobKind kind) { return job_names()[static_cast<std::size_t>(kind)]; }

JobKind parse_job(const std::string& name) {
  const auto& names = job_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<JobKind>(i);
  }
  throw ConfigError(fmt::format("unknown job '{}'", name));
}

namespace {

// Strict view of one JSON object: every key must be consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", label()));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  Reader object(const std::string& key) { return Reader(raw(key), field(key)); }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (has(key)) out = convert<T>(raw(key), field(key));
  }

  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(fmt::format("{}: missing required field", field(key)));
    return convert<T>(raw(key), field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(fmt::format("{}: unknown key", field(it.key())));
    }
  }

  template <typename T>
  static T convert(const json& v, const std::string& where);

 private:
  std::string label() const { return path_.empty() ? "config" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

[[noreturn]] void type_error(const std::string& where, const char* expected) {
  throw ConfigError(fmt::format("{}: expected {}", where, expected));
}

template <>
double Reader::convert<double>(const json& v, const std::string& where) {
  if (!v.is_number()) type_error(where, "a number");
  return v.get<double>();
}

template <>
int Reader::convert<int>(const json& v, const std::string& where) {
  if (!v.is_number_integer()) type_error(where, "an integer");
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) type_error(where, "a 32-bit integer");
  return static_cast<int>(x);
}

template <>
std::uint64_t Reader::convert<std::uint64_t>(const json& v, const std::string& where) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    type_error(where, "a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

template <>
bool Reader::convert<bool>(const json& v, const std::string& where) {
  if (!v.is_boolean()) type_error(where, "true or false");
  return v.get<bool>();
}

template <>
std::string Reader::convert<std::string>(const json& v, const std::string& where) {
  if (!v.is_string()) type_error(where, "a string");
  return v.get<std::string>();
}

template <>
std::vector<double> Reader::convert<std::vector<double>>(const json& v, const std::string& where) {
  if (!v.is_array()) type_error(where, "an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert<double>(v[i], fmt::format("{}[{}]", where, i)));
  return out;
}

template <>
std::vector<std::string> Reader::convert<std::vector<std::string>>(const json& v, const std::string& where) {
  if (!v.is_array()) type_error(where, "an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert<std::string>(v[i], fmt::format("{}[{}]", where, i)));
  return out;
}

std::vector<double> fixed_array(const json& v, const std::string& where, std::size_t n) {
  auto out = Reader::convert<std::vector<double>>(v, where);
  if (out.size() != n) throw ConfigError(fmt::format("{}: expected {} numbers", where, n));
  return out;
}

int parse_label(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return eval::desk_class(v.get<std::string>());
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}: {}", where, e.what()));
    }
  }
  return Reader::convert<int>(v, where);
}

DataSource parse_data(Reader r) {
  DataSource d;
  if (r.has("dir")) d.dir = r.require<std::string>("dir");
  r.get("per_class", d.per_class);
  r.get("seed", d.seed);
  r.finish();
  if (d.per_class < 1) throw ConfigError(fmt::format("{}: must be >= 1", r.field("per_class")));
  return d;
}

renderer::ParamRange parse_range(const json& v, const std::string& where) {
  const auto a = fixed_array(v, where, 2);
  return {a[0], a[1]};
}

renderer::SceneRanges parse_ranges(Reader r, renderer::SceneRanges s) {
  const std::pair<const char*, renderer::ParamRange*> fields[] = {
      {"azimuth", &s.azimuth_deg},       {"elevation", &s.elevation_deg},   {"distance", &s.distance},
      {"fov_y", &s.fov_y_deg},           {"light_cone", &s.light_cone_deg}, {"light_roll", &s.light_roll_deg},
      {"ambient", &s.ambient},           {"diffuse", &s.diffuse}};
  for (const auto& [key, dst] : fields) {
    if (r.has(key)) *dst = parse_range(r.raw(key), r.field(key));
  }
  r.finish();
  return s;
}

ViewParams parse_view(Reader r) {
  ViewParams v;
  r.get("azimuth", v.azimuth);
  r.get("elevation", v.elevation);
  r.get("distance", v.distance);
  r.get("fov_y", v.fov_y);
  r.get("light_cone", v.light_cone);
  r.get("light_roll", v.light_roll);
  r.get("ambient", v.ambient);
  r.get("diffuse", v.diffuse);
  r.finish();
  return v;
}

eval::SweepAxis parse_axis(Reader r) {
  eval::SweepAxis a;
  r.get("lo", a.lo);
  a.hi = a.lo;
  r.get("hi", a.hi);
  r.get("steps", a.steps);
  r.finish();
  return a;
}

eval::AttackSpec parse_attack(Reader r) {
  eval::AttackSpec a;
  const auto kind = r.require<std::string>("kind");
  if (kind == "fgsm") {
    a.kind = eval::AttackKind::fgsm;
  } else if (kind == "pgd") {
    a.kind = eval::AttackKind::pgd;
  } else {
    throw ConfigError(fmt::format("{}: expected \"fgsm\" or \"pgd\"", r.field("kind")));
  }
  a.epsilons = r.require<std::vector<double>>("epsilons");
  if (r.has("step_size")) a.step_size = r.require<double>("step_size");
  r.get("steps", a.steps);
  r.finish();
  try {
    eval::validate(a);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", r.field("epsilons"), e.what()));
  }
  return a;
}

signals2d::PatchTrainConfig parse_patch2d(Reader r) {
  signals2d::PatchTrainConfig p;
  r.get("height", p.patch_height);
  r.get("width", p.patch_width);
  r.get("random_location", p.random_location);
  if (r.has("location")) {
    const auto loc = fixed_array(r.raw("location"), r.field("location"), 2);
    p.fixed_location = {static_cast<int>(loc[0]), static_cast<int>(loc[1])};
  }
  r.get("batch_size", p.batch_size);
  if (r.has("init")) {
    const auto init = r.require<std::string>("init");
    if (init == "random_uniform") {
      p.init = signals2d::PatchInit::random_uniform;
    } else if (init == "gray") {
      p.init = signals2d::PatchInit::gray;
    } else {
      throw ConfigError(fmt::format("{}: expected \"random_uniform\" or \"gray\"", r.field("init")));
    }
  }
  if (r.has("random_erase") && !r.raw("random_erase").is_null()) {
    Reader e = r.object("random_erase");
    signals2d::EraseParams ep;
    e.get("probability", ep.probability);
    if (e.has("area")) {
      const auto a = parse_range(e.raw("area"), e.field("area"));
      ep.area_min = a.lo;
      ep.area_max = a.hi;
    }
    if (e.has("aspect")) {
      const auto a = parse_range(e.raw("aspect"), e.field("aspect"));
      ep.aspect_min = a.lo;
      ep.aspect_max = a.hi;
    }
    if (e.has("fill")) {
      const auto fill = e.require<std::string>("fill");
      if (fill != "random" && fill != "gray") throw ConfigError(fmt::format("{}: expected \"random\" or \"gray\"", e.field("fill")));
      ep.fill = fill == "gray" ? signals2d::EraseFill::gray : signals2d::EraseFill::random;
    }
    e.finish();
    p.random_erase = ep;
  }
  if (r.has("resize_for_eval") && !r.raw("resize_for_eval").is_null()) {
    const auto s = fixed_array(r.raw("resize_for_eval"), r.field("resize_for_eval"), 2);
    p.resize_for_eval = core::Shape{static_cast<int>(s[0]), static_cast<int>(s[1])};
  }
  r.finish();
  return p;
}

ordered_json range_json(const renderer::ParamRange& r) { return {r.lo, r.hi}; }

ordered_json data_json(const std::optional<DataSource>& d) {
  if (!d) return nullptr;
  ordered_json j;
  if (d->dir) {
    j["dir"] = *d->dir;
  } else {
    j["per_class"] = d->per_class;
    j["seed"] = d->seed;
  }
  return j;
}

}  // namespace

renderer::View ViewParams::view() const {
  renderer::Camera cam{distance, azimuth, elevation, fov_y};
  return {cam, renderer::light_relative_to(cam, light_cone, light_roll, ambient, diffuse)};
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  if (r.has("schema_version")) {
    const int v = r.require<int>("schema_version");
    if (v != kConfigSchemaVersion) throw ConfigError(fmt::format("schema_version: unsupported version {}", v));
  }
  c.job = parse_job(r.require<std::string>("job"));
  r.get("seed", c.seed);
  r.get("output_dir", c.output_dir);
  for (const auto& [key, dst] : {std::pair{"train_data", &c.train_data}, std::pair{"test_data", &c.test_data},
                                 std::pair{"data", &c.data}, std::pair{"hardened_data", &c.hardened_data}}) {
    if (r.has(key)) *dst = parse_data(r.object(key));
  }
  r.get("classifiers", c.classifiers);

  if (r.has("scene")) {
    Reader s = r.object("scene");
    s.get("mesh", c.mesh);
    s.get("texture", c.texture);
    s.get("texture_resolution", c.texture_resolution);
    if (s.has("image_size")) {
      const auto v = fixed_array(s.raw("image_size"), s.field("image_size"), 2);
      c.image_size = {static_cast<int>(v[0]), static_cast<int>(v[1])};
    }
    if (s.has("background")) {
      const auto v = fixed_array(s.raw("background"), s.field("background"), 3);
      c.background = {v[0], v[1], v[2]};
    }
    s.finish();
  }
  if (r.has("train")) {
    Reader t = r.object("train");
    t.get("epochs", c.train.epochs);
    t.get("batch_size", c.train.batch_size);
    t.get("learning_rate", c.train.learning_rate);
    t.get("momentum", c.train.momentum);
    t.finish();
  }
  if (r.has("optim")) {
    Reader o = r.object("optim");
    o.get("step_size", c.optim.step_size);
    o.get("iterations", c.optim.iterations);
    if (o.has("epsilon") && !o.raw("epsilon").is_null()) c.optim.epsilon = o.require<double>("epsilon");
    o.get("sign_gradient", c.optim.use_sign_gradient);
    o.finish();
  }
  c.eot.ranges = eval::DeskConfig{}.ranges;
  if (r.has("eot")) {
    Reader e = r.object("eot");
    e.get("views_per_step", c.eot.views_per_step);
    e.get("fixed_views", c.eot.fixed_views);
    if (e.has("ranges")) c.eot.ranges = parse_ranges(e.object("ranges"), c.eot.ranges);
    e.finish();
  }
  if (r.has("signal")) {
    Reader s = r.object("signal");
    if (s.has("direction")) {
      const auto d = s.require<std::string>("direction");
      if (d != "assistive" && d != "deceptive") {
        throw ConfigError(fmt::format("{}: expected \"assistive\" or \"deceptive\"", s.field("direction")));
      }
      c.signal.direction = d == "assistive" ? core::Direction::assistive : core::Direction::deceptive;
    }
    if (s.has("true_label")) c.signal.true_label = parse_label(s.raw("true_label"), s.field("true_label"));
    if (s.has("target_label")) c.signal.target_label = parse_label(s.raw("target_label"), s.field("target_label"));
    s.finish();
  }
  if (r.has("patch2d")) c.patch2d = parse_patch2d(r.object("patch2d"));
  if (r.has("patch3d")) {
    Reader p = r.object("patch3d");
    const auto v = fixed_array(p.raw("region"), p.field("region"), 4);
    c.patch_region = {static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
    p.finish();
  }
  if (r.has("mask")) {
    Reader m = r.object("mask");
    m.get("free_groups", c.mask_groups);
    m.get("frozen_groups", c.frozen_groups);
    m.finish();
  }
  if (r.has("attacks")) {
    const json& a = r.raw("attacks");
    if (!a.is_array()) type_error("attacks", "an array");
    for (std::size_t i = 0; i < a.size(); ++i) c.attacks.push_back(parse_attack(Reader(a[i], fmt::format("attacks[{}]", i))));
  }
  if (r.has("views")) {
    const json& v = r.raw("views");
    if (v.is_array()) {
      if (v.empty()) throw ConfigError("views: needs at least one view");
      for (std::size_t i = 0; i < v.size(); ++i) c.views.list.push_back(parse_view(Reader(v[i], fmt::format("views[{}]", i))));
    } else {
      Reader vr(v, "views");
      vr.get("count", c.views.count);
      vr.get("seed", c.views.seed);
      vr.finish();
      if (c.views.count < 1) throw ConfigError("views.count: must be >= 1");
    }
  }
  if (r.has("sweep")) {
    Reader s = r.object("sweep");
    const std::pair<const char*, eval::SweepAxis*> axes[] = {
        {"azimuth", &c.sweep.azimuth_deg},      {"elevation", &c.sweep.elevation_deg},
        {"distance", &c.sweep.distance},        {"light_cone", &c.sweep.light_cone_deg},
        {"light_roll", &c.sweep.light_roll_deg}, {"ambient", &c.sweep.ambient},
        {"diffuse", &c.sweep.diffuse}};
    for (const auto& [key, dst] : axes) {
      if (s.has(key)) *dst = parse_axis(s.object(key));
    }
    s.get("fov_y", c.sweep.fov_y_deg);
    if (s.has("cell_cap")) c.sweep.cell_cap = s.require<std::uint64_t>("cell_cap");
    s.finish();
  }
  r.finish();

  c.patch2d.direction = c.signal.direction;
  set_seed(c, c.seed);
  try {
    core::validate(c.optim);
    signals3d::validate(c.eot);
  } catch (const Error& e) {
    throw ConfigError(fmt::format("{}", e.what()));
  }
  return c;
}

json read_config_json(const std::string& path) {
  const auto bytes = core::read_file_bytes(path);
  try {
    return json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: not valid JSON ({})", path, e.what()));
  }
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_config_json(path)); }

void set_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.optim.seed = seed;
  cfg.train.seed = seed;
}

ordered_json to_json(const ExperimentConfig& c) {
  ordered_json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["job"] = job_name(c.job);
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["train_data"] = data_json(c.train_data);
  j["test_data"] = data_json(c.test_data);
  j["data"] = data_json(c.data);
  j["hardened_data"] = data_json(c.hardened_data);
  for (const char* key : {"train_data", "test_data", "data", "hardened_data"}) {
    if (j[key].is_null()) j.erase(key);
  }
  j["classifiers"] = c.classifiers;
  j["scene"] = {{"mesh", c.mesh},
                {"texture", c.texture},
                {"texture_resolution", c.texture_resolution},
                {"image_size", {c.image_size.height, c.image_size.width}},
                {"background", c.background}};
  j["train"] = {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"momentum", c.train.momentum}};
  j["optim"] = {{"step_size", c.optim.step_size},
                {"iterations", c.optim.iterations},
                {"epsilon", c.optim.epsilon ? ordered_json(*c.optim.epsilon) : ordered_json(nullptr)},
                {"sign_gradient", c.optim.use_sign_gradient}};
  const auto& rg = c.eot.ranges;
  j["eot"] = {{"views_per_step", c.eot.views_per_step},
              {"fixed_views", c.eot.fixed_views},
              {"ranges",
               {{"azimuth", range_json(rg.azimuth_deg)},
                {"elevation", range_json(rg.elevation_deg)},
                {"distance", range_json(rg.distance)},
                {"fov_y", range_json(rg.fov_y_deg)},
                {"light_cone", range_json(rg.light_cone_deg)},
                {"light_roll", range_json(rg.light_roll_deg)},
                {"ambient", range_json(rg.ambient)},
                {"diffuse", range_json(rg.diffuse)}}}};
  ordered_json signal = {{"direction", c.signal.direction == core::Direction::assistive ? "assistive" : "deceptive"},
                         {"true_label", c.signal.true_label}};
  if (c.signal.target_label) signal["target_label"] = *c.signal.target_label;
  j["signal"] = signal;
  const auto& p = c.patch2d;
  ordered_json erase = nullptr;
  if (p.random_erase) {
    const auto& e = *p.random_erase;
    erase = {{"probability", e.probability},
             {"area", {e.area_min, e.area_max}},
             {"aspect", {e.aspect_min, e.aspect_max}},
             {"fill", e.fill == signals2d::EraseFill::gray ? "gray" : "random"}};
  }
  j["patch2d"] = {{"height", p.patch_height},
                  {"width", p.patch_width},
                  {"random_location", p.random_location},
                  {"location", {p.fixed_location.row, p.fixed_location.col}},
                  {"batch_size", p.batch_size},
                  {"init", p.init == signals2d::PatchInit::gray ? "gray" : "random_uniform"},
                  {"random_erase", erase},
                  {"resize_for_eval", p.resize_for_eval ? ordered_json{p.resize_for_eval->height, p.resize_for_eval->width}
                                                        : ordered_json(nullptr)}};
  j["patch3d"] = {{"region", {c.patch_region.row, c.patch_region.col, c.patch_region.height, c.patch_region.width}}};
  j["mask"] = {{"free_groups", c.mask_groups}, {"frozen_groups", c.frozen_groups}};
  j["attacks"] = ordered_json::array();
  for (const auto& a : c.attacks) {
    ordered_json ja = {{"kind", a.kind == eval::AttackKind::fgsm ? "fgsm" : "pgd"}, {"epsilons", a.epsilons}};
    if (a.step_size) ja["step_size"] = *a.step_size;
    ja["steps"] = a.steps;
    j["attacks"].push_back(ja);
  }
  if (!c.views.list.empty()) {
    j["views"] = ordered_json::array();
    for (const auto& v : c.views.list) {
      j["views"].push_back({{"azimuth", v.azimuth},
                            {"elevation", v.elevation},
                            {"distance", v.distance},
                            {"fov_y", v.fov_y},
                            {"light_cone", v.light_cone},
                            {"light_roll", v.light_roll},
                            {"ambient", v.ambient},
                            {"diffuse", v.diffuse}});
    }
  } else {
    j["views"] = {{"count", c.views.count}, {"seed", c.views.seed}};
  }
  auto axis = [](const eval::SweepAxis& a) { return ordered_json{{"lo", a.lo}, {"hi", a.hi}, {"steps", a.steps}}; };
  const auto& s = c.sweep;
  j["sweep"] = {{"azimuth", axis(s.azimuth_deg)},     {"elevation", axis(s.elevation_deg)},
                {"distance", axis(s.distance)},       {"light_cone", axis(s.light_cone_deg)},
                {"light_roll", axis(s.light_roll_deg)}, {"ambient", axis(s.ambient)},
                {"diffuse", axis(s.diffuse)},         {"fov_y", s.fov_y_deg},
                {"cell_cap", s.cell_cap}};
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) { return core::sha256_hex(to_json(cfg).dump()); }

void make_deceptive(ExperimentConfig& cfg) {
  cfg.signal.direction = core::Direction::deceptive;
  cfg.patch2d.direction = core::Direction::deceptive;
}

signals3d::SignalMode signal_mode(const ExperimentConfig& cfg) {
  const int t = cfg.signal.true_label;
  if (cfg.signal.direction == core::Direction::assistive) {
    if (cfg.signal.target_label && *cfg.signal.target_label != t) {
      throw ConfigError("signal.target_label: assistive signals must target the true class");
    }
    return signals3d::SignalMode::assistive(t);
  }
  if (cfg.signal.target_label && *cfg.signal.target_label != t) {
    return signals3d::SignalMode::targeted_to(t, *cfg.signal.target_label);
  }
  return signals3d::SignalMode::untargeted(t);
}

}  // namespace assist::cli
