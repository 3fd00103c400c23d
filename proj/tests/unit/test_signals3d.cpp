#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "assist/classifiers/oracles.h"
#include "assist/core/errors.h"
#include "assist/core/io.h"
#include "assist/eval/desk_world.h"
#include "assist/renderer/mesh_io.h"
#include "assist/renderer/primitives.h"
#include "assist/signals3d/texture_opt.h"
#include "common.h"

using namespace assist;
using namespace assist::signals3d;
using classifiers::MeanRedProbe;
using core::Rng;
using renderer::Texture;

namespace {

constexpr core::Shape kSize{24, 24};

// Red background and ambient-only light: the probe's confidence is the mean
// red over the image, maximized by an all-red texture.
Scene probe_scene(Texture texture) {
  Scene s;
  s.mesh = eval::desk_mesh("car");
  s.texture = std::move(texture);
  s.image_size = kSize;
  s.background = {1.0, 0.0, 0.0};
  return s;
}

EotConfig probe_eot(int views = 4) {
  EotConfig e;
  e.ranges.ambient = {1.0, 1.0};
  e.ranges.diffuse = {0.0, 0.0};
  e.ranges.distance = {2.0, 2.4};
  e.views_per_step = views;
  return e;
}

core::OptimConfig steps(double alpha, int iterations, std::uint64_t seed = 1) {
  core::OptimConfig cfg;
  cfg.step_size = alpha;
  cfg.iterations = iterations;
  cfg.seed = seed;
  return cfg;
}

std::vector<renderer::View> held_out(int count, std::uint64_t seed) {
  Rng rng(seed);
  return renderer::sample_scene_params(rng, probe_eot().ranges, count);
}

const MeanRedProbe& probe() {
  static const MeanRedProbe p(kSize, 1);
  return p;
}

}  // namespace

TEST_SUITE("signals3d") {

TEST_CASE("gray vertex initialization") {
  const auto mesh = eval::desk_mesh("boat");
  const Texture t = init_texture_gray(*mesh);
  CHECK(t.kind() == renderer::TextureKind::vertex);
  CHECK(t.slots() == mesh->vertex_count());
  for (double v : t.values()) CHECK(v == 0.5);
  Scene s;
  s.mesh = mesh;
  s.texture = t;
  s.image_size = kSize;
  s.cameras = {renderer::Camera{2.5, 30.0, 20.0, 40.0}};
  s.lights = {renderer::Light{renderer::Vec3(0, 0, -1), 1.0, 0.0}};
  const auto b = renderer::render_batch(s);
  int covered = 0;
  for (std::size_t p = 0; p < kSize.pixels(); ++p) {
    if (!b.jacobians[0].covered(p)) continue;
    ++covered;
    for (int ch = 0; ch < 3; ++ch) CHECK(b.images[0][p * 3 + ch] == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(covered > 0);
}

TEST_CASE("signal modes") {
  CHECK(SignalMode::assistive(3).loss_spec().ascent_sign() == -1.0);
  CHECK(SignalMode::untargeted(3).loss_spec().ascent_sign() == 1.0);
  CHECK(SignalMode::targeted_to(3, 1).loss_spec().target_label == 1);
  CHECK_NOTHROW(validate(SignalMode::assistive(1), 2));
  CHECK_THROWS_AS(validate(SignalMode::assistive(2), 2), IndexError);
  CHECK_THROWS_AS(validate(SignalMode::targeted_to(1, 1), 2), PreconditionError);
  CHECK_THROWS_AS(validate(SignalMode::targeted_to(1, 5), 2), IndexError);
  SignalMode odd = SignalMode::assistive(1);
  odd.target_label = 0;
  CHECK_THROWS_AS(validate(odd, 2), PreconditionError);
}

TEST_CASE("zero iterations return the initialization") {
  const Scene s = probe_scene(Texture::uv(16));
  const auto r = optimize_full_texture(probe(), s, SignalMode::assistive(1), steps(0.1, 0), probe_eot());
  CHECK(r.texture == s.texture);
  CHECK(r.trace.empty());
}

TEST_CASE("linear probe drives the render to red") {
  for (const Texture& start : {Texture::uv(16), init_texture_gray(*eval::desk_mesh("car"))}) {
    const Scene s = probe_scene(start);
    const auto r = optimize_full_texture(probe(), s, SignalMode::assistive(1), steps(0.05, 30), probe_eot());
    REQUIRE(r.trace.size() == 30);
    const auto views = held_out(8, 77);
    const double before = measure(probe(), s, s.texture, views, SignalMode::assistive(1)).mean_confidence;
    const double after = measure(probe(), s, r.texture, views, SignalMode::assistive(1)).mean_confidence;
    MESSAGE("held-out mean red " << before << " -> " << after);
    CHECK(after >= 0.99);
    CHECK(after > before);
  }
}

TEST_CASE("raw-gradient trace is non-decreasing on the probe") {
  const Scene s = probe_scene(Texture::uv(16));
  auto eot = probe_eot();
  eot.fixed_views = true;
  auto cfg = steps(1e-3, 30);
  cfg.use_sign_gradient = false;
  const auto r = optimize_full_texture(probe(), s, SignalMode::assistive(1), cfg, eot);
  for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].mean_confidence >= r.trace[i - 1].mean_confidence);
  CHECK(r.trace.back().mean_confidence > r.trace.front().mean_confidence);
}

TEST_CASE("assistive and targeted deceptive move in opposite directions") {
  const Scene s = probe_scene(Texture::uv(16));
  const auto views = held_out(6, 5);
  const double start = measure(probe(), s, s.texture, views, SignalMode::assistive(1)).mean_confidence;
  const auto up = optimize_full_texture(probe(), s, SignalMode::assistive(1), steps(0.02, 10), probe_eot());
  const auto down = optimize_full_texture(probe(), s, SignalMode::targeted_to(1, 0), steps(0.02, 10), probe_eot());
  const auto away = optimize_full_texture(probe(), s, SignalMode::untargeted(1), steps(0.02, 10), probe_eot());
  CHECK(measure(probe(), s, up.texture, views, SignalMode::assistive(1)).mean_confidence > start);
  CHECK(measure(probe(), s, down.texture, views, SignalMode::assistive(1)).mean_confidence < start);
  CHECK(measure(probe(), s, away.texture, views, SignalMode::assistive(1)).mean_confidence < start);
}

TEST_CASE("all-ones mask equals full optimization") {
  const Scene s = probe_scene(Texture::uv(16));
  const auto full = optimize_full_texture(probe(), s, SignalMode::assistive(1), steps(0.03, 5, 9), probe_eot());
  const auto masked = optimize_masked_texture(probe(), s, TextureMask::all(s.texture), SignalMode::assistive(1),
                                              steps(0.03, 5, 9), probe_eot());
  CHECK(full.texture == masked.texture);
  CHECK(full.trace.size() == masked.trace.size());
}

TEST_CASE("texels outside the mask stay bit-identical") {
  Texture start = Texture::uv(16);
  Rng rng(3);
  for (double& v : start.values()) v = rng.uniform(0.2, 0.8);
  const Scene s = probe_scene(start);
  const TextureMask mask = group_mask(*s.mesh, start, {"body"});
  REQUIRE(mask.active() > 0);
  REQUIRE(mask.active() < start.slots());
  auto cfg = steps(0.01, 50);
  cfg.epsilon = 0.03;
  const auto r = optimize_masked_texture(probe(), s, mask, SignalMode::assistive(1), cfg, probe_eot(2));
  bool moved = false;
  for (std::size_t i = 0; i < start.values().size(); ++i) {
    if (!mask.mask[i / 3]) {
      CHECK(r.texture.values()[i] == start.values()[i]);
    } else {
      CHECK(std::abs(r.texture.values()[i] - start.values()[i]) <= 0.03 + 1e-9);
      moved = moved || r.texture.values()[i] != start.values()[i];
    }
  }
  CHECK(moved);
}

TEST_CASE("masks") {
  const auto car = eval::desk_mesh("car");
  const Texture uv = Texture::uv(64);
  const auto windows = group_mask(*car, uv, {"windows"});
  const auto body = group_mask(*car, uv, {"body"});
  CHECK(windows.active() > 0);
  for (std::size_t i = 0; i < windows.mask.size(); ++i) CHECK(!(windows.mask[i] && body.mask[i]));
  CHECK(windows.inverted().active() == uv.slots() - windows.active());
  CHECK_THROWS_AS(group_mask(*car, uv, {"spoiler"}), ConfigError);

  const Texture vt = init_texture_gray(*car);
  const auto tyres = group_mask(*car, vt, {"tyres"});
  const auto& groups = car->face_groups();
  const int tyre = car->group_ids({"tyres"}).front();
  for (std::size_t f = 0; f < car->face_count(); ++f) {
    if (groups[f] != tyre) continue;
    for (int k : car->faces()[f]) CHECK(tyres.mask[static_cast<std::size_t>(k)] == 1);
  }

  const auto region = region_mask(uv, {2, 3, 4, 5});
  CHECK(region.active() == 20);
  CHECK(region.mask[uv.texel_slot(2, 3)] == 1);
  CHECK(region.mask[uv.texel_slot(6, 3)] == 0);
  CHECK_THROWS_AS(region_mask(uv, {60, 60, 8, 8}), BoundsError);
  CHECK_THROWS_AS(region_mask(vt, {0, 0, 1, 1}), PreconditionError);

  TextureMask empty = TextureMask::all(uv);
  std::fill(empty.mask.begin(), empty.mask.end(), 0);
  CHECK_THROWS_AS(optimize_masked_texture(probe(), probe_scene(uv), empty, SignalMode::assistive(1), steps(0.1, 1),
                                          probe_eot()),
                  PreconditionError);
}

TEST_CASE("patch extraction and insertion") {
  Texture t = Texture::uv(16);
  Rng rng(4);
  for (double& v : t.values()) v = rng.uniform();
  const PatchRegion region{3, 5, 4, 6};
  const Image p = extract_patch(t, region);
  CHECK(p.shape() == core::Shape{4, 6});
  CHECK(p.at(0, 0, 1) == t.at(t.texel_slot(3, 5), 1));
  CHECK(insert_patch(t, p, region) == t);
  const Image one = extract_patch(t, {7, 9, 1, 1});
  for (int ch = 0; ch < 3; ++ch) CHECK(one.at(0, 0, ch) == t.at(t.texel_slot(7, 9), ch));
  CHECK_THROWS_AS(insert_patch(t, one, region), DimensionError);
}

TEST_CASE("3D patch optimization") {
  const Scene s = probe_scene(Texture::uv(16, {0.3, 0.3, 0.3}));
  const PatchRegion region{0, 0, 4, 4};
  const auto zero = optimize_patch_3d(probe(), s, region, SignalMode::assistive(1), steps(0.05, 0, 12), probe_eot());
  CHECK(zero.patch == extract_patch(initial_patch_texture(s.texture, region, 12), region));

  const auto r = optimize_patch_3d(probe(), s, region, SignalMode::assistive(1), steps(0.05, 5, 12), probe_eot());
  const PatchRegion elsewhere{8, 8, 8, 8};
  CHECK(extract_patch(r.texture, elsewhere) == extract_patch(s.texture, elsewhere));
  CHECK(extract_patch(r.texture, region) == r.patch);

  const PatchRegion whole{0, 0, 16, 16};
  const auto patched = optimize_patch_3d(probe(), s, whole, SignalMode::assistive(1), steps(0.05, 5, 12), probe_eot());
  Scene from_init = s;
  from_init.texture = initial_patch_texture(s.texture, whole, 12);
  const auto full = optimize_full_texture(probe(), from_init, SignalMode::assistive(1), steps(0.05, 5, 12), probe_eot());
  CHECK(patched.texture == full.texture);

  Scene vertex = s;
  vertex.texture = init_texture_gray(*s.mesh);
  CHECK_THROWS_AS(optimize_patch_3d(probe(), vertex, region, SignalMode::assistive(1), steps(0.05, 1), probe_eot()),
                  PreconditionError);
}

TEST_CASE("errors carry the iteration") {
  Scene s = probe_scene(Texture::uv(16));
  auto eot = probe_eot();
  eot.ranges.distance = {0.0, 0.0};
  try {
    optimize_full_texture(probe(), s, SignalMode::assistive(1), steps(0.05, 2), eot);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).size() > 0);
  }
  const MeanRedProbe wrong({8, 8}, 1);
  try {
    optimize_full_texture(wrong, s, SignalMode::assistive(1), steps(0.05, 2), probe_eot());
    FAIL("expected an error");
  } catch (const DimensionError& e) {
    CHECK(std::string(e.what()).find("iteration 0") != std::string::npos);
  }
}

TEST_CASE("trace format and texture files") {
  const std::string csv = format_trace({{0, 1.5, 0.25}, {1, 1.25, 0.5}});
  CHECK(csv == "iteration,loss,mean_confidence\n0,1.500000000,0.250000000\n1,1.250000000,0.500000000\n");
  testing::TempDir dir("tex");
  const auto car = eval::desk_mesh("car");
  save_texture(Texture::uv(8, {0.2, 0.4, 0.6}), *car, dir / "t.png");
  CHECK(Texture::from_image(core::load_png(dir / "t.png")).resolution() == 8);
  save_texture(init_texture_gray(*car), *car, dir / "t.ply");
  const auto ply = renderer::load_ply(dir / "t.ply");
  REQUIRE(ply.colors);
  CHECK(ply.colors->slots() == car->vertex_count());
}

}  // TEST_SUITE
