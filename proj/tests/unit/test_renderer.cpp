#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "assist/classifiers/oracles.h"
#include "assist/core/errors.h"
#include "assist/core/io.h"
#include "assist/renderer/mesh_io.h"
#include "assist/renderer/primitives.h"
#include "assist/renderer/render.h"
#include "checks.h"
#include "common.h"

using namespace assist;
using namespace assist::renderer;
using core::Rng;

namespace {

Scene quad_scene(Texture texture, Light light, core::Shape size = {16, 16}) {
  Scene s;
  s.mesh = std::make_shared<const Mesh>(unit_quad());
  s.texture = std::move(texture);
  s.cameras = {Camera{2.0, 0.0, 0.0, 30.0}};
  s.lights = {light};
  s.image_size = size;
  s.background = {0.0, 0.0, 0.0};
  return s;
}

Light ambient_only() { return Light{Vec3(0.0, 0.0, -1.0), 1.0, 0.0}; }

std::size_t covered_count(const RenderedBatch& b) {
  std::size_t n = 0;
  for (std::size_t p = 0; p < b.image_size.pixels(); ++p) n += b.jacobians[0].covered(p) ? 1 : 0;
  return n;
}

}  // namespace

TEST_SUITE("renderer") {

TEST_CASE("mesh validation") {
  const std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  CHECK_NOTHROW(Mesh(v, {{0, 1, 2}}));
  CHECK_THROWS_AS(Mesh(v, {{0, 1, 3}}), GeometryError);
  CHECK_THROWS_AS(Mesh(v, {{0, 1, 1}}), GeometryError);
  CHECK_THROWS_AS(Mesh({}, {}), GeometryError);
  const FaceUV bad{Vec2(0, 0), Vec2(1.5, 0), Vec2(0, 1)};
  CHECK_THROWS_AS(Mesh(v, {{0, 1, 2}}, std::vector<FaceUV>{bad}), GeometryError);
  const Mesh m(v, {{0, 1, 2}});
  CHECK_THROWS_AS(m.uv(), FormatError);
  CHECK_THROWS_AS(m.group_ids({"wheels"}), ConfigError);
}

TEST_CASE("normals are normalized area-weighted averages") {
  const Mesh q = unit_quad();
  for (const auto& n : q.normals()) CHECK((n - Vec3(0, 0, 1)).norm() < 1e-12);
  // Two faces meeting at a right angle, one twice the area of the other.
  const std::vector<Vec3> v{{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const Mesh m(v, {{0, 1, 2}, {0, 3, 1}});
  const Vec3 n0 = m.normals()[0];
  CHECK(std::abs(n0.norm() - 1.0) < 1e-12);
  const Vec3 expected = (Vec3(0, 0, 1) * 1.0 + Vec3(0, 1, 0) * 1.0).normalized();
  CHECK((n0 - expected).norm() < 1e-12);
}

TEST_CASE("textures") {
  CHECK_THROWS_AS(Texture::uv(6), DimensionError);
  CHECK_THROWS_AS(Texture::uv(2), DimensionError);
  CHECK(Texture::uv(8).slots() == 64);
  CHECK_THROWS_AS(Texture::vertex(0), DimensionError);
  CHECK_THROWS_AS(Texture::from_image(core::Image(core::Shape{4, 8})), DimensionError);
  const Mesh q = unit_quad();
  CHECK_THROWS_AS(Texture::vertex(3).check_binding(q), FormatError);
  CHECK_NOTHROW(Texture::vertex(q.vertex_count()).check_binding(q));
  const Mesh plain({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
  CHECK_THROWS_AS(Texture::uv(4).check_binding(plain), FormatError);
  Rng rng(1);
  const auto img = testing::random_image(rng, {8, 8});
  CHECK(Texture::from_image(img).to_image() == img);
  CHECK_THROWS_AS(Texture::vertex(3).to_image(), FormatError);
}

TEST_CASE("bilinear sampling") {
  Texture t = Texture::uv(4);
  Rng rng(2);
  for (double& v : t.values()) v = rng.uniform();
  // Texel (row 1, col 2) has its center at u = 2.5/4, v = 1 - 1.5/4.
  const auto s = sample_bilinear(t, 2.5 / 4.0, 1.0 - 1.5 / 4.0);
  REQUIRE(s.taps.size() == 1);
  CHECK(s.taps[0].slot == t.texel_slot(1, 2));
  CHECK(s.taps[0].weight == doctest::Approx(1.0));
  for (int ch = 0; ch < 3; ++ch) CHECK(s.rgb[ch] == doctest::Approx(t.at(t.texel_slot(1, 2), ch)));

  const auto mid = sample_bilinear(t, 2.0 / 4.0, 1.0 - 1.5 / 4.0);
  REQUIRE(mid.taps.size() == 2);
  CHECK(mid.taps[0].weight == doctest::Approx(0.5));
  CHECK(mid.taps[1].weight == doctest::Approx(0.5));
  for (int ch = 0; ch < 3; ++ch) {
    CHECK(mid.rgb[ch] == doctest::Approx(0.5 * (t.at(t.texel_slot(1, 1), ch) + t.at(t.texel_slot(1, 2), ch))));
  }

  const Texture flat = Texture::uv(8, {0.1, 0.2, 0.3});
  for (int i = 0; i < 100; ++i) {
    const auto f = sample_bilinear(flat, rng.uniform(), rng.uniform());
    CHECK(f.rgb[1] == doctest::Approx(0.2));
    double w = 0.0;
    for (const auto& tap : f.taps) w += tap.weight;
    CHECK(w == doctest::Approx(1.0));
  }
  // Corners clamp to the corner texel.
  const auto corner = sample_bilinear(t, 0.0, 1.0);
  REQUIRE(corner.taps.size() == 1);
  CHECK(corner.taps[0].slot == 0);
}

TEST_CASE("ambient-only quad shows the albedo") {
  const Scene s = quad_scene(Texture::uv(4, {0.2, 0.4, 0.8}), ambient_only());
  const auto b = render_batch(s);
  REQUIRE(covered_count(b) > 0);
  const auto& img = b.images[0];
  for (std::size_t p = 0; p < s.image_size.pixels(); ++p) {
    if (!b.jacobians[0].covered(p)) {
      for (int ch = 0; ch < 3; ++ch) CHECK(img[p * 3 + ch] == 0.0);
      continue;
    }
    CHECK(img[p * 3 + 0] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(img[p * 3 + 1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(img[p * 3 + 2] == doctest::Approx(0.8).epsilon(1e-12));
  }
  const auto half = render_batch(quad_scene(Texture::uv(4, {0.1, 0.2, 0.4}), ambient_only()));
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(std::abs(half.images[0][i] - 0.5 * img[i]) < 1e-15);
}

TEST_CASE("Lambert cosine at sixty degrees") {
  const double a = 60.0 * std::numbers::pi / 180.0;
  const Light tilted{Vec3(std::sin(a), 0.0, -std::cos(a)), 0.0, 1.0};
  const auto b = render_batch(quad_scene(Texture::uv(4, {0.2, 0.4, 0.8}), tilted));
  REQUIRE(covered_count(b) > 0);
  for (std::size_t p = 0; p < b.image_size.pixels(); ++p) {
    if (!b.jacobians[0].covered(p)) continue;
    CHECK(b.images[0][p * 3 + 0] == doctest::Approx(0.5 * 0.2).epsilon(1e-12));
    CHECK(b.images[0][p * 3 + 2] == doctest::Approx(0.5 * 0.8).epsilon(1e-12));
  }
}

TEST_CASE("z-buffer keeps the nearest surface") {
  MeshBuilder builder(2, 0.0);
  builder.add_quad(Vec3(-0.5, -0.5, 0.0), Vec3(1, 0, 0), Vec3(0, 1, 0), 1, 1, "back", 0);
  builder.add_quad(Vec3(-0.25, -0.25, 0.3), Vec3(0.5, 0, 0), Vec3(0, 0.5, 0), 1, 1, "front", 3);
  Scene s;
  s.mesh = std::make_shared<const Mesh>(builder.build());
  Texture t = Texture::uv(4, {0.0, 0.0, 1.0});
  for (int r = 2; r < 4; ++r) {
    for (int c = 2; c < 4; ++c) t.at(t.texel_slot(r, c), 0) = 1.0, t.at(t.texel_slot(r, c), 2) = 0.0;
  }
  s.texture = t;
  s.cameras = {Camera{2.0, 0.0, 0.0, 30.0}};
  s.lights = {ambient_only()};
  s.image_size = {32, 32};
  const auto img = render_batch(s).images[0];
  CHECK(img.at(16, 16, 0) == doctest::Approx(1.0));
  CHECK(img.at(16, 16, 2) == doctest::Approx(0.0));
  CHECK(img.at(16, 4, 2) == doctest::Approx(1.0));
}

TEST_CASE("texture gradient basics") {
  const Scene s = quad_scene(Texture::uv(4), ambient_only());
  const auto b = render_batch(s);
  std::vector<core::PixelGrad> zero{core::PixelGrad(s.image_size)};
  for (double g : texture_gradient(b, zero)) CHECK(g == 0.0);

  std::vector<core::PixelGrad> outside{core::PixelGrad(s.image_size)};
  for (std::size_t p = 0; p < s.image_size.pixels(); ++p) {
    if (b.jacobians[0].covered(p)) continue;
    for (int ch = 0; ch < 3; ++ch) outside[0][p * 3 + ch] = 1.0;
  }
  for (double g : texture_gradient(b, outside)) CHECK(g == 0.0);
  CHECK_THROWS_AS(texture_gradient(b, {}), DimensionError);
}

TEST_CASE("gradient at a texel center is one") {
  // Every corner maps to the center of texel (1, 2), so each covered pixel
  // reads that texel with weight 1.
  const Vec2 center(2.5 / 4.0, 1.0 - 1.5 / 4.0);
  const FaceUV uv{center, center, center};
  const Mesh m({{-0.5, -0.5, 0}, {0.5, -0.5, 0}, {0.5, 0.5, 0}, {-0.5, 0.5, 0}}, {{0, 1, 2}, {0, 2, 3}},
               std::vector<FaceUV>{uv, uv});
  Scene s = quad_scene(Texture::uv(4), ambient_only());
  s.mesh = std::make_shared<const Mesh>(m);
  const auto b = render_batch(s);
  std::size_t pick = 0;
  while (!b.jacobians[0].covered(pick)) ++pick;
  std::vector<core::PixelGrad> g{core::PixelGrad(s.image_size)};
  g[0][pick * 3 + 0] = 1.0;
  const auto grad = texture_gradient(b, g);
  const std::size_t target = s.texture.texel_slot(1, 2) * 3;
  for (std::size_t i = 0; i < grad.size(); ++i) CHECK(grad[i] == doctest::Approx(i == target ? 1.0 : 0.0));
}

TEST_CASE("texture gradients match finite differences") {
  Rng rng(31);
  const classifiers::LinearSoftmaxClassifier c({24, 24}, 5, 3);
  for (int trial = 0; trial < 3; ++trial) {
    const Scene s = testing::random_scene(rng, 3, {24, 24});
    const auto stats = testing::texture_fd_check(c, s, trial % 5, 100, rng);
    CHECK(stats.checked == 100);
    CHECK(stats.max_rel <= 1e-4);
  }
}

TEST_CASE("renders are linear in the texture and adjoint to the gradient") {
  Rng rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    const Scene s = testing::random_scene(rng, 2);
    CHECK(testing::linearity_error(s, rng) <= 1e-6);
    CHECK(testing::adjoint_rel_error(s, rng) <= 1e-6);
  }
}

TEST_CASE("apply_jacobian reproduces a fresh render") {
  Rng rng(43);
  Scene s = testing::random_scene(rng, 2);
  const auto b = render_batch(s);
  for (double& v : s.texture.values()) v = rng.uniform();
  const auto direct = render_batch(s).images;
  const auto via = apply_jacobian(b, s.texture);
  for (std::size_t v = 0; v < direct.size(); ++v) CHECK(core::max_abs_diff(direct[v], via[v]) < 1e-12);
  CHECK_THROWS_AS(apply_jacobian(b, Texture::uv(4)), DimensionError);
}

TEST_CASE("rendering is deterministic") {
  Rng rng(44);
  const Scene s = testing::random_scene(rng, 3);
  CHECK(render_batch(s).images == render_batch(s).images);
}

TEST_CASE("scene sampling") {
  SceneRanges fixed;
  fixed.azimuth_deg = {30, 30};
  fixed.elevation_deg = {10, 10};
  fixed.distance = {2.5, 2.5};
  fixed.light_cone_deg = {20, 20};
  fixed.light_roll_deg = {90, 90};
  fixed.ambient = {0.4, 0.4};
  fixed.diffuse = {0.5, 0.5};
  Rng rng(5);
  const auto views = sample_scene_params(rng, fixed, 4);
  REQUIRE(views.size() == 4);
  for (const auto& v : views) CHECK(v == views[0]);

  Rng a(6), b(6);
  CHECK(sample_scene_params(a, SceneRanges{}, 20) == sample_scene_params(b, SceneRanges{}, 20));

  SceneRanges full;
  full.azimuth_deg = {0.0, 360.0};
  Rng c(7);
  double sum = 0.0;
  for (const auto& v : sample_scene_params(c, full, 10000)) sum += v.camera.azimuth_deg;
  CHECK(std::abs(sum / 10000.0 - 180.0) < 5.0);

  Rng d(8);
  for (const auto& v : sample_scene_params(d, SceneRanges{}, 200)) {
    CHECK(v.light.ambient + v.light.diffuse <= 1.0 + 1e-12);
    CHECK_NOTHROW(validate(v.light));
  }
  CHECK_THROWS_AS(sample_scene_params(d, SceneRanges{}, 0), DomainError);
  SceneRanges bad;
  bad.distance = {3.0, 2.0};
  CHECK_THROWS_AS(sample_scene_params(d, bad, 1), DomainError);
}

TEST_CASE("light relative to the camera") {
  const Camera cam{2.5, 40.0, 15.0, 40.0};
  const Light head_on = light_relative_to(cam, 0.0, 0.0, 0.3, 0.6);
  CHECK((head_on.direction + cam.position().normalized()).norm() < 1e-12);
  const Light tilted = light_relative_to(cam, 35.0, 123.0, 0.3, 0.6);
  const double cosang = tilted.direction.dot(-cam.position().normalized());
  CHECK(cosang == doctest::Approx(std::cos(35.0 * std::numbers::pi / 180.0)));
}

TEST_CASE("scene validation") {
  CHECK_THROWS_AS(validate(Camera{0.0}), GeometryError);
  CHECK_THROWS_AS(validate(Light{Vec3(0, 0, -1), 0.7, 0.6}), GeometryError);
  Scene s = quad_scene(Texture::uv(4), ambient_only());
  s.lights.clear();
  CHECK_THROWS_AS(render_batch(s), DomainError);
}

TEST_CASE("mesh builder atlas") {
  const MeshBuilder b(4, 1.0 / 64.0);
  const auto r0 = b.tile_rect(0);
  CHECK(r0[0] == doctest::Approx(1.0 / 64.0));
  CHECK(r0[1] == doctest::Approx(0.25 - 1.0 / 64.0));
  CHECK(r0[2] == doctest::Approx(0.75 + 1.0 / 64.0));
  CHECK(r0[3] == doctest::Approx(1.0 - 1.0 / 64.0));
  MeshBuilder box;
  box.add_box(Vec3::Zero(), Vec3(1, 1, 1), 2, "box", {0, 1, 2, 3, 4, 5});
  const Mesh m = box.build();
  CHECK(m.face_count() == 6 * 2 * 2 * 2);
  CHECK(m.has_uv());
  const Mesh sphere = uv_sphere(12, 6);
  CHECK(sphere.radius() == doctest::Approx(1.0));
}

TEST_CASE("OBJ loading") {
  testing::TempDir dir("obj");
  core::write_text_file(dir / "quad.obj",
                        "mtllib quad.mtl\n"
                        "v -1 -1 0\nv 1 -1 0\nv 1 1 0\nv -1 1 0\n"
                        "vt 0 0\nvt 1 0\nvt 1 1\nvt 0 1\nvn 0 0 1\n"
                        "g front\nusemtl paint\n"
                        "f 1/1/1 2/2/1 3/3/1 4/4/1\n"
                        "g back\n"
                        "f -4/-4 -2/-2 -1/-1\n");
  core::write_text_file(dir / "quad.mtl", "newmtl paint\nmap_Kd tex/albedo.png\n");
  const auto obj = load_obj(dir / "quad.obj");
  CHECK(obj.mesh.face_count() == 3);
  CHECK(obj.mesh.has_uv());
  REQUIRE(obj.diffuse_map);
  CHECK(*obj.diffuse_map == dir / "tex/albedo.png");
  CHECK(obj.mesh.group_ids({"back"}).size() == 1);
  const auto& uv = obj.mesh.uv();
  CHECK(uv[1][2].isApprox(Vec2(0, 1)));

  core::write_text_file(dir / "mixed.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1\nf 1 2 3\n");
  CHECK_THROWS_AS(load_obj(dir / "mixed.obj"), FormatError);
  core::write_text_file(dir / "range.obj", "v 0 0 0\nv 1 0 0\nf 1 2 3\n");
  CHECK_THROWS_AS(load_obj(dir / "range.obj"), FormatError);
  CHECK_THROWS_AS(load_obj(dir / "none.obj"), IoError);
}

TEST_CASE("OBJ round trip") {
  testing::TempDir dir("objrt");
  const Mesh m = uv_sphere(8, 4);
  save_obj(m, dir / "s.obj");
  const Mesh back = load_obj(dir / "s.obj").mesh;
  REQUIRE(back.face_count() == m.face_count());
  REQUIRE(back.vertex_count() == m.vertex_count());
  for (std::size_t i = 0; i < m.vertex_count(); ++i) CHECK((back.vertices()[i] - m.vertices()[i]).norm() < 1e-9);
  CHECK(back.faces() == m.faces());
  for (std::size_t f = 0; f < m.face_count(); ++f) {
    for (int k = 0; k < 3; ++k) CHECK((back.uv()[f][k] - m.uv()[f][k]).norm() < 1e-9);
  }
  CHECK(back.group_names() == m.group_names());
}

TEST_CASE("PLY ascii and binary") {
  testing::TempDir dir("ply");
  const Mesh q = unit_quad();
  Texture colors = Texture::vertex(q.vertex_count());
  Rng rng(9);
  for (double& v : colors.values()) v = static_cast<double>(rng.below(256)) / 255.0;
  save_ply(q, colors, dir / "q.ply");
  const auto back = load_ply(dir / "q.ply");
  CHECK(back.mesh.faces() == q.faces());
  REQUIRE(back.colors);
  for (std::size_t i = 0; i < colors.values().size(); ++i) CHECK(std::abs(back.colors->values()[i] - colors.values()[i]) < 1e-12);
  CHECK_THROWS_AS(save_ply(q, Texture::uv(4), dir / "bad.ply"), FormatError);

  std::string bin =
      "ply\nformat binary_little_endian 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
      "property float z\nproperty float red\nproperty float green\nproperty float blue\n"
      "element face 1\nproperty list uchar int vertex_indices\nend_header\n";
  const float verts[3][6] = {{0, 0, 0, 1, 0, 0}, {1, 0, 0, 0, 1, 0}, {0, 1, 0, 0, 0, 0.5f}};
  bin.append(reinterpret_cast<const char*>(verts), sizeof(verts));
  bin.push_back(static_cast<char>(3));
  const std::int32_t idx[3] = {0, 1, 2};
  bin.append(reinterpret_cast<const char*>(idx), sizeof(idx));
  core::write_file_bytes(dir / "b.ply", bin);
  const auto b = load_ply(dir / "b.ply");
  CHECK(b.mesh.face_count() == 1);
  REQUIRE(b.colors);
  CHECK(b.colors->at(2, 2) == doctest::Approx(0.5));
  core::write_file_bytes(dir / "short.ply", bin.substr(0, bin.size() - 4));
  CHECK_THROWS_AS(load_ply(dir / "short.ply"), FormatError);
}

}  // TEST_SUITE
