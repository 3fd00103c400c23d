#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "assist/classifiers/oracles.h"
#include "assist/classifiers/training.h"
#include "assist/core/errors.h"
#include "assist/signals2d/attacks.h"
#include "assist/signals2d/patch.h"
#include "common.h"

using namespace assist;
using namespace assist::signals2d;
using assist::testing::random_image;
using classifiers::LogisticPixelClassifier;
using classifiers::ReferenceCNN;
using core::Rng;
using core::Shape;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Image pixel(double red) { return Image(Shape{1, 1}, std::vector<double>{red, 0.0, 0.0}); }

core::OptimConfig sign_steps(double alpha, int iterations) {
  core::OptimConfig cfg;
  cfg.step_size = alpha;
  cfg.iterations = iterations;
  return cfg;
}

// Class 1 carries a faint red tint over uniform noise, so a trained model
// is unsure and a patch has room to help.
core::LabeledDataset tinted(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  core::LabeledDataset d(2);
  for (int i = 0; i < 2 * per_class; ++i) {
    const int label = i % 2;
    Image img = random_image(rng, {16, 16}, 0.0, 0.8);
    if (label == 1) {
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) img.at(y, x, 0) += 0.06;
      }
    }
    d.add(std::move(img), label);
  }
  return d;
}

const ReferenceCNN& tinted_model() {
  static const ReferenceCNN model = [] {
    classifiers::TrainConfig cfg;
    cfg.epochs = 4;
    cfg.seed = 2;
    return classifiers::train_reference(tinted(150, 1), cfg).model;
  }();
  return model;
}

}  // namespace

TEST_SUITE("signals2d") {

TEST_CASE("fgsm logistic oracle") {
  const LogisticPixelClassifier c(3.0, -1.5);
  const Image adv = fgsm_attack(c, pixel(0.5), 1, 0.1);
  CHECK(std::abs(adv[0] - 0.4) < 1e-12);
  CHECK(std::abs(c.predict(adv)[1] - sigmoid(-0.3)) < 1e-12);
  CHECK(std::abs(sigmoid(-0.3) - 0.4256) < 1e-4);
  CHECK(fgsm_attack(c, pixel(0.5), 1, 0.0) == pixel(0.5));
}

TEST_CASE("fgsm with zero gradient is the identity") {
  const LogisticPixelClassifier flat(0.0, 0.3);
  const Image x(Shape{1, 1}, std::vector<double>{0.2, 0.7, 0.9});
  CHECK(fgsm_attack(flat, x, 1, 0.2) == x);
}

TEST_CASE("pgd logistic oracle converges to the ball boundary") {
  const LogisticPixelClassifier c(3.0, -1.5);
  CHECK(pgd_attack(c, pixel(0.5), 1, 0.1, 0.05, 0) == pixel(0.5));
  const Image adv = pgd_attack(c, pixel(0.5), 1, 0.1, 0.05, 40);
  CHECK(std::abs(adv[0] - 0.4) < 1e-12);
  // Independent 1-D iteration: x <- clamp(x - alpha, 0.4, 0.6).
  double x = 0.5;
  for (int s = 1; s <= 10; ++s) {
    x = std::clamp(x - 0.05, 0.4, 0.6);
    const Image a = pgd_attack(c, pixel(0.5), 1, 0.1, 0.05, s);
    CHECK(std::abs(a[0] - x) < 1e-12);
    CHECK(a[0] >= 0.4 - 1e-12);
    CHECK(a[0] <= 0.6 + 1e-12);
  }
}

TEST_CASE("hardening logistic oracle") {
  const LogisticPixelClassifier c(3.0, -1.5);
  const auto h = harden_image(c, pixel(0.5), 1, sign_steps(0.1, 1));
  CHECK(std::abs(h.image[0] - 0.6) < 1e-12);
  CHECK(std::abs(c.predict(h.image)[1] - sigmoid(0.3)) < 1e-12);
  CHECK(std::abs(sigmoid(0.3) - 0.5744) < 1e-4);
  CHECK(h.confidence_before == doctest::Approx(0.5));
  CHECK(harden_image(c, pixel(0.5), 1, sign_steps(0.1, 0)).image == pixel(0.5));
}

TEST_CASE("hardening a saturated image leaves it unchanged") {
  const LogisticPixelClassifier c(1000.0, 0.0);
  const auto h = harden_image(c, pixel(0.9), 1, sign_steps(0.1, 20));
  CHECK(std::abs(h.image[0] - 0.9) <= 1e-9);
  CHECK(!h.warning);
}

TEST_CASE("raw-gradient hardening never lowers the true class") {
  const LogisticPixelClassifier c(3.0, -1.5);
  auto cfg = sign_steps(1e-3, 0);
  cfg.use_sign_gradient = false;
  double last = c.predict(pixel(0.2))[1];
  for (int k = 1; k <= 60; ++k) {
    cfg.iterations = k;
    const double p = c.predict(harden_image(c, pixel(0.2), 1, cfg).image)[1];
    CHECK(p >= last);
    last = p;
  }
}

TEST_CASE("harden_dataset preserves labels and order") {
  const auto model = ReferenceCNN::initialize({8, 8}, 3, 5);
  Rng rng(3);
  core::LabeledDataset d(3);
  for (int i = 0; i < 7; ++i) d.add(random_image(rng, {8, 8}), (i * 2) % 3);
  const auto h = harden_dataset(model, d, sign_steps(0.01, 5));
  REQUIRE(h.data.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(h.data[i].label == d[i].label);
  CHECK(harden_dataset(model, core::LabeledDataset(3), sign_steps(0.01, 5)).data.empty());
}

TEST_CASE("budgeted operations stay inside the ball and the unit cube") {
  const auto model = ReferenceCNN::initialize({8, 8}, 4, 11);
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Image x = random_image(rng, {8, 8});
    const int y = static_cast<int>(rng.below(4));
    const double eps = rng.uniform(0.0, 0.1);
    auto cfg = sign_steps(eps / 4.0 + 1e-6, 10);
    cfg.epsilon = eps;
    for (const Image& out : {fgsm_attack(model, x, y, eps), pgd_attack(model, x, y, eps, eps / 4.0, 10),
                             harden_image(model, x, y, cfg).image}) {
      CHECK(out.shape() == x.shape());
      CHECK(core::max_abs_diff(out, x) <= eps + 1e-9);
      for (double v : out.values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_CASE("pgd induces more loss than fgsm") {
  const auto& model = tinted_model();
  const auto data = tinted(25, 99);
  int wins = 0;
  core::PixelGrad g;
  for (const auto& item : data) {
    const double eps = 0.03;
    const double lf = model.loss_gradient(fgsm_attack(model, item.image, item.label, eps), item.label, g);
    const double lp = model.loss_gradient(pgd_attack(model, item.image, item.label, eps, eps / 10.0, 40), item.label, g);
    wins += lp > lf ? 1 : 0;
  }
  CHECK(wins >= static_cast<int>(std::ceil(0.9 * data.size())));
}

TEST_CASE("apply_patch") {
  Rng rng(4);
  const Image img = random_image(rng, {6, 8});
  const Image full = random_image(rng, {6, 8});
  CHECK(apply_patch(img, full, {0, 0}) == full);
  CHECK(apply_patch(img, Image(Shape{0, 0}), {2, 2}) == img);
  const Image patch = random_image(rng, {2, 3});
  const Image out = apply_patch(img, patch, {3, 4});
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 8; ++x) {
      const bool inside = y >= 3 && y < 5 && x >= 4 && x < 7;
      for (int ch = 0; ch < 3; ++ch) {
        CHECK(out.at(y, x, ch) == (inside ? patch.at(y - 3, x - 4, ch) : img.at(y, x, ch)));
      }
    }
  }
  CHECK_THROWS_AS(apply_patch(img, patch, {5, 0}), BoundsError);
  CHECK_THROWS_AS(apply_patch(img, patch, {-1, 0}), BoundsError);
}

TEST_CASE("random locations cover every valid corner") {
  Rng rng(5);
  std::vector<int> seen(3 * 4, 0);
  for (int i = 0; i < 2000; ++i) {
    const auto at = random_location(rng, {5, 6}, {3, 3});
    REQUIRE(at.row >= 0);
    REQUIRE(at.row <= 2);
    REQUIRE(at.col >= 0);
    REQUIRE(at.col <= 3);
    seen[static_cast<std::size_t>(at.row * 4 + at.col)]++;
  }
  for (int s : seen) CHECK(s > 100);
  CHECK_THROWS_AS(random_location(rng, {2, 2}, {3, 1}), BoundsError);
}

TEST_CASE("random erase") {
  Rng rng(6);
  const Image img = random_image(rng, {12, 12}, 0.6, 1.0);
  EraseParams never;
  never.probability = 0.0;
  for (int i = 0; i < 20; ++i) CHECK(random_erase(img, rng, never) == img);

  EraseParams always;
  always.probability = 1.0;
  always.fill = EraseFill::gray;
  for (int trial = 0; trial < 30; ++trial) {
    const Image out = random_erase(img, rng, always);
    int top = 99, bottom = -1, left = 99, right = -1, changed = 0;
    for (int y = 0; y < 12; ++y) {
      for (int x = 0; x < 12; ++x) {
        if (out.at(y, x, 0) != img.at(y, x, 0)) {
          ++changed;
          top = std::min(top, y);
          bottom = std::max(bottom, y);
          left = std::min(left, x);
          right = std::max(right, x);
          for (int ch = 0; ch < 3; ++ch) CHECK(out.at(y, x, ch) == 0.5);
        }
      }
    }
    REQUIRE(changed > 0);
    CHECK(changed == (bottom - top + 1) * (right - left + 1));
  }

  Rng a(9), b(9);
  CHECK(random_erase(img, a, EraseParams{}) == random_erase(img, b, EraseParams{}));
  EraseParams bad;
  bad.aspect_min = 0.0;
  CHECK_THROWS_AS(random_erase(img, rng, bad), ConfigError);
}

TEST_CASE("patch training preconditions and identity case") {
  const auto model = ReferenceCNN::initialize({8, 8}, 2, 1);
  Rng rng(7);
  core::LabeledDataset pos(2);
  pos.add(random_image(rng, {8, 8}), 1);
  PatchTrainConfig cfg;
  cfg.patch_height = 3;
  cfg.patch_width = 4;
  auto optim = sign_steps(0.05, 0);
  optim.seed = 17;
  const auto p = train_patch_2d(model, pos, 1, cfg, optim);
  CHECK(p.pixels == initial_patch(cfg, 17));
  CHECK(p.pixels.shape() == Shape{3, 4});

  core::LabeledDataset mixed = pos;
  mixed.add(random_image(rng, {8, 8}), 0);
  optim.iterations = 3;
  CHECK_THROWS_AS(train_patch_2d(model, mixed, 1, cfg, optim), PreconditionError);
  CHECK_THROWS_AS(train_patch_2d(model, pos, 2, cfg, optim), IndexError);
  cfg.patch_height = 9;
  CHECK_THROWS_AS(train_patch_2d(model, pos, 1, cfg, optim), BoundsError);
}

TEST_CASE("trained patch raises confidence") {
  const auto& model = tinted_model();
  const auto positives = tinted(40, 7).filter_label(1);
  PatchTrainConfig cfg;
  cfg.patch_height = 8;
  cfg.patch_width = 8;
  auto optim = sign_steps(0.02, 60);
  optim.seed = 3;
  const auto patch = train_patch_2d(model, positives, 1, cfg, optim);
  const double without = mean_patched_confidence(model, positives, nullptr, 1, 5);
  const double with = mean_patched_confidence(model, positives, &patch.pixels, 1, 5);
  CHECK(with >= without);

  cfg.random_erase = EraseParams{};
  const auto erased = train_patch_2d(model, positives, 1, cfg, optim);
  CHECK(mean_patched_confidence(model, positives, &erased.pixels, 1, 5) >= without);
}

TEST_CASE("patch files round trip") {
  testing::TempDir dir("patch");
  Rng rng(8);
  Image px(Shape{3, 5});
  for (double& v : px.values()) v = static_cast<double>(rng.below(256)) / 255.0;
  save_patch({px, 4}, dir / "p.png", {"abc", 7});
  const auto back = load_patch(dir / "p.png");
  CHECK(back.target_label == 4);
  CHECK(core::max_abs_diff(back.pixels, px) < 1e-12);
  std::filesystem::remove(dir / "p.json");
  CHECK_THROWS_AS(load_patch(dir / "p.png"), IoError);
}

}  // TEST_SUITE
