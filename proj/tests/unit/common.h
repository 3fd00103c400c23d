#pragma once

#include <atomic>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "assist/core/image.h"
#include "assist/core/rng.h"

namespace assist::testing {

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("assist-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline core::Image random_image(core::Rng& rng, core::Shape shape, double lo = 0.0, double hi = 1.0) {
  core::Image img(shape);
  for (double& v : img.values()) v = rng.uniform(lo, hi);
  return img;
}

inline core::Image solid(core::Shape shape, double r, double g, double b) {
  core::Image img(shape);
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      img.at(y, x, 0) = r;
      img.at(y, x, 1) = g;
      img.at(y, x, 2) = b;
    }
  }
  return img;
}

}  // namespace assist::testing
