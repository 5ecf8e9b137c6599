#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "lipgan/model.hpp"

namespace testutil {

// Unique scratch directory under the system temp root, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path = std::filesystem::temp_directory_path() /
           (tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str(const std::string& child = "") const {
    return child.empty() ? path.string() : (path / child).string();
  }
};

// Small architecture that keeps forward/backward passes fast in unit tests.
inline lipgan::ArchitectureConfig tiny_arch() {
  lipgan::ArchitectureConfig cfg;
  cfg.face_size = 32;
  cfg.embedding_size = 16;
  cfg.stem_width = 4;
  cfg.encoder_widths = {4, 8, 8};
  cfg.decoder_widths = {8, 8, 4};
  cfg.audio_widths = {4, 8};
  cfg.skip_count = 3;
  return cfg;
}

template <typename S>
lipgan::Image<S> random_crop(int size, std::uint64_t seed, int channels = 3) {
  lipgan::Image<S> img(size, size, channels);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  for (Eigen::Index i = 0; i < img.data.size(); ++i)
    img.data.data()[i] = static_cast<S>(dist(rng));
  return img;
}

inline lipgan::MfccHeatmap random_heatmap(int rows, int cols, std::uint64_t seed) {
  lipgan::MfccHeatmap h;
  h.values.resize(rows, cols);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (Eigen::Index i = 0; i < h.values.size(); ++i) h.values.data()[i] = dist(rng);
  return h;
}

}  // namespace testutil
