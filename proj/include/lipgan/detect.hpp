#pragma once

#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "lipgan/image.hpp"

namespace lipgan {

struct NoFaceError : std::runtime_error {
  int frame_index;
  explicit NoFaceError(int idx)
      : std::runtime_error("no face found in frame " + std::to_string(idx)), frame_index(idx) {}
};

// Pluggable face detector. Implementations return the boxes of all detected
// faces; detect_face picks the largest.
class FaceDetector {
 public:
  virtual ~FaceDetector() = default;
  virtual std::vector<FaceBox> detect(const Frame& frame) const = 0;
};

// Threshold-based blob detector for toy footage: the largest connected bright
// component's bounding box.
class BrightBlobDetector : public FaceDetector {
 public:
  explicit BrightBlobDetector(double luminance_threshold = 0.35, int min_area = 16)
      : threshold_(luminance_threshold), min_area_(min_area) {}

  std::vector<FaceBox> detect(const Frame& frame) const override {
    const int h = frame.height, w = frame.width;
    std::vector<int> label(static_cast<size_t>(h) * w, -1);
    auto bright = [&](int y, int x) {
      const double lum = (0.299 * frame.at(y, x, 0) + 0.587 * frame.at(y, x, 1) +
                          0.114 * frame.at(y, x, 2)) / 255.0;
      return lum > threshold_;
    };
    std::vector<FaceBox> boxes;
    int next = 0;
    for (int sy = 0; sy < h; ++sy) {
      for (int sx = 0; sx < w; ++sx) {
        if (!bright(sy, sx) || label[static_cast<size_t>(sy) * w + sx] >= 0) continue;
        int min_x = sx, max_x = sx, min_y = sy, max_y = sy, area = 0;
        std::queue<std::pair<int, int>> q;
        q.push({sy, sx});
        label[static_cast<size_t>(sy) * w + sx] = next;
        while (!q.empty()) {
          const auto [y, x] = q.front();
          q.pop();
          ++area;
          min_x = std::min(min_x, x);
          max_x = std::max(max_x, x);
          min_y = std::min(min_y, y);
          max_y = std::max(max_y, y);
          constexpr int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
          for (int k = 0; k < 4; ++k) {
            const int ny = y + dy[k], nx = x + dx[k];
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            auto& l = label[static_cast<size_t>(ny) * w + nx];
            if (l >= 0 || !bright(ny, nx)) continue;
            l = next;
            q.push({ny, nx});
          }
        }
        ++next;
        if (area >= min_area_) {
          FaceBox b;
          b.x = min_x;
          b.y = min_y;
          b.w = max_x - min_x + 1;
          b.h = max_y - min_y + 1;
          b.frame_index = frame.index;
          boxes.push_back(b);
        }
      }
    }
    return boxes;
  }

 private:
  double threshold_;
  int min_area_;
};

// Exact detector for the synthetic corpus: returns the renderer's stored box.
class GroundTruthDetector : public FaceDetector {
 public:
  explicit GroundTruthDetector(std::map<int, FaceBox> boxes) : boxes_(std::move(boxes)) {}

  std::vector<FaceBox> detect(const Frame& frame) const override {
    auto it = boxes_.find(frame.index);
    if (it == boxes_.end()) return {};
    FaceBox b = it->second;
    b.frame_index = frame.index;
    return {b};
  }

 private:
  std::map<int, FaceBox> boxes_;
};

// Largest detected face; throws NoFaceError with the frame index otherwise.
inline FaceBox detect_face(const Frame& frame, const FaceDetector& detector) {
  const auto boxes = detector.detect(frame);
  if (boxes.empty()) throw NoFaceError(frame.index);
  const FaceBox* best = &boxes[0];
  for (const auto& b : boxes)
    if (static_cast<long long>(b.w) * b.h > static_cast<long long>(best->w) * best->h) best = &b;
  return *best;
}

}  // namespace lipgan
