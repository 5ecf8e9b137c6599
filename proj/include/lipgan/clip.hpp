#pragma once

#include <optional>
#include <vector>

#include "lipgan/audio.hpp"
#include "lipgan/image.hpp"

namespace lipgan {

struct VideoClip {
  std::vector<Frame> frames;
  double fps = 25.0;
  std::optional<Waveform> audio;

  double duration_s() const { return fps > 0 ? frames.size() / fps : 0.0; }
};

}  // namespace lipgan
