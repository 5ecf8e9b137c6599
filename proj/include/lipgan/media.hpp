#pragma once

#include <stdexcept>
#include <string>

#include "lipgan/clip.hpp"

namespace lipgan {

struct DecodeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Decode an MP4 (or any container the codec backend reads) into frames. The
// audio track travels as a sidecar WAV with the same stem (video.mp4 +
// video.wav); a missing sidecar yields a clip with absent audio.
VideoClip decode_video(const std::string& path);

// Encode frames to MP4 at the given rate and write the audio as the sidecar
// WAV. When an ffmpeg executable is on PATH the audio is additionally muxed
// into the container. Returns the video path.
std::string encode_video(const std::vector<Frame>& frames, const std::optional<Waveform>& audio,
                         double fps, const std::string& path);

Frame read_png(const std::string& path);
void write_png(const std::string& path, const Frame& frame);

}  // namespace lipgan
