#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lipgan/clip.hpp"
#include "lipgan/detect.hpp"
#include "lipgan/model.hpp"

namespace lipgan {

enum class DubMode { self_pose, eval_random_identity };
enum class NoFacePolicy { fail, copy_through };

struct DubNoFaceError : std::runtime_error {
  std::vector<int> frame_indices;
  explicit DubNoFaceError(std::vector<int> indices, const std::string& msg)
      : std::runtime_error(msg), frame_indices(std::move(indices)) {}
};

template <typename S>
struct DubRequest {
  VideoClip visual_source;            // one frame => still-image mode
  Waveform audio;
  const ParamStore<S>* params = nullptr;
  ArchitectureConfig architecture;
  DubMode mode = DubMode::self_pose;
  double fps_out = 0.0;               // 0 => source fps (25 for a still image)
  MfccConfig mfcc;
  double window_ms = 350.0;
  NoFacePolicy no_face = NoFacePolicy::fail;
  const FaceDetector* detector = nullptr;  // defaults to BrightBlobDetector
  std::uint64_t identity_seed = 0;    // eval mode: fixed random frame per clip
  bool loop_pingpong = true;          // false => freeze last frame
};

// Identity channels = current frame; pose channels = the same frame with the
// lower half masked.
template <typename S>
GeneratorInput<S> self_pose_input(const Image<S>& current) {
  return GeneratorInput<S>::make(current, current);
}

// Identity channels = a random frame of the speaker; pose channels = masked
// current frame (keeps ground-truth lip content out of the input).
template <typename S>
GeneratorInput<S> eval_mode_input(const Image<S>& random_identity, const Image<S>& current) {
  return GeneratorInput<S>::make(random_identity, current);
}

namespace inferd {
// Ping-pong index into [0, n): 0,1,...,n-1,n-2,...,1,0,1,...
inline size_t pingpong(size_t i, size_t n) {
  if (n <= 1) return 0;
  const size_t period = 2 * (n - 1);
  const size_t m = i % period;
  return m < n ? m : period - m;
}
}  // namespace inferd

// Frame-by-frame dubbing: one audio window per output frame, centered at the
// frame's timestamp, generator input built per mode, result pasted back into
// the source frame.
template <typename S>
VideoClip dub(const DubRequest<S>& req) {
  if (req.audio.empty()) throw std::invalid_argument("dub: empty audio");
  if (!req.params) throw std::invalid_argument("dub: missing parameters");
  if (req.visual_source.frames.empty()) throw std::invalid_argument("dub: empty visual source");
  const ArchitectureConfig& arch = req.architecture;
  arch.validate();

  const bool still_image = req.visual_source.frames.size() == 1;
  const double fps_out = req.fps_out > 0 ? req.fps_out
                        : (still_image || req.visual_source.fps <= 0) ? 25.0
                                                                      : req.visual_source.fps;
  const size_t n_out = static_cast<size_t>(std::ceil(req.audio.duration_s() * fps_out));
  const size_t n_src = req.visual_source.frames.size();

  BrightBlobDetector default_detector;
  const FaceDetector& detector = req.detector ? *req.detector : default_detector;

  // Eval mode: one fixed random identity frame per clip, seeded.
  std::optional<size_t> identity_index;
  if (req.mode == DubMode::eval_random_identity) {
    std::mt19937_64 rng(req.identity_seed);
    identity_index = std::uniform_int_distribution<size_t>(0, n_src - 1)(rng);
  }

  VideoClip out;
  out.fps = fps_out;
  out.audio = req.audio;
  std::vector<int> failed_frames;
  for (size_t i = 0; i < n_out; ++i) {
    const double t_ms = i * 1000.0 / fps_out;
    size_t src_idx = 0;
    if (!still_image) {
      const size_t nominal = static_cast<size_t>(t_ms / 1000.0 * req.visual_source.fps);
      src_idx = req.loop_pingpong ? inferd::pingpong(nominal, n_src)
                                  : std::min(nominal, n_src - 1);
    }
    const Frame& src = req.visual_source.frames[src_idx];

    FaceBox box;
    try {
      box = detect_face(src, detector);
    } catch (const NoFaceError&) {
      if (req.no_face == NoFacePolicy::copy_through) {
        Frame copy = src;
        copy.index = static_cast<int>(i);
        copy.timestamp_ms = t_ms;
        out.frames.push_back(std::move(copy));
        continue;
      }
      failed_frames.push_back(static_cast<int>(i));
      continue;
    }

    const Image<S> current = crop_resize<S>(src, box, arch.face_size);
    GeneratorInput<S> gi;
    if (req.mode == DubMode::self_pose) {
      gi = self_pose_input(current);
    } else {
      const Frame& id_frame = req.visual_source.frames[*identity_index];
      const FaceBox id_box = detect_face(id_frame, detector);
      gi = eval_mode_input(crop_resize<S>(id_frame, id_box, arch.face_size), current);
    }

    const MfccHeatmap a = compute_mfcc(extract_window(req.audio, t_ms, req.window_ms), req.mfcc);
    Tape<S> tape(*req.params);
    const Image<S> face = tensor_to_image(generator_forward(tape, gi, a, arch).face);
    Frame pasted = paste_back(src, box, face);
    pasted.index = static_cast<int>(i);
    pasted.timestamp_ms = t_ms;
    out.frames.push_back(std::move(pasted));
  }
  if (!failed_frames.empty()) {
    std::string msg = "dub: no detectable face in output frames:";
    for (int idx : failed_frames) msg += " " + std::to_string(idx);
    throw DubNoFaceError(std::move(failed_frames), msg);
  }
  return out;
}

}  // namespace lipgan
