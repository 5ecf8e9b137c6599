#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "lipgan/clip.hpp"

namespace lipgan {

struct ToyClipSpec {
  std::uint64_t seed = 0;
  double duration_s = 4.0;
  double fps = 25.0;
  double sample_rate = 16000.0;
  int frame_size = 96;
  double head_radius_px = 40.0;
  double mouth_cx = 48.0;
  double mouth_cy = 66.0;
  double mouth_half_width = 10.0;  // horizontal semi-axis
  double a_min = 2.0;
  double a_max = 14.0;
  // Per-frame luminance-neutral chroma dots on the lower half of the head.
  // They leave every luminance-thresholded oracle measurement untouched while
  // making the masked region's pixel values unpredictable, so pixel losses see
  // an irreducible noise floor there.
  int speckle_count = 60;
  double speckle_amplitude = 0.2;
  double speckle_radius = 2.5;
  // Per-frame luminance-neutral whole-head tint (varying illumination color).
  // The pose prior's upper half reveals each frame's tint, so synthesizing the
  // masked lower half means first matching the frame's tint — a pixel-heavy
  // sub-task that competes with the small mouth region for pixel-loss
  // gradient.
  double tint_amplitude = 0.18;

  void validate() const {
    if (!(0.0 <= a_min && a_min < a_max && a_max < head_radius_px))
      throw std::invalid_argument("ToyClipSpec: need 0 <= a_min < a_max < head_radius");
    if (duration_s <= 0 || fps <= 0 || sample_rate <= 0)
      throw std::invalid_argument("ToyClipSpec: invalid timing");
    if (speckle_count < 0 || speckle_amplitude < 0 || speckle_radius <= 0)
      throw std::invalid_argument("ToyClipSpec: invalid speckle parameters");
    if (tint_amplitude < 0)
      throw std::invalid_argument("ToyClipSpec: invalid tint amplitude");
  }
};

using LandmarkSet = std::vector<std::pair<double, double>>;

// Fully labeled toy clip: the envelope and landmarks are the evaluation-side
// oracle; training code consumes only `clip`.
struct ToyClip {
  VideoClip clip;
  std::vector<double> envelope;       // per frame, [0,1]
  std::vector<FaceBox> face_boxes;    // ground truth per frame
  std::vector<LandmarkSet> mouth_landmarks;  // 20 contour points per frame
  std::array<double, 3> head_color = {0.5, 0.5, 0.5};
};

namespace toyd {

inline std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) { r = c; g = x; }
  else if (hp < 2) { r = x; g = c; }
  else if (hp < 3) { g = c; b = x; }
  else if (hp < 4) { g = x; b = c; }
  else if (hp < 5) { r = x; b = c; }
  else { r = c; b = x; }
  const double m = v - c;
  return {r + m, g + m, b + m};
}

inline double luminance(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

constexpr double kBackground = 0.12;
constexpr double kDark = 0.0;
constexpr double kDarkThreshold = 0.25;
constexpr double kBrightThreshold = 0.35;

}  // namespace toyd

// Renders one frame of the toy head: bright circle, two dark eyes, a dark
// mouth ellipse with vertical semi-axis a_min + (a_max - a_min) * envelope.
inline Frame render_toy_frame(const ToyClipSpec& spec, const std::array<double, 3>& head_rgb,
                              double envelope_value) {
  const int n = spec.frame_size;
  Frame f(n, n);
  const double cx = n / 2.0, cy = n / 2.0;
  const double r2 = spec.head_radius_px * spec.head_radius_px;
  const double a = spec.a_min + (spec.a_max - spec.a_min) * envelope_value;
  const double b = spec.mouth_half_width;
  const double eye_dx = spec.head_radius_px * 0.35;
  const double eye_dy = spec.head_radius_px * 0.30;
  const double eye_r2 = std::pow(spec.head_radius_px * 0.10, 2);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      double rgb[3] = {toyd::kBackground, toyd::kBackground, toyd::kBackground};
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r2) {
        rgb[0] = head_rgb[0];
        rgb[1] = head_rgb[1];
        rgb[2] = head_rgb[2];
        const double exl = x - (cx - eye_dx), exr = x - (cx + eye_dx), ey = y - (cy - eye_dy);
        if (exl * exl + ey * ey <= eye_r2 || exr * exr + ey * ey <= eye_r2)
          rgb[0] = rgb[1] = rgb[2] = toyd::kDark;
        if (a > 0) {
          const double mx = (x - spec.mouth_cx) / b;
          const double my = (y - spec.mouth_cy) / a;
          if (mx * mx + my * my <= 1.0) rgb[0] = rgb[1] = rgb[2] = toyd::kDark;
        }
      }
      for (int c = 0; c < 3; ++c)
        f.at(y, x, c) = static_cast<std::uint8_t>(std::lround(std::clamp(rgb[c], 0.0, 1.0) * 255.0));
    }
  }
  return f;
}

namespace toyd {
// two unit directions with zero luminance: lum(u) = 0.299 r + 0.587 g + 0.114 b
constexpr double kChromaU1[3] = {0.891, -0.454, 0.0};
constexpr double kChromaU2[3] = {0.0, 0.191, -0.982};
}  // namespace toyd

// Applies a frame-wide luminance-neutral tint to every bright head pixel
// (dark features — mouth, eyes — and the background stay untouched, so
// luminance-thresholded oracle measurements are unaffected).
inline void apply_chroma_tint(Frame& f, const ToyClipSpec& spec, double theta, double strength) {
  const double amp = spec.tint_amplitude * strength;
  if (amp <= 0.0) return;
  double dir[3];
  for (int c = 0; c < 3; ++c)
    dir[c] = amp * (std::cos(theta) * toyd::kChromaU1[c] + std::sin(theta) * toyd::kChromaU2[c]);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      double rgb[3];
      for (int c = 0; c < 3; ++c) rgb[c] = f.at(y, x, c) / 255.0;
      if (toyd::luminance(rgb[0], rgb[1], rgb[2]) <= toyd::kBrightThreshold) continue;
      for (int c = 0; c < 3; ++c)
        f.at(y, x, c) = static_cast<std::uint8_t>(
            std::lround(std::clamp(rgb[c] + dir[c], 0.0, 1.0) * 255.0));
    }
}

// Adds per-frame random chroma dots to the bright lower-half head pixels. The
// dot offsets are orthogonal to the luminance weights, so thresholded oracle
// measurements (mouth opening, face detection) are unaffected; pixel-space
// reconstruction of the masked region, however, cannot predict them.
inline void apply_chroma_speckle(Frame& f, const ToyClipSpec& spec, std::mt19937_64& rng) {
  if (spec.speckle_count <= 0) return;
  const double* u1 = toyd::kChromaU1;
  const double* u2 = toyd::kChromaU2;
  const double cx = f.width / 2.0, cy = f.height / 2.0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const int rad = static_cast<int>(std::ceil(spec.speckle_radius));
  for (int k = 0; k < spec.speckle_count; ++k) {
    double dx, dy;
    do {
      dx = (2.0 * unit(rng) - 1.0) * spec.head_radius_px;
      dy = unit(rng) * spec.head_radius_px;
    } while (dx * dx + dy * dy > spec.head_radius_px * spec.head_radius_px);
    const double th = angle(rng);
    const double amp = spec.speckle_amplitude * (0.5 + 0.5 * unit(rng));
    double dir[3];
    for (int c = 0; c < 3; ++c) dir[c] = amp * (std::cos(th) * u1[c] + std::sin(th) * u2[c]);
    const int px = static_cast<int>(std::lround(cx + dx));
    const int py = static_cast<int>(std::lround(cy + dy));
    for (int y = std::max(0, py - rad); y <= std::min(f.height - 1, py + rad); ++y)
      for (int x = std::max(0, px - rad); x <= std::min(f.width - 1, px + rad); ++x) {
        if (std::hypot(x - px, y - py) > spec.speckle_radius) continue;
        double rgb[3];
        for (int c = 0; c < 3; ++c) rgb[c] = f.at(y, x, c) / 255.0;
        // leave dark features (mouth, eyes) untouched so dark-run oracles hold
        if (toyd::luminance(rgb[0], rgb[1], rgb[2]) <= toyd::kBrightThreshold) continue;
        for (int c = 0; c < 3; ++c)
          f.at(y, x, c) = static_cast<std::uint8_t>(
              std::lround(std::clamp(rgb[c] + dir[c], 0.0, 1.0) * 255.0));
      }
  }
}

// Deterministic toy clip: a 220 Hz tone amplitude-modulated by a smooth random
// envelope (three random-phase sinusoids in 0.3..2 Hz, affinely normalized to
// [0,1]); audio is snapped to the PCM16 grid so the in-memory samples equal
// the WAV round trip.
inline ToyClip make_clip(const ToyClipSpec& spec) {
  spec.validate();
  ToyClip out;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> freq(0.3, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> hue(0.0, 1.0);
  double fr[3], ph[3];
  for (int i = 0; i < 3; ++i) {
    fr[i] = freq(rng);
    ph[i] = phase(rng);
  }
  out.head_color = toyd::hsv_to_rgb(hue(rng), 0.45, 0.9);

  auto raw_env = [&](double t) {
    return std::sin(2 * std::numbers::pi * fr[0] * t + ph[0]) +
           std::sin(2 * std::numbers::pi * fr[1] * t + ph[1]) +
           std::sin(2 * std::numbers::pi * fr[2] * t + ph[2]);
  };
  const std::size_t n_samples = static_cast<std::size_t>(std::llround(spec.duration_s * spec.sample_rate));
  double lo = 1e18, hi = -1e18;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double v = raw_env(i / spec.sample_rate);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = std::max(hi - lo, 1e-12);
  auto env = [&](double t) { return std::clamp((raw_env(t) - lo) / span, 0.0, 1.0); };

  Waveform audio;
  audio.sample_rate = spec.sample_rate;
  audio.samples.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double t = i / spec.sample_rate;
    const double s = 0.8 * env(t) * std::sin(2 * std::numbers::pi * 220.0 * t);
    audio.samples[i] = std::lround(std::clamp(s, -1.0, 1.0) * 32767.0) / 32767.0;
  }

  const int n_frames = static_cast<int>(std::llround(spec.duration_s * spec.fps));
  out.clip.fps = spec.fps;
  out.clip.audio = std::move(audio);
  const double cx = spec.frame_size / 2.0, cy = spec.frame_size / 2.0;
  const int bx = static_cast<int>(std::floor(cx - spec.head_radius_px));
  const int by = static_cast<int>(std::floor(cy - spec.head_radius_px));
  const int bw = static_cast<int>(std::ceil(cx + spec.head_radius_px)) - bx + 1;
  for (int i = 0; i < n_frames; ++i) {
    const double t = i / spec.fps;
    const double e = env(t);
    Frame f = render_toy_frame(spec, out.head_color, e);
    apply_chroma_tint(f, spec, phase(rng), 1.0);
    apply_chroma_speckle(f, spec, rng);
    f.index = i;
    f.timestamp_ms = i * 1000.0 / spec.fps;
    out.clip.frames.push_back(std::move(f));
    out.envelope.push_back(e);
    FaceBox box;
    box.x = bx;
    box.y = by;
    box.w = bw;
    box.h = bw;
    box.frame_index = i;
    out.face_boxes.push_back(box);
    LandmarkSet lm;
    const double a = spec.a_min + (spec.a_max - spec.a_min) * e;
    for (int k = 0; k < 20; ++k) {
      const double th = 2 * std::numbers::pi * k / 20.0;
      lm.push_back({spec.mouth_cx + spec.mouth_half_width * std::cos(th),
                    spec.mouth_cy + a * std::sin(th)});
    }
    out.mouth_landmarks.push_back(std::move(lm));
  }
  return out;
}

// 25 ms RMS at each frame time, affinely normalized to [0,1] per clip. A clip
// with no level variation yields the all-zero envelope.
inline std::vector<double> audio_envelope(const Waveform& w, const std::vector<double>& frame_times_s) {
  if (w.empty()) throw std::invalid_argument("audio_envelope: empty waveform");
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(std::llround(0.0125 * w.sample_rate));
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(w.samples.size());
  std::vector<double> rms;
  rms.reserve(frame_times_s.size());
  for (double t : frame_times_s) {
    const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(std::llround(t * w.sample_rate));
    double acc = 0.0;
    const std::ptrdiff_t len = 2 * half;
    for (std::ptrdiff_t i = c - half; i < c + half; ++i) {
      const double s = w.samples[reflect_index(i, n)];
      acc += s * s;
    }
    rms.push_back(std::sqrt(acc / std::max<std::ptrdiff_t>(len, 1)));
  }
  const auto [lo_it, hi_it] = std::minmax_element(rms.begin(), rms.end());
  const double lo = *lo_it, hi = *hi_it;
  if (hi - lo < 1e-9) return std::vector<double>(rms.size(), 0.0);
  for (double& v : rms) v = (v - lo) / (hi - lo);
  return rms;
}

namespace toyd {
template <typename Img>
double lum_at(const Img& img, int y, int x);

template <>
inline double lum_at<Frame>(const Frame& img, int y, int x) {
  return luminance(img.at(y, x, 0) / 255.0, img.at(y, x, 1) / 255.0, img.at(y, x, 2) / 255.0);
}
}  // namespace toyd

// Counts dark (mouth-colored) pixels along a vertical line between bright face
// pixels and converts the run to a semi-axis estimate in pixels. Returns 0
// when no mouth pixels are found.
template <typename GetLum>
double measure_mouth_opening_impl(int height, int center_col, GetLum lum) {
  int first_bright = -1, last_bright = -1;
  for (int y = 0; y < height; ++y) {
    if (lum(y, center_col) > toyd::kBrightThreshold) {
      if (first_bright < 0) first_bright = y;
      last_bright = y;
    }
  }
  if (first_bright < 0) return 0.0;
  // The mouth is the dark run in the lower half of the face column; eye rows
  // do not intersect the center column.
  int count = 0;
  const int mid = (first_bright + last_bright) / 2;
  for (int y = mid; y <= last_bright; ++y)
    if (lum(y, center_col) < toyd::kDarkThreshold) ++count;
  return std::max(0, count - 1) / 2.0;
}

inline double measure_mouth_opening(const Frame& f) {
  return measure_mouth_opening_impl(f.height, f.width / 2, [&](int y, int x) {
    return toyd::luminance(f.at(y, x, 0) / 255.0, f.at(y, x, 1) / 255.0, f.at(y, x, 2) / 255.0);
  });
}

template <typename S>
double measure_mouth_opening(const Image<S>& img) {
  return measure_mouth_opening_impl(img.height, img.width / 2, [&](int y, int x) {
    return toyd::luminance(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
  });
}

}  // namespace lipgan
