#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipgan {

struct Waveform {
  std::vector<double> samples;  // [-1, 1]
  double sample_rate = 16000.0;

  bool empty() const { return samples.empty(); }
  double duration_s() const { return samples.size() / sample_rate; }
};

struct AudioWindow {
  std::vector<double> samples;
  double sample_rate = 16000.0;
  double span_ms = 350.0;
  double center_ms = 0.0;
};

// Index with reflection at both ends (no repeated edge sample).
inline std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

// Band-limited resample via windowed-sinc interpolation (Hann window, 32 taps
// per side, cutoff at the lower of the two Nyquist frequencies).
inline Waveform resample(const Waveform& w, double target_rate) {
  if (target_rate <= 0) throw std::invalid_argument("resample: target_rate must be positive");
  if (w.sample_rate == target_rate || w.empty()) {
    Waveform out = w;
    out.sample_rate = target_rate;
    return out;
  }
  const double ratio = target_rate / w.sample_rate;
  const double cutoff = std::min(1.0, ratio);  // relative to source Nyquist
  const int taps = 32;
  const std::ptrdiff_t n_in = static_cast<std::ptrdiff_t>(w.samples.size());
  const std::ptrdiff_t n_out = static_cast<std::ptrdiff_t>(std::llround(n_in * ratio));
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(n_out);
  for (std::ptrdiff_t i = 0; i < n_out; ++i) {
    const double t = i / ratio;  // position in source samples
    const std::ptrdiff_t k0 = static_cast<std::ptrdiff_t>(std::floor(t)) - taps + 1;
    double acc = 0.0, wsum = 0.0;
    for (std::ptrdiff_t k = k0; k < k0 + 2 * taps; ++k) {
      const double dx = t - k;
      const double window = 0.5 + 0.5 * std::cos(std::numbers::pi * dx / taps);
      if (std::abs(dx) > taps) continue;
      const double arg = std::numbers::pi * cutoff * dx;
      const double sinc = std::abs(arg) < 1e-12 ? 1.0 : std::sin(arg) / arg;
      const double coef = cutoff * sinc * window;
      acc += coef * w.samples[reflect_index(k, n_in)];
      wsum += coef;
    }
    out.samples[i] = std::clamp(wsum > 1e-12 ? acc / wsum * 1.0 : acc, -1.0, 1.0);
  }
  return out;
}

// Window of span_ms centered at center_ms; out-of-range regions reflect-padded.
inline AudioWindow extract_window(const Waveform& w, double center_ms, double span_ms = 350.0) {
  if (w.empty()) throw std::invalid_argument("extract_window: empty waveform");
  AudioWindow win;
  win.sample_rate = w.sample_rate;
  win.span_ms = span_ms;
  win.center_ms = center_ms;
  const std::ptrdiff_t length =
      static_cast<std::ptrdiff_t>(std::llround(span_ms * w.sample_rate / 1000.0));
  const std::ptrdiff_t center =
      static_cast<std::ptrdiff_t>(std::llround(center_ms * w.sample_rate / 1000.0));
  const std::ptrdiff_t start = center - length / 2;
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(w.samples.size());
  win.samples.resize(length);
  for (std::ptrdiff_t i = 0; i < length; ++i)
    win.samples[i] = w.samples[reflect_index(start + i, n)];
  return win;
}

// --- WAV PCM16 mono I/O ---

namespace detail {
inline void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
}  // namespace detail

inline void write_wav(const std::string& path, const Waveform& w) {
  std::vector<std::uint8_t> buf;
  const std::uint32_t n = static_cast<std::uint32_t>(w.samples.size());
  const std::uint32_t rate = static_cast<std::uint32_t>(std::llround(w.sample_rate));
  const std::uint32_t data_bytes = n * 2;
  buf.reserve(44 + data_bytes);
  buf.insert(buf.end(), {'R', 'I', 'F', 'F'});
  detail::put_u32(buf, 36 + data_bytes);
  buf.insert(buf.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  detail::put_u32(buf, 16);
  detail::put_u16(buf, 1);  // PCM
  detail::put_u16(buf, 1);  // mono
  detail::put_u32(buf, rate);
  detail::put_u32(buf, rate * 2);
  detail::put_u16(buf, 2);
  detail::put_u16(buf, 16);
  buf.insert(buf.end(), {'d', 'a', 't', 'a'});
  detail::put_u32(buf, data_bytes);
  for (double s : w.samples) {
    const double c = std::clamp(s, -1.0, 1.0);
    const std::int16_t q = static_cast<std::int16_t>(std::lround(c * 32767.0));
    detail::put_u16(buf, static_cast<std::uint16_t>(q));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_wav: cannot open " + path);
  f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("write_wav: write failure on " + path);
}

inline Waveform read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_wav: cannot open " + path);
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  auto u16 = [&](size_t o) { return static_cast<std::uint16_t>(buf[o] | (buf[o + 1] << 8)); };
  auto u32 = [&](size_t o) {
    return static_cast<std::uint32_t>(buf[o] | (buf[o + 1] << 8) | (buf[o + 2] << 16) |
                                      (static_cast<std::uint32_t>(buf[o + 3]) << 24));
  };
  if (buf.size() < 44 || std::memcmp(buf.data(), "RIFF", 4) != 0 ||
      std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
    throw std::runtime_error("read_wav: not a RIFF/WAVE file: " + path);
  // Walk chunks; require PCM16.
  size_t pos = 12;
  std::uint16_t channels = 0, bits = 0;
  std::uint32_t rate = 0;
  Waveform w;
  bool got_fmt = false, got_data = false;
  while (pos + 8 <= buf.size()) {
    const std::uint32_t size = u32(pos + 4);
    const std::uint8_t* id = buf.data() + pos;
    const size_t body = pos + 8;
    if (std::memcmp(id, "fmt ", 4) == 0 && body + 16 <= buf.size()) {
      const std::uint16_t format = u16(body);
      channels = u16(body + 2);
      rate = u32(body + 4);
      bits = u16(body + 14);
      if (format != 1 || bits != 16)
        throw std::runtime_error("read_wav: only PCM16 supported: " + path);
      got_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!got_fmt) throw std::runtime_error("read_wav: data before fmt: " + path);
      const size_t end = std::min(static_cast<size_t>(body + size), buf.size());
      const size_t frames = (end - body) / (2 * channels);
      w.samples.resize(frames);
      for (size_t i = 0; i < frames; ++i) {
        // Downmix by averaging channels.
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
          const std::int16_t q = static_cast<std::int16_t>(u16(body + (i * channels + c) * 2));
          acc += q / 32767.0;
        }
        w.samples[i] = std::clamp(acc / channels, -1.0, 1.0);
      }
      got_data = true;
    }
    pos = body + size + (size % 2);
  }
  if (!got_data) throw std::runtime_error("read_wav: missing data chunk: " + path);
  w.sample_rate = rate;
  return w;
}

}  // namespace lipgan
