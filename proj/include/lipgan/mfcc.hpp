#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "lipgan/audio.hpp"

namespace lipgan {

// M x T_f acoustic feature map for one audio window (single channel).
struct MfccHeatmap {
  Eigen::MatrixXd values;  // M rows x T_f cols
  int coeff_count() const { return static_cast<int>(values.rows()); }
  int frame_count() const { return static_cast<int>(values.cols()); }
};

struct MfccConfig {
  double sample_rate = 16000.0;
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int fft_size = 512;
  int mel_filters = 26;
  int num_ceps = 13;      // computed before discarding
  bool discard_first = true;
  double low_freq_hz = 0.0;
  double high_freq_hz = 8000.0;
  double log_floor = 1e-10;

  bool operator==(const MfccConfig&) const = default;
};

namespace detail {

// In-place iterative radix-2 FFT.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

}  // namespace detail

// Precomputed analysis tables for one MFCC configuration.
class MfccExtractor {
 public:
  explicit MfccExtractor(const MfccConfig& cfg = {}) : cfg_(cfg) {
    frame_len_ = static_cast<int>(std::llround(cfg.frame_ms * cfg.sample_rate / 1000.0));
    hop_len_ = static_cast<int>(std::llround(cfg.hop_ms * cfg.sample_rate / 1000.0));
    if (cfg.fft_size < frame_len_) throw std::invalid_argument("MfccExtractor: fft_size < frame length");
    window_.resize(frame_len_);
    for (int i = 0; i < frame_len_; ++i)
      window_[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (frame_len_ - 1));
    build_filterbank();
    build_dct();
  }

  const MfccConfig& config() const { return cfg_; }
  int frame_length() const { return frame_len_; }
  int hop_length() const { return hop_len_; }

  // 13 cepstra per frame with the first discarded -> 12 x T_f heatmap.
  // Frame i is centered at i*hop + hop/2 within the window, reflect-padded at
  // both ends, so a 350 ms window at 100 frames/s yields exactly 35 frames.
  MfccHeatmap compute(const AudioWindow& win) const {
    if (std::llround(win.sample_rate) != std::llround(cfg_.sample_rate))
      throw std::invalid_argument("compute_mfcc: window sample rate mismatch");
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(win.samples.size());
    if (n < 1) throw std::invalid_argument("compute_mfcc: empty window");
    const int t_frames = static_cast<int>(n / hop_len_);
    if (t_frames < 1) throw std::invalid_argument("compute_mfcc: window shorter than one analysis frame");
    const int out_rows = cfg_.discard_first ? cfg_.num_ceps - 1 : cfg_.num_ceps;
    MfccHeatmap out;
    out.values.resize(out_rows, t_frames);
    const int bins = cfg_.fft_size / 2 + 1;
    std::vector<std::complex<double>> buf(cfg_.fft_size);
    Eigen::VectorXd power(bins), mel_log(cfg_.mel_filters);
    for (int t = 0; t < t_frames; ++t) {
      const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(t) * hop_len_ + hop_len_ / 2;
      const std::ptrdiff_t start = center - frame_len_ / 2;
      for (int i = 0; i < cfg_.fft_size; ++i) {
        if (i < frame_len_)
          buf[i] = win.samples[reflect_index(start + i, n)] * window_[i];
        else
          buf[i] = 0.0;
      }
      detail::fft_radix2(buf);
      for (int k = 0; k < bins; ++k) power[k] = std::norm(buf[k]);
      mel_log = (filterbank_ * power).cwiseMax(cfg_.log_floor).array().log();
      const Eigen::VectorXd ceps = dct_ * mel_log;
      const int first = cfg_.discard_first ? 1 : 0;
      out.values.col(t) = ceps.segment(first, out_rows);
    }
    return out;
  }

 private:
  void build_filterbank() {
    const int bins = cfg_.fft_size / 2 + 1;
    filterbank_ = Eigen::MatrixXd::Zero(cfg_.mel_filters, bins);
    const double mel_lo = detail::hz_to_mel(cfg_.low_freq_hz);
    const double mel_hi = detail::hz_to_mel(cfg_.high_freq_hz);
    std::vector<double> edges(cfg_.mel_filters + 2);
    for (int i = 0; i < cfg_.mel_filters + 2; ++i)
      edges[i] = detail::mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg_.mel_filters + 1));
    for (int m = 0; m < cfg_.mel_filters; ++m) {
      const double f_lo = edges[m], f_c = edges[m + 1], f_hi = edges[m + 2];
      for (int k = 0; k < bins; ++k) {
        const double f = k * cfg_.sample_rate / cfg_.fft_size;
        double w = 0.0;
        if (f >= f_lo && f <= f_c && f_c > f_lo)
          w = (f - f_lo) / (f_c - f_lo);
        else if (f > f_c && f <= f_hi && f_hi > f_c)
          w = (f_hi - f) / (f_hi - f_c);
        filterbank_(m, k) = w;
      }
    }
  }

  // Orthonormal DCT-II over the mel log energies.
  void build_dct() {
    const int n = cfg_.mel_filters;
    dct_.resize(cfg_.num_ceps, n);
    for (int k = 0; k < cfg_.num_ceps; ++k) {
      const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
      for (int j = 0; j < n; ++j)
        dct_(k, j) = scale * std::cos(std::numbers::pi * k * (2 * j + 1) / (2.0 * n));
    }
  }

  MfccConfig cfg_;
  int frame_len_ = 0;
  int hop_len_ = 0;
  std::vector<double> window_;
  Eigen::MatrixXd filterbank_;  // mel_filters x bins
  Eigen::MatrixXd dct_;         // num_ceps x mel_filters
};

inline MfccHeatmap compute_mfcc(const AudioWindow& win, const MfccConfig& cfg = {}) {
  static thread_local MfccExtractor* cached = nullptr;
  static thread_local MfccConfig cached_cfg;
  if (!cached || !(cached_cfg == cfg)) {
    delete cached;
    cached = new MfccExtractor(cfg);
    cached_cfg = cfg;
  }
  return cached->compute(win);
}

}  // namespace lipgan
