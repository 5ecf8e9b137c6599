#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lipgan/corpus.hpp"
#include "lipgan/model.hpp"
#include "lipgan/training.hpp"

namespace lipgan {

// Peak signal-to-noise ratio with peak 1.0, capped at 100 dB for identical
// inputs.
template <typename S>
double psnr(const Image<S>& a, const Image<S>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  const double mse = (a.data - b.data).template cast<double>().array().square().mean();
  if (mse <= 0.0) return 100.0;
  return std::min(100.0, 10.0 * std::log10(1.0 / mse));
}

// Mean local SSIM on the luminance channel: 11x11 Gaussian window (sigma 1.5),
// K1=0.01, K2=0.03, dynamic range 1.0, averaged over pixels where the full
// window fits.
template <typename S>
double ssim(const Image<S>& a, const Image<S>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  const int h = a.height, w = a.width;
  auto lum = [](const Image<S>& img, int y, int x) {
    if (img.channels == 1) return static_cast<double>(img.at(y, x, 0));
    return 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
  };
  constexpr int radius = 5;
  constexpr double sigma = 1.5;
  double kernel[2 * radius + 1][2 * radius + 1];
  double ksum = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      kernel[dy + radius][dx + radius] = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
      ksum += kernel[dy + radius][dx + radius];
    }
  for (auto& row : kernel)
    for (auto& v : row) v /= ksum;

  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double acc = 0.0;
  long count = 0;
  for (int y = radius; y < h - radius; ++y) {
    for (int x = radius; x < w - radius; ++x) {
      double ua = 0, ub = 0, uaa = 0, ubb = 0, uab = 0;
      for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) {
          const double k = kernel[dy + radius][dx + radius];
          const double va = lum(a, y + dy, x + dx);
          const double vb = lum(b, y + dy, x + dx);
          ua += k * va;
          ub += k * vb;
          uaa += k * va * va;
          ubb += k * vb * vb;
          uab += k * va * vb;
        }
      const double vara = uaa - ua * ua;
      const double varb = ubb - ub * ub;
      const double cov = uab - ua * ub;
      acc += ((2 * ua * ub + c1) * (2 * cov + c2)) /
             ((ua * ua + ub * ub + c1) * (vara + varb + c2));
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("ssim: image smaller than the filter window");
  return acc / count;
}

// Mean Euclidean distance over corresponding landmark points.
inline double lmd(const LandmarkSet& a, const LandmarkSet& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("lmd: landmark count mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    acc += std::hypot(a[i].first - b[i].first, a[i].second - b[i].second);
  return acc / static_cast<double>(a.size());
}

inline double lmd(const std::vector<LandmarkSet>& a, const std::vector<LandmarkSet>& b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("lmd: frame count mismatch");
  double acc = 0.0;
  for (size_t i = 0; i < a.size(); ++i) acc += lmd(a[i], b[i]);
  return acc / static_cast<double>(a.size());
}

struct SyncScore {
  double roc_auc = 0.0;
  double accuracy = 0.0;
};

// ROC-AUC over discriminator distances with smaller d meaning "synced"
// (label 0), plus accuracy at d < threshold.
inline SyncScore sync_score_from_distances(const std::vector<double>& d,
                                           const std::vector<int>& labels, double threshold) {
  if (d.size() != labels.size() || d.empty())
    throw std::invalid_argument("sync_score: size mismatch or empty");
  long n_sync = std::count(labels.begin(), labels.end(), 0);
  long n_unsync = static_cast<long>(labels.size()) - n_sync;
  if (n_sync == 0 || n_unsync == 0)
    throw std::invalid_argument("sync_score: AUC undefined for single-class input");
  // AUC = P(d_sync < d_unsync) + 0.5 P(tie).
  double wins = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    if (labels[i] != 0) continue;
    for (size_t j = 0; j < d.size(); ++j) {
      if (labels[j] == 0) continue;
      if (d[i] < d[j]) wins += 1.0;
      else if (d[i] == d[j]) wins += 0.5;
    }
  }
  SyncScore s;
  s.roc_auc = wins / (static_cast<double>(n_sync) * n_unsync);
  long correct = 0;
  for (size_t i = 0; i < d.size(); ++i) {
    const int pred = d[i] < threshold ? 0 : 1;
    if (pred == labels[i]) ++correct;
  }
  s.accuracy = static_cast<double>(correct) / static_cast<double>(d.size());
  return s;
}

template <typename S>
SyncScore sync_score(const ParamStore<S>& params, const std::vector<SyncSample<S>>& pairs,
                     double threshold, const ArchitectureConfig& cfg) {
  std::vector<double> d;
  std::vector<int> labels;
  for (const auto& p : pairs) {
    Tape<S> tape(params);
    d.push_back(discriminator_forward(tape, p.face, p.audio, cfg).distance->val(0, 0));
    labels.push_back(p.label);
  }
  return sync_score_from_distances(d, labels, threshold);
}

// Mean absolute activation of the penultimate decoder layer, resized to
// H x H and min-max normalized; constant activations map to all zeros.
template <typename S>
Image<double> activation_heatmap(const ParamStore<S>& params, const GeneratorInput<S>& x,
                                 const MfccHeatmap& a, const ArchitectureConfig& cfg) {
  Tape<S> tape(params);
  auto out = generator_forward(tape, x, a, cfg);
  const auto& p = out.penultimate;
  Image<double> map(p->H, p->W, 1);
  for (Eigen::Index r = 0; r < p->val.rows(); ++r)
    map.data(r, 0) = p->val.row(r).template cast<double>().cwiseAbs().mean();
  if (map.height != cfg.face_size || map.width != cfg.face_size)
    map = resize_bilinear(map, cfg.face_size, cfg.face_size);
  const double lo = map.data.minCoeff(), hi = map.data.maxCoeff();
  if (hi - lo < 1e-12) {
    map.data.setZero();
    return map;
  }
  map.data = (map.data.array() - lo) / (hi - lo);
  return map;
}

// Fraction of heatmap mass in the lower-half rows.
inline double lower_half_mass(const Image<double>& heatmap) {
  const double total = heatmap.data.sum();
  if (total <= 0) return 0.0;
  const int from = heatmap.height / 2;
  const int rows = (heatmap.height - from) * heatmap.width;
  return heatmap.data.block(from * heatmap.width, 0, rows, heatmap.channels).sum() / total;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: size mismatch");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double num = 0, da = 0, db = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    da += (a[i] - ma) * (a[i] - ma);
    db += (b[i] - mb) * (b[i] - mb);
  }
  if (da <= 0 || db <= 0) return 0.0;
  return num / std::sqrt(da * db);
}

}  // namespace lipgan
