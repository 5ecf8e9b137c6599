#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "lipgan/clip.hpp"
#include "lipgan/mfcc.hpp"
#include "lipgan/model.hpp"

namespace lipgan {

struct LossConfig {
  double margin = 2.0;
  double adv_weight = 1.0;
  double recon_weight = 1.0;
};

struct TrainConfig {
  int batch_size = 32;
  double learning_rate = 1e-3;
  double d_lr_multiplier = 1.0;  // discriminator lr = learning_rate * this
  int steps = 1000;
  std::uint64_t seed = 0;
  double window_ms = 350.0;
  double exclusion_ms = 500.0;  // minimum |t(S') - t(S)|
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int checkpoint_every = 0;  // 0 => only final
};

// One training draw: ground-truth synced face S, its masked version S_m, an
// out-of-window face S', and the MFCC heatmap of the audio window around S.
template <typename S>
struct TrainingTuple {
  Image<S> target;      // S
  Image<S> target_masked;  // S_m
  Image<S> unsynced;    // S'
  MfccHeatmap audio;    // A
};

template <typename S>
struct SyncSample {
  Image<S> face;
  MfccHeatmap audio;
  int label = 0;  // y: 0 synced actual, 1 generated or unsynced
};

// Per-frame face crops plus the clip audio; the form the sampler draws from.
template <typename S>
struct TrainClip {
  std::vector<Image<S>> crops;
  std::vector<double> timestamps_ms;
  Waveform audio;
  double fps = 25.0;
};

// --- losses (analytic forms) ---

inline double contrastive_loss(const std::vector<double>& d, const std::vector<int>& y,
                               double margin) {
  if (d.size() != y.size()) throw std::invalid_argument("contrastive_loss: length mismatch");
  if (d.empty()) throw std::invalid_argument("contrastive_loss: empty batch");
  double acc = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    const double hinge = std::max(0.0, margin - d[i]);
    acc += y[i] * d[i] * d[i] + (1 - y[i]) * hinge * hinge;
  }
  return acc / (2.0 * static_cast<double>(d.size()));
}

template <typename S>
double reconstruction_loss(const Image<S>& predicted, const Image<S>& target) {
  if (!predicted.same_shape(target))
    throw std::invalid_argument("reconstruction_loss: shape mismatch");
  return (predicted.data - target.data).template cast<double>().cwiseAbs().mean();
}

// --- tape loss ops ---

// One contrastive term (unnormalized): y=1 -> d^2 / 2, y=0 -> max(0, m-d)^2 / 2.
template <typename S>
TensorPtr<S> contrastive_term(Tape<S>& tape, const TensorPtr<S>& d, int label, S margin) {
  auto out = tape.make(1, 1, 1, d->needs_grad);
  const S dv = d->val(0, 0);
  out->val.resize(1, 1);
  if (label == 1) {
    out->val(0, 0) = dv * dv / S(2);
  } else {
    const S h = std::max(S(0), margin - dv);
    out->val(0, 0) = h * h / S(2);
  }
  if (tape.recording() && d->needs_grad) {
    tape.ops.push_back([d, out, label, margin, dv]() {
      d->ensure_grad();
      if (label == 1)
        d->grad(0, 0) += out->grad(0, 0) * dv;
      else if (dv < margin)
        d->grad(0, 0) -= out->grad(0, 0) * (margin - dv);
    });
  }
  return out;
}

// Mean absolute difference against a fixed target image.
template <typename S>
TensorPtr<S> l1_loss(Tape<S>& tape, const TensorPtr<S>& x, const Image<S>& target) {
  if (x->H != target.height || x->W != target.width || x->C != target.channels)
    throw std::invalid_argument("l1_loss: shape mismatch");
  auto out = tape.make(1, 1, 1, x->needs_grad);
  const auto diff = (x->val - target.data).eval();
  const S n = static_cast<S>(diff.size());
  out->val.resize(1, 1);
  out->val(0, 0) = diff.cwiseAbs().sum() / n;
  if (tape.recording() && x->needs_grad) {
    tape.ops.push_back([x, out, diff, n]() {
      x->ensure_grad();
      x->grad.array() += out->grad(0, 0) / n * diff.array().unaryExpr([](S v) {
        return v > S(0) ? S(1) : (v < S(0) ? S(-1) : S(0));
      });
    });
  }
  return out;
}

template <typename S>
TensorPtr<S> scale(Tape<S>& tape, const TensorPtr<S>& x, S k) {
  auto out = tape.make(x->H, x->W, x->C, x->needs_grad);
  out->val = x->val * k;
  if (tape.recording() && x->needs_grad) {
    tape.ops.push_back([x, out, k]() {
      x->ensure_grad();
      x->grad += out->grad * k;
    });
  }
  return out;
}

// --- sampling ---

// Draw one training tuple: a uniformly placed audio window, the frame nearest
// its center as S, and S' from frames at least exclusion_ms away.
template <typename S>
TrainingTuple<S> sample_tuple(const TrainClip<S>& clip, std::mt19937_64& rng,
                              const MfccConfig& mfcc_cfg = {}, double window_ms = 350.0,
                              double exclusion_ms = 500.0) {
  const size_t k = clip.crops.size();
  const size_t min_frames = static_cast<size_t>(std::ceil(window_ms / 1000.0 * clip.fps)) + 2;
  if (k < min_frames || clip.audio.empty())
    throw std::invalid_argument("sample_tuple: clip too short or missing audio");
  const double duration_ms = clip.timestamps_ms.back();
  std::uniform_real_distribution<double> place(0.0, duration_ms);
  const double center_ms = place(rng);
  size_t s_idx = 0;
  double best = 1e18;
  for (size_t i = 0; i < k; ++i) {
    const double dist = std::abs(clip.timestamps_ms[i] - center_ms);
    if (dist < best) {
      best = dist;
      s_idx = i;
    }
  }
  std::vector<size_t> eligible;
  for (size_t i = 0; i < k; ++i)
    if (std::abs(clip.timestamps_ms[i] - center_ms) >= exclusion_ms) eligible.push_back(i);
  if (eligible.empty()) throw std::invalid_argument("sample_tuple: no eligible out-of-window frame");
  std::uniform_int_distribution<size_t> pick(0, eligible.size() - 1);
  const size_t sp_idx = eligible[pick(rng)];

  TrainingTuple<S> t;
  t.target = clip.crops[s_idx];
  t.target_masked = mask_lower_half(t.target);
  t.unsynced = clip.crops[sp_idx];
  t.audio = compute_mfcc(extract_window(clip.audio, center_ms, window_ms), mfcc_cfg);
  return t;
}

// --- discriminator batch construction ---

// Three samples per tuple: (generated, A) y=1, (S, A) y=0, (S', A) y=1,
// shuffled under the provided stream. The unsynced-actual type keeps the
// discriminator from ignoring the audio input.
template <typename S>
std::vector<SyncSample<S>> build_discriminator_batch(const std::vector<TrainingTuple<S>>& tuples,
                                                     const std::vector<Image<S>>& generated,
                                                     std::mt19937_64& rng) {
  if (tuples.size() != generated.size())
    throw std::invalid_argument("build_discriminator_batch: tuple/generated length mismatch");
  std::vector<SyncSample<S>> batch;
  batch.reserve(tuples.size() * 3);
  for (size_t i = 0; i < tuples.size(); ++i) {
    batch.push_back({generated[i], tuples[i].audio, 1});
    batch.push_back({tuples[i].target, tuples[i].audio, 0});
    batch.push_back({tuples[i].unsynced, tuples[i].audio, 1});
  }
  std::shuffle(batch.begin(), batch.end(), rng);
  return batch;
}

// --- optimizer ---

template <typename S>
struct AdamState {
  ParamStore<S> m, v;
  std::int64_t t = 0;

  // Applies one Adam step to parameters whose names start with `prefix`.
  void update(ParamStore<S>& params, const ParamStore<S>& grads, const TrainConfig& cfg,
              const std::string& prefix) {
    ++t;
    const S b1 = static_cast<S>(cfg.adam_beta1), b2 = static_cast<S>(cfg.adam_beta2);
    const S corr1 = S(1) - static_cast<S>(std::pow(cfg.adam_beta1, static_cast<double>(t)));
    const S corr2 = S(1) - static_cast<S>(std::pow(cfg.adam_beta2, static_cast<double>(t)));
    const S lr = static_cast<S>(cfg.learning_rate);
    const S eps = static_cast<S>(cfg.adam_eps);
    for (auto& [name, p] : params.tensors) {
      if (name.rfind(prefix, 0) != 0) continue;
      auto git = grads.tensors.find(name);
      if (git == grads.tensors.end()) continue;
      const auto& g = git->second;
      using Mat = typename ParamStore<S>::Mat;
      auto& mm = m.tensors.try_emplace(name, Mat::Zero(p.rows(), p.cols())).first->second;
      auto& vv = v.tensors.try_emplace(name, Mat::Zero(p.rows(), p.cols())).first->second;
      mm = b1 * mm + (S(1) - b1) * g;
      vv = (b2 * vv).array() + (S(1) - b2) * g.array().square();
      p.array() -= lr * (mm.array() / corr1) / ((vv.array() / corr2).sqrt() + eps);
    }
  }
};

struct LossReport {
  double l_re = 0.0;
  double l_real = 0.0;
  double l_fake = 0.0;
  double l_a = 0.0;
};

// Forward-only evaluation of the Eq-style GAN terms on an assembled batch:
// L_real over actual-frame samples, L_fake over generated ones, L_a their sum.
template <typename S>
LossReport adversarial_losses(const ParamStore<S>& params, const std::vector<SyncSample<S>>& batch,
                              const std::vector<bool>& is_generated, const ArchitectureConfig& cfg,
                              const LossConfig& loss_cfg) {
  if (batch.size() != is_generated.size())
    throw std::invalid_argument("adversarial_losses: batch/flag length mismatch");
  std::vector<double> d_real, d_fake;
  std::vector<int> y_real, y_fake;
  for (size_t i = 0; i < batch.size(); ++i) {
    Tape<S> tape(params);
    const double d = discriminator_forward(tape, batch[i].face, batch[i].audio, cfg).distance->val(0, 0);
    if (is_generated[i]) {
      d_fake.push_back(d);
      y_fake.push_back(1);
    } else {
      d_real.push_back(d);
      y_real.push_back(batch[i].label);
    }
  }
  LossReport r;
  r.l_real = d_real.empty() ? 0.0 : contrastive_loss(d_real, y_real, loss_cfg.margin);
  r.l_fake = d_fake.empty() ? 0.0 : contrastive_loss(d_fake, y_fake, loss_cfg.margin);
  r.l_a = r.l_real + r.l_fake;
  return r;
}

// One discriminator update then one generator update on a batch of tuples.
//
// The discriminator ascends L_a; implemented as descending the label-flipped
// contrastive loss, which is gradient-equivalent and keeps one minimizing
// optimizer path: synced pairs are driven toward d=0 and unsynced/generated
// pairs toward d>=m. The generator descends
// adv_weight * L_c(D(G([S';S_m],A),A), y=1) + recon_weight * L_Re.
template <typename S>
LossReport train_step(ParamStore<S>& params, const std::vector<TrainingTuple<S>>& tuples,
                      const TrainConfig& cfg, const LossConfig& loss_cfg,
                      const ArchitectureConfig& arch, AdamState<S>& opt_d, AdamState<S>& opt_g,
                      std::mt19937_64& rng, std::uint64_t step) {
  if (tuples.empty()) throw std::invalid_argument("train_step: empty batch");
  const S margin = static_cast<S>(loss_cfg.margin);
  LossReport report;

  // Generated faces for the discriminator batch (no generator gradients).
  std::vector<Image<S>> generated;
  generated.reserve(tuples.size());
  for (const auto& t : tuples) {
    Tape<S> tape(params);
    auto gi = GeneratorInput<S>::make(t.unsynced, t.target);
    generated.push_back(tensor_to_image(generator_forward(tape, gi, t.audio, arch).face));
  }

  auto batch = build_discriminator_batch(tuples, generated, rng);

  // Discriminator step (flipped labels).
  {
    ParamStore<S> grads;
    const S inv = S(1) / static_cast<S>(batch.size());
    for (const auto& s : batch) {
      Tape<S> tape(params, &grads);
      auto d = discriminator_forward(tape, s.face, s.audio, arch).distance;
      const int flipped = 1 - s.label;
      auto loss = scale(tape, contrastive_term(tape, d, flipped, margin), inv);
      tape.backward(loss);
    }
    TrainConfig d_cfg = cfg;
    d_cfg.learning_rate = cfg.learning_rate * cfg.d_lr_multiplier;
    opt_d.update(params, grads, d_cfg, "d/");
  }

  // L_real / L_fake for the report, computed per sample type at the updated
  // discriminator.
  {
    std::vector<double> dr, df;
    std::vector<int> yr, yf;
    for (size_t i = 0; i < tuples.size(); ++i) {
      Tape<S> t1(params), t2(params), t3(params);
      df.push_back(discriminator_forward(t1, generated[i], tuples[i].audio, arch).distance->val(0, 0));
      yf.push_back(1);
      dr.push_back(discriminator_forward(t2, tuples[i].target, tuples[i].audio, arch).distance->val(0, 0));
      yr.push_back(0);
      dr.push_back(discriminator_forward(t3, tuples[i].unsynced, tuples[i].audio, arch).distance->val(0, 0));
      yr.push_back(1);
    }
    report.l_real = contrastive_loss(dr, yr, loss_cfg.margin);
    report.l_fake = contrastive_loss(df, yf, loss_cfg.margin);
    report.l_a = report.l_real + report.l_fake;
  }

  // Generator step.
  {
    ParamStore<S> grads;
    const S n = static_cast<S>(tuples.size());
    double l_re_acc = 0.0;
    for (const auto& t : tuples) {
      Tape<S> tape(params, &grads);
      auto gi = GeneratorInput<S>::make(t.unsynced, t.target);
      auto in = image_tensor<S>(tape, gi.stacked, /*needs_grad=*/false);
      auto gen = generator_forward(tape, in, t.audio, arch);
      auto recon = l1_loss(tape, gen.face, t.target);
      l_re_acc += recon->val(0, 0);
      auto disc = discriminator_forward(tape, gen.face, t.audio, arch);
      auto adv = contrastive_term(tape, disc.distance, 1, margin);
      auto loss = add(tape,
                      scale(tape, adv, static_cast<S>(loss_cfg.adv_weight) / n),
                      scale(tape, recon, static_cast<S>(loss_cfg.recon_weight) / n));
      tape.backward(loss);
    }
    report.l_re = l_re_acc / tuples.size();
    if (!std::isfinite(report.l_re) || !std::isfinite(report.l_a))
      throw std::runtime_error("train_step: non-finite loss at step " + std::to_string(step));
    opt_g.update(params, grads, cfg, "g/");
  }
  return report;
}

// Central-difference gradient verification on a random coordinate subset.
// `loss` evaluates the objective; `analytic` fills a gradient store.
inline double finite_difference_check(
    const std::function<double(const ParamStore<double>&)>& loss,
    const std::function<void(const ParamStore<double>&, ParamStore<double>&)>& analytic,
    ParamStore<double> params, double eps = 1e-4, std::uint64_t seed = 0, int coords = 64) {
  ParamStore<double> grads;
  analytic(params, grads);

  std::vector<std::pair<std::string, Eigen::Index>> all;
  for (const auto& [name, mat] : params.tensors)
    for (Eigen::Index i = 0; i < mat.size(); ++i) all.push_back({name, i});
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  const int n = std::min<int>(coords, static_cast<int>(all.size()));

  double max_rel = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto& [name, idx] = all[static_cast<size_t>(k)];
    double& x = params.tensors.at(name).data()[idx];
    const double orig = x;
    const double step = eps * std::max(1.0, std::abs(orig));
    x = orig + step;
    const double lp = loss(params);
    x = orig - step;
    const double lm = loss(params);
    x = orig;
    const double fd = (lp - lm) / (2.0 * step);
    double an = 0.0;
    auto it = grads.tensors.find(name);
    if (it != grads.tensors.end()) an = it->second.data()[idx];
    const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
    max_rel = std::max(max_rel, std::abs(fd - an) / denom);
  }
  return max_rel;
}

}  // namespace lipgan
