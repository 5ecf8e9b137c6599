#pragma once

#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "lipgan/checkpoint.hpp"
#include "lipgan/corpus_io.hpp"
#include "lipgan/detect.hpp"
#include "lipgan/pipeline.hpp"
#include "lipgan/training.hpp"

namespace lipgan {

// Face crops for a whole clip, produced by the detector (training is
// self-supervised: labels on disk are never consulted here).
template <typename S>
TrainClip<S> prepare_train_clip(const VideoClip& clip, int face_size,
                                const FaceDetector& detector) {
  TrainClip<S> out;
  out.fps = clip.fps;
  if (clip.audio) out.audio = *clip.audio;
  for (const auto& frame : clip.frames) {
    FaceBox box;
    try {
      box = detect_face(frame, detector);
    } catch (const NoFaceError&) {
      continue;  // frames without a detectable face are dropped from sampling
    }
    out.crops.push_back(crop_resize<S>(frame, box, face_size));
    out.timestamps_ms.push_back(frame.timestamp_ms);
  }
  return out;
}

template <typename S>
std::vector<TrainClip<S>> load_train_clips(const std::string& data_dir, int face_size) {
  namespace fs = std::filesystem;
  const CorpusManifest manifest = read_manifest(data_dir);
  BrightBlobDetector detector;
  std::vector<TrainClip<S>> clips;
  for (const auto& name : manifest.train) {
    const VideoClip media = load_clip_media((fs::path(data_dir) / name).string());
    TrainClip<S> tc = prepare_train_clip<S>(media, face_size, detector);
    if (!tc.crops.empty() && !tc.audio.empty()) clips.push_back(std::move(tc));
  }
  if (clips.empty())
    throw std::runtime_error("load_train_clips: no usable clips in " + data_dir);
  return clips;
}

// Reconstruction-only generator update (the non-adversarial ablation): same
// sampling and batch shape, no discriminator involvement.
template <typename S>
LossReport recon_only_step(ParamStore<S>& params, const std::vector<TrainingTuple<S>>& tuples,
                           const TrainConfig& cfg, const LossConfig& loss_cfg,
                           const ArchitectureConfig& arch, AdamState<S>& opt_g,
                           std::uint64_t step) {
  if (tuples.empty()) throw std::invalid_argument("recon_only_step: empty batch");
  ParamStore<S> grads;
  const S n = static_cast<S>(tuples.size());
  double l_re_acc = 0.0;
  for (const auto& t : tuples) {
    Tape<S> tape(params, &grads);
    auto gi = GeneratorInput<S>::make(t.unsynced, t.target);
    auto gen = generator_forward(tape, gi, t.audio, arch);
    auto recon = l1_loss(tape, gen.face, t.target);
    l_re_acc += recon->val(0, 0);
    tape.backward(scale(tape, recon, static_cast<S>(loss_cfg.recon_weight) / n));
  }
  LossReport report;
  report.l_re = l_re_acc / tuples.size();
  if (!std::isfinite(report.l_re))
    throw std::runtime_error("recon_only_step: non-finite loss at step " + std::to_string(step));
  opt_g.update(params, grads, cfg, "g/");
  return report;
}

struct TrainResult {
  ParamStore<float> params;
  std::vector<LossReport> history;
  std::string final_checkpoint;
};

// Full training run over a corpus directory: per-step CSV logging and periodic
// checkpoints under cfg.out_dir, final checkpoint always written.
inline TrainResult run_training(
    const TrainFileConfig& cfg,
    const std::function<void(int, const LossReport&)>& on_step = {}) {
  namespace fs = std::filesystem;
  cfg.architecture.validate();
  fs::create_directories(cfg.out_dir);

  auto clips = load_train_clips<float>(cfg.data_dir, cfg.architecture.face_size);
  TrainResult result;
  result.params = init_params<float>(cfg.architecture, cfg.train.seed);
  AdamState<float> opt_d, opt_g;
  std::mt19937_64 rng(cfg.train.seed ^ 0x9e3779b97f4a7c15ull);

  std::ofstream csv(fs::path(cfg.out_dir) / "train_log.csv");
  csv << "step,L_Re,L_real,L_fake,L_a\n";

  std::uniform_int_distribution<size_t> pick_clip(0, clips.size() - 1);
  for (int step = 1; step <= cfg.train.steps; ++step) {
    std::vector<TrainingTuple<float>> tuples;
    tuples.reserve(static_cast<size_t>(cfg.train.batch_size));
    while (tuples.size() < static_cast<size_t>(cfg.train.batch_size)) {
      const auto& clip = clips[pick_clip(rng)];
      try {
        tuples.push_back(
            sample_tuple(clip, rng, MfccConfig{}, cfg.train.window_ms, cfg.train.exclusion_ms));
      } catch (const std::invalid_argument&) {
        // clip too short for this draw; resample
      }
    }
    LossReport report =
        cfg.adversarial
            ? train_step(result.params, tuples, cfg.train, cfg.loss, cfg.architecture, opt_d,
                         opt_g, rng, static_cast<std::uint64_t>(step))
            : recon_only_step(result.params, tuples, cfg.train, cfg.loss, cfg.architecture, opt_g,
                              static_cast<std::uint64_t>(step));
    csv << step << ',' << report.l_re << ',' << report.l_real << ',' << report.l_fake << ','
        << report.l_a << '\n';
    csv.flush();
    result.history.push_back(report);
    if (on_step) on_step(step, report);

    if (cfg.train.checkpoint_every > 0 && step % cfg.train.checkpoint_every == 0 &&
        step != cfg.train.steps) {
      CheckpointMeta meta{cfg.architecture, static_cast<std::uint64_t>(step), cfg.train.seed};
      char name[64];
      std::snprintf(name, sizeof(name), "checkpoint_%06d.bin", step);
      save_checkpoint((fs::path(cfg.out_dir) / name).string(), result.params, meta);
    }
  }
  CheckpointMeta meta{cfg.architecture, static_cast<std::uint64_t>(cfg.train.steps),
                     cfg.train.seed};
  result.final_checkpoint = (fs::path(cfg.out_dir) / "checkpoint_final.bin").string();
  save_checkpoint(result.final_checkpoint, result.params, meta);
  return result;
}

}  // namespace lipgan
