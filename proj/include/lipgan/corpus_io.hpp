#pragma once

#include <string>
#include <vector>

#include "lipgan/corpus.hpp"

namespace lipgan {

// Labels are loaded separately from media so that training code can be wired
// to frames and audio only; envelopes/boxes/landmarks stay on the evaluation
// side.
struct ToyClipLabels {
  ToyClipSpec spec;
  std::vector<double> envelope;
  std::vector<FaceBox> face_boxes;
  std::vector<LandmarkSet> mouth_landmarks;
};

struct CorpusManifest {
  std::vector<std::string> train;    // clip directory names
  std::vector<std::string> heldout;
};

// Writes clip directories (frame_%04d.png + audio.wav + meta.json) and a
// manifest.json with the train/held-out split.
void write_toy_corpus(const std::string& dir, int n_clips, std::uint64_t seed,
                      double heldout_fraction = 0.1, const ToyClipSpec& base = {});

void write_toy_clip(const std::string& clip_dir, const ToyClip& clip, const ToyClipSpec& spec);

VideoClip load_clip_media(const std::string& clip_dir);
ToyClipLabels load_clip_labels(const std::string& clip_dir);
CorpusManifest read_manifest(const std::string& dir);

}  // namespace lipgan
