#include "lipgan/corpus_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "lipgan/media.hpp"

namespace lipgan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json spec_to_json(const ToyClipSpec& s) {
  return {{"seed", s.seed},       {"duration_s", s.duration_s},
          {"fps", s.fps},         {"sample_rate", s.sample_rate},
          {"frame_size", s.frame_size}, {"head_radius_px", s.head_radius_px},
          {"mouth_cx", s.mouth_cx},     {"mouth_cy", s.mouth_cy},
          {"mouth_half_width", s.mouth_half_width}, {"a_min", s.a_min}, {"a_max", s.a_max},
          {"speckle_count", s.speckle_count},       {"speckle_amplitude", s.speckle_amplitude},
          {"speckle_radius", s.speckle_radius},     {"tint_amplitude", s.tint_amplitude}};
}

ToyClipSpec spec_from_json(const json& j) {
  ToyClipSpec s;
  s.seed = j.at("seed").get<std::uint64_t>();
  s.duration_s = j.at("duration_s").get<double>();
  s.fps = j.at("fps").get<double>();
  s.sample_rate = j.at("sample_rate").get<double>();
  s.frame_size = j.at("frame_size").get<int>();
  s.head_radius_px = j.at("head_radius_px").get<double>();
  s.mouth_cx = j.at("mouth_cx").get<double>();
  s.mouth_cy = j.at("mouth_cy").get<double>();
  s.mouth_half_width = j.at("mouth_half_width").get<double>();
  s.a_min = j.at("a_min").get<double>();
  s.a_max = j.at("a_max").get<double>();
  s.speckle_count = j.value("speckle_count", s.speckle_count);
  s.speckle_amplitude = j.value("speckle_amplitude", s.speckle_amplitude);
  s.speckle_radius = j.value("speckle_radius", s.speckle_radius);
  s.tint_amplitude = j.value("tint_amplitude", s.tint_amplitude);
  return s;
}

std::string frame_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.png", i);
  return buf;
}

}  // namespace

void write_toy_clip(const std::string& clip_dir, const ToyClip& clip, const ToyClipSpec& spec) {
  fs::create_directories(clip_dir);
  for (size_t i = 0; i < clip.clip.frames.size(); ++i)
    write_png((fs::path(clip_dir) / frame_name(static_cast<int>(i))).string(), clip.clip.frames[i]);
  if (clip.clip.audio) write_wav((fs::path(clip_dir) / "audio.wav").string(), *clip.clip.audio);

  json meta;
  meta["spec"] = spec_to_json(spec);
  meta["fps"] = clip.clip.fps;
  meta["envelope"] = clip.envelope;
  json boxes = json::array();
  for (const auto& b : clip.face_boxes)
    boxes.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}, {"frame", b.frame_index}});
  meta["face_boxes"] = boxes;
  json lms = json::array();
  for (const auto& set : clip.mouth_landmarks) {
    json pts = json::array();
    for (const auto& [x, y] : set) pts.push_back({x, y});
    lms.push_back(pts);
  }
  meta["mouth_landmarks"] = lms;
  std::ofstream f(fs::path(clip_dir) / "meta.json");
  f << meta.dump(1);
}

void write_toy_corpus(const std::string& dir, int n_clips, std::uint64_t seed,
                      double heldout_fraction, const ToyClipSpec& base) {
  fs::create_directories(dir);
  CorpusManifest manifest;
  const int n_heldout = std::max(1, static_cast<int>(n_clips * heldout_fraction));
  for (int i = 0; i < n_clips; ++i) {
    ToyClipSpec spec = base;
    spec.seed = seed + static_cast<std::uint64_t>(i);
    const ToyClip clip = make_clip(spec);
    char name[32];
    std::snprintf(name, sizeof(name), "clip_%04d", i);
    write_toy_clip((fs::path(dir) / name).string(), clip, spec);
    if (i < n_clips - n_heldout)
      manifest.train.push_back(name);
    else
      manifest.heldout.push_back(name);
  }
  json j = {{"train", manifest.train}, {"heldout", manifest.heldout}};
  std::ofstream f(fs::path(dir) / "manifest.json");
  f << j.dump(1);
}

VideoClip load_clip_media(const std::string& clip_dir) {
  VideoClip clip;
  std::ifstream mf(fs::path(clip_dir) / "meta.json");
  if (!mf) throw std::runtime_error("load_clip_media: missing meta.json in " + clip_dir);
  const json meta = json::parse(mf);
  clip.fps = meta.at("fps").get<double>();
  for (int i = 0;; ++i) {
    const fs::path p = fs::path(clip_dir) / frame_name(i);
    if (!fs::exists(p)) break;
    Frame f = read_png(p.string());
    f.index = i;
    f.timestamp_ms = i * 1000.0 / clip.fps;
    clip.frames.push_back(std::move(f));
  }
  const fs::path wav = fs::path(clip_dir) / "audio.wav";
  if (fs::exists(wav)) clip.audio = read_wav(wav.string());
  return clip;
}

ToyClipLabels load_clip_labels(const std::string& clip_dir) {
  std::ifstream mf(fs::path(clip_dir) / "meta.json");
  if (!mf) throw std::runtime_error("load_clip_labels: missing meta.json in " + clip_dir);
  const json meta = json::parse(mf);
  ToyClipLabels labels;
  labels.spec = spec_from_json(meta.at("spec"));
  labels.envelope = meta.at("envelope").get<std::vector<double>>();
  for (const auto& b : meta.at("face_boxes")) {
    FaceBox box;
    box.x = b.at("x").get<int>();
    box.y = b.at("y").get<int>();
    box.w = b.at("w").get<int>();
    box.h = b.at("h").get<int>();
    box.frame_index = b.at("frame").get<int>();
    labels.face_boxes.push_back(box);
  }
  for (const auto& set : meta.at("mouth_landmarks")) {
    LandmarkSet lm;
    for (const auto& pt : set) lm.push_back({pt.at(0).get<double>(), pt.at(1).get<double>()});
    labels.mouth_landmarks.push_back(std::move(lm));
  }
  return labels;
}

CorpusManifest read_manifest(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "manifest.json");
  if (!f) throw std::runtime_error("read_manifest: missing manifest.json in " + dir);
  const json j = json::parse(f);
  CorpusManifest m;
  m.train = j.at("train").get<std::vector<std::string>>();
  m.heldout = j.at("heldout").get<std::vector<std::string>>();
  return m;
}

}  // namespace lipgan
