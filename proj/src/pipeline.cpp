#include "lipgan/pipeline.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "lipgan/checkpoint.hpp"
#include "lipgan/inference.hpp"
#include "lipgan/media.hpp"
#include "lipgan/sha256.hpp"

namespace lipgan {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::string> kStageOrder = {"recognize", "translate", "synthesize",
                                              "voice_transfer", "lipsync"};

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' at " + where);
}

StageSpec parse_stage(const json& j, size_t index) {
  const std::string where = "pipeline.stages[" + std::to_string(index) + "]";
  reject_unknown_keys(j, {"name", "adapter", "config"}, where);
  StageSpec s;
  s.name = j.at("name").get<std::string>();
  s.adapter = j.at("adapter").get<std::string>();
  if (j.contains("config"))
    for (const auto& [k, v] : j.at("config").items())
      s.config[k] = v.is_string() ? v.get<std::string>() : v.dump();
  return s;
}

TrainFileConfig parse_training(const json& j) {
  reject_unknown_keys(j, {"data_dir", "out_dir", "seed", "steps", "batch_size", "learning_rate",
                          "d_lr_multiplier", "checkpoint_every", "architecture", "loss",
                          "adversarial", "window_ms", "exclusion_ms"},
                      "training");
  TrainFileConfig c;
  c.data_dir = j.at("data_dir").get<std::string>();
  c.out_dir = j.value("out_dir", c.out_dir);
  c.train.seed = j.value("seed", std::uint64_t{0});
  c.train.steps = j.value("steps", c.train.steps);
  c.train.batch_size = j.value("batch_size", c.train.batch_size);
  c.train.learning_rate = j.value("learning_rate", c.train.learning_rate);
  c.train.d_lr_multiplier = j.value("d_lr_multiplier", c.train.d_lr_multiplier);
  c.train.checkpoint_every = j.value("checkpoint_every", c.train.checkpoint_every);
  c.train.window_ms = j.value("window_ms", c.train.window_ms);
  c.train.exclusion_ms = j.value("exclusion_ms", c.train.exclusion_ms);
  c.adversarial = j.value("adversarial", true);
  if (j.contains("architecture")) {
    const json& a = j.at("architecture");
    reject_unknown_keys(a, {"face_size", "embedding_size", "stem_width", "encoder_widths",
                            "decoder_widths", "audio_widths", "skip_count", "audio_rows",
                            "audio_cols"},
                        "training.architecture");
    c.architecture = a.get<ArchitectureConfig>();
  }
  if (j.contains("loss")) {
    const json& l = j.at("loss");
    reject_unknown_keys(l, {"margin", "adv_weight", "recon_weight"}, "training.loss");
    c.loss.margin = l.value("margin", c.loss.margin);
    c.loss.adv_weight = l.value("adv_weight", c.loss.adv_weight);
    c.loss.recon_weight = l.value("recon_weight", c.loss.recon_weight);
  }
  if (c.train.batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
  if (c.train.learning_rate < 0) throw ConfigError("training.learning_rate must be positive");
  try {
    c.architecture.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("training.architecture: ") + e.what());
  }
  return c;
}

bool looks_like_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  char head[4] = {};
  f.read(head, 4);
  return f && std::memcmp(head, "RIFF", 4) == 0;
}

}  // namespace

AppConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  reject_unknown_keys(j, {"pipeline", "training"}, "(top level)");
  AppConfig cfg;
  if (j.contains("pipeline")) {
    const json& p = j.at("pipeline");
    reject_unknown_keys(p, {"workdir", "stages"}, "pipeline");
    PipelineConfig pc;
    pc.workdir = p.value("workdir", pc.workdir);
    size_t i = 0;
    for (const auto& s : p.at("stages")) pc.stages.push_back(parse_stage(s, i++));
    validate_stages(pc.stages);
    cfg.pipeline = std::move(pc);
  }
  if (j.contains("training")) cfg.training = parse_training(j.at("training"));
  return cfg;
}

void validate_stages(const std::vector<StageSpec>& stages) {
  std::set<std::string> seen;
  size_t order_pos = 0;
  for (const auto& s : stages) {
    auto it = std::find(kStageOrder.begin(), kStageOrder.end(), s.name);
    if (it == kStageOrder.end())
      throw ConfigError("unknown stage name '" + s.name + "'");
    if (!seen.insert(s.name).second) throw ConfigError("duplicate stage '" + s.name + "'");
    const size_t pos = static_cast<size_t>(it - kStageOrder.begin());
    if (pos < order_pos)
      throw ConfigError("stage '" + s.name + "' out of pipeline order");
    order_pos = pos;
    if (s.adapter != "file" && s.adapter != "command" && s.adapter != "internal")
      throw ConfigError("stage '" + s.name + "': unknown adapter '" + s.adapter + "'");
    if (s.adapter == "internal" && s.name != "lipsync")
      throw ConfigError("stage '" + s.name + "': internal adapter is only valid for lipsync");
    if (s.adapter == "file" && !s.config.count("path"))
      throw ConfigError("stage '" + s.name + "': file adapter requires 'path'");
    if (s.adapter == "command" && !s.config.count("command"))
      throw ConfigError("stage '" + s.name + "': command adapter requires 'command'");
    if (s.name == "lipsync" && s.adapter == "internal" && !s.config.count("checkpoint"))
      throw ConfigError("stage 'lipsync': missing checkpoint path");
  }
  if (stages.empty() || stages.back().name != "lipsync")
    throw ConfigError("pipeline must end with the lipsync stage");
  // Required stages; voice_transfer is optional (audio passes through).
  for (const std::string& required : {"recognize", "translate", "synthesize"})
    if (!seen.count(required)) throw ConfigError("missing required stage '" + required + "'");
}

namespace {

std::string replace_all_of(std::string s, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

std::string run_lipsync_internal(const StageSpec& spec, const std::vector<std::string>& inputs,
                                 const std::string& workdir) {
  if (inputs.size() != 2) throw StageError(spec.name, "expects [audio, video] inputs");
  const std::string& audio_path = inputs[0];
  const std::string& video_path = inputs[1];
  auto [params, meta] = load_checkpoint<float>(spec.config.at("checkpoint"));
  DubRequest<float> req;
  req.visual_source = decode_video(video_path);
  req.audio = read_wav(audio_path);
  req.params = &params;
  req.architecture = meta.architecture;
  req.mode = (spec.config.count("mode") && spec.config.at("mode") == "eval")
                 ? DubMode::eval_random_identity
                 : DubMode::self_pose;
  if (spec.config.count("fps_out")) req.fps_out = std::stod(spec.config.at("fps_out"));
  const std::string out = spec.config.count("output")
                              ? spec.config.at("output")
                              : (fs::path(workdir) / "lipsync.mp4").string();
  const VideoClip result = dub(req);
  encode_video(result.frames, result.audio, result.fps, out);
  return out;
}

}  // namespace

std::string run_stage(const StageSpec& spec, const std::vector<std::string>& inputs,
                      const std::string& workdir) {
  if (spec.adapter == "file") {
    const std::string& path = spec.config.at("path");
    if (!fs::exists(path)) throw StageError(spec.name, "missing artifact file: " + path);
    return path;
  }
  if (spec.adapter == "command") {
    std::string output = spec.config.count("output")
                             ? spec.config.at("output")
                             : (fs::path(workdir) / (spec.name + ".out")).string();
    std::string cmd = spec.config.at("command");
    if (!inputs.empty()) cmd = replace_all_of(cmd, "{input}", inputs[0]);
    if (inputs.size() > 1) cmd = replace_all_of(cmd, "{input2}", inputs[1]);
    cmd = replace_all_of(cmd, "{output}", output);
    const int rc = std::system(cmd.c_str());
    const int exit_code = rc < 0 ? rc : WEXITSTATUS(rc);
    if (rc != 0)
      throw StageError(spec.name, "external command failed with exit code " +
                                      std::to_string(exit_code), exit_code);
    if (!fs::exists(output))
      throw StageError(spec.name, "command did not produce declared output: " + output);
    return output;
  }
  if (spec.adapter == "internal") {
    try {
      return run_lipsync_internal(spec, inputs, workdir);
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(spec.name, e.what());
    }
  }
  throw StageError(spec.name, "unknown adapter '" + spec.adapter + "'");
}

namespace {

void write_manifest(const std::string& workdir, const JobManifest& m) {
  json j;
  j["status"] = m.status;
  j["input_video"] = m.input_video;
  json stages = json::array();
  for (const auto& s : m.stages)
    stages.push_back({{"name", s.name}, {"artifact", s.artifact}, {"sha256", s.sha256}});
  j["stages"] = stages;
  if (!m.failed_stage.empty()) j["failed_stage"] = m.failed_stage;
  if (!m.error.empty()) j["error"] = m.error;
  std::ofstream f(fs::path(workdir) / "manifest.json");
  f << j.dump(1);
}

// Media-type check on an artifact produced for the given stage.
void check_artifact(const StageSpec& spec, const std::string& path) {
  if (!fs::exists(path)) throw StageError(spec.name, "artifact missing: " + path);
  if (spec.name == "synthesize" || spec.name == "voice_transfer") {
    if (!looks_like_wav(path))
      throw StageError(spec.name, "artifact is not a WAV file: " + path);
  } else if (spec.name == "lipsync") {
    if (fs::path(path).extension() != ".mp4")
      throw StageError(spec.name, "artifact is not an MP4 file: " + path);
  }
}

}  // namespace

std::string run_pipeline(const PipelineConfig& cfg, const std::string& input_video,
                         const std::string& out_path) {
  validate_stages(cfg.stages);
  if (!fs::exists(input_video))
    throw StageError("recognize", "input video does not exist: " + input_video);
  fs::create_directories(cfg.workdir);

  JobManifest manifest;
  manifest.status = "running";
  manifest.input_video = input_video;
  write_manifest(cfg.workdir, manifest);

  std::string current_audio;  // output of synthesize / voice_transfer
  std::string current_text;
  std::string final_video;
  for (const auto& spec : cfg.stages) {
    std::vector<std::string> inputs;
    if (spec.name == "recognize") inputs = {input_video};
    else if (spec.name == "translate") inputs = {current_text};
    else if (spec.name == "synthesize") inputs = {current_text};
    else if (spec.name == "voice_transfer") inputs = {current_audio};
    else if (spec.name == "lipsync") inputs = {current_audio, input_video};

    StageSpec stage = spec;
    if (spec.name == "lipsync" && !stage.config.count("output")) stage.config["output"] = out_path;
    std::string artifact;
    try {
      artifact = run_stage(stage, inputs, cfg.workdir);
      check_artifact(stage, artifact);
    } catch (const StageError& e) {
      manifest.status = "failed";
      manifest.failed_stage = spec.name;
      manifest.error = e.what();
      write_manifest(cfg.workdir, manifest);
      throw;
    }
    manifest.stages.push_back({spec.name, artifact, sha256_file(artifact)});
    write_manifest(cfg.workdir, manifest);

    if (spec.name == "recognize" || spec.name == "translate") current_text = artifact;
    else if (spec.name == "synthesize" || spec.name == "voice_transfer") current_audio = artifact;
    else if (spec.name == "lipsync") final_video = artifact;
  }
  manifest.status = "done";
  write_manifest(cfg.workdir, manifest);
  return final_video;
}

JobManifest read_job_manifest(const std::string& workdir) {
  std::ifstream f(fs::path(workdir) / "manifest.json");
  if (!f) throw std::runtime_error("read_job_manifest: missing manifest in " + workdir);
  const json j = json::parse(f);
  JobManifest m;
  m.status = j.at("status").get<std::string>();
  m.input_video = j.value("input_video", "");
  for (const auto& s : j.at("stages"))
    m.stages.push_back({s.at("name").get<std::string>(), s.at("artifact").get<std::string>(),
                        s.at("sha256").get<std::string>()});
  m.failed_stage = j.value("failed_stage", "");
  m.error = j.value("error", "");
  return m;
}

}  // namespace lipgan
