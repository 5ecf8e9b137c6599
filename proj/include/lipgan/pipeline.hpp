#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lipgan/model.hpp"
#include "lipgan/training.hpp"

namespace lipgan {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StageError : std::runtime_error {
  std::string stage;
  int exit_code;
  StageError(std::string stage_name, const std::string& msg, int code = 0)
      : std::runtime_error("stage '" + stage_name + "': " + msg),
        stage(std::move(stage_name)),
        exit_code(code) {}
};

// One box of the translation pipeline. Adapters:
//   file     - returns a precomputed artifact path
//   command  - runs an external executable with {input}/{input2}/{output}
//              placeholders and captures its declared output file
//   internal - the lipsync stage, backed by the inference module
struct StageSpec {
  std::string name;     // recognize | translate | synthesize | voice_transfer | lipsync
  std::string adapter;  // file | command | internal
  std::map<std::string, std::string> config;
};

struct PipelineConfig {
  std::string workdir = "pipeline_work";
  std::vector<StageSpec> stages;
};

struct TrainFileConfig {
  TrainConfig train;
  LossConfig loss;
  ArchitectureConfig architecture;
  std::string data_dir;
  std::string out_dir = "train_out";
  bool adversarial = true;
};

struct AppConfig {
  std::optional<PipelineConfig> pipeline;
  std::optional<TrainFileConfig> training;
};

// Parses and schema-validates the configuration file; unknown keys are
// rejected with their location.
AppConfig load_config(const std::string& path);

// Validates the stage chain (names, order, adapters, per-stage required keys)
// without executing anything.
void validate_stages(const std::vector<StageSpec>& stages);

// Executes a single stage; returns the output artifact path.
std::string run_stage(const StageSpec& spec, const std::vector<std::string>& inputs,
                      const std::string& workdir);

struct StageRecord {
  std::string name;
  std::string artifact;
  std::string sha256;
};

struct JobManifest {
  std::string status;  // done | failed
  std::string input_video;
  std::vector<StageRecord> stages;
  std::string failed_stage;
  std::string error;
};

// Runs the full chain, persisting a manifest (with content hashes) to
// <workdir>/manifest.json; a failed stage halts downstream stages and leaves
// the partial manifest in place. Returns the final video path.
std::string run_pipeline(const PipelineConfig& cfg, const std::string& input_video,
                         const std::string& out_path);

JobManifest read_job_manifest(const std::string& workdir);

}  // namespace lipgan
