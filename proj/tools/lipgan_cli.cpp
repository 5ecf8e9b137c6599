// Command-line surface: train / dub / eval / make-toy-data / pipeline.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lipgan/checkpoint.hpp"
#include "lipgan/corpus_io.hpp"
#include "lipgan/inference.hpp"
#include "lipgan/media.hpp"
#include "lipgan/metrics.hpp"
#include "lipgan/pipeline.hpp"
#include "lipgan/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lipgan;

namespace {

int fail(const std::string& kind, const std::string& message, int code = 1) {
  json err = {{"error", kind}, {"message", message}};
  std::cerr << err.dump() << "\n";
  return code;
}

int cmd_train(const std::string& config_path) {
  const AppConfig cfg = load_config(config_path);
  if (!cfg.training) throw ConfigError("config has no 'training' section: " + config_path);
  const TrainFileConfig& tc = *cfg.training;
  std::cout << "training: " << tc.train.steps << " steps, batch " << tc.train.batch_size
            << ", data " << tc.data_dir << ", out " << tc.out_dir << "\n";
  const TrainResult result = run_training(tc, [](int step, const LossReport& r) {
    std::cout << "step " << step << "  L_Re " << r.l_re << "  L_real " << r.l_real << "  L_fake "
              << r.l_fake << "  L_a " << r.l_a << "\n";
  });
  std::cout << "final checkpoint: " << result.final_checkpoint << "\n";
  return 0;
}

int cmd_dub(const std::string& video, const std::string& audio, const std::string& checkpoint,
            const std::string& out, const std::string& mode, const std::string& no_face,
            double fps_out, std::uint64_t identity_seed) {
  auto [params, meta] = load_checkpoint<float>(checkpoint);
  DubRequest<float> req;
  req.visual_source = decode_video(video);
  req.audio = read_wav(audio);
  req.params = &params;
  req.architecture = meta.architecture;
  req.mode = mode == "eval" ? DubMode::eval_random_identity : DubMode::self_pose;
  req.no_face = no_face == "copy" ? NoFacePolicy::copy_through : NoFacePolicy::fail;
  req.fps_out = fps_out;
  req.identity_seed = identity_seed;
  const VideoClip result = dub(req);
  encode_video(result.frames, result.audio, result.fps, out);
  std::cout << "wrote " << out << " (" << result.frames.size() << " frames at " << result.fps
            << " fps)\n";
  return 0;
}

std::vector<Frame> load_pred_frames(const std::string& pred) {
  if (fs::is_directory(pred)) {
    std::vector<Frame> frames;
    for (int i = 0;; ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%04d.png", i);
      const fs::path p = fs::path(pred) / name;
      if (!fs::exists(p)) break;
      Frame f = read_png(p.string());
      f.index = i;
      frames.push_back(std::move(f));
    }
    if (frames.empty())
      throw std::runtime_error("eval: no frame_%04d.png files in " + pred);
    return frames;
  }
  return decode_video(pred).frames;
}

int cmd_eval(const std::string& pred, const std::string& gt, const std::string& out) {
  const std::vector<Frame> pred_frames = load_pred_frames(pred);
  const VideoClip gt_media = load_clip_media(gt);
  const ToyClipLabels labels = load_clip_labels(gt);
  const size_t n = std::min(pred_frames.size(), gt_media.frames.size());
  if (n == 0) throw std::runtime_error("eval: no overlapping frames");

  const ToyClipSpec& spec = labels.spec;
  const double inter_ocular = 2.0 * 0.35 * spec.head_radius_px;

  std::vector<double> psnrs, ssims, lmds, openings, envelope;
  for (size_t i = 0; i < n; ++i) {
    const ImageD a = frame_to_image<double>(pred_frames[i]);
    const ImageD b = frame_to_image<double>(gt_media.frames[i]);
    psnrs.push_back(psnr(a, b));
    ssims.push_back(ssim(a, b));
    // Predicted landmarks: the oracle mouth-opening measurement turned back
    // into an ellipse contour at the renderer's geometry.
    const double opening = measure_mouth_opening(pred_frames[i]);
    LandmarkSet pred_lm;
    for (int k = 0; k < 20; ++k) {
      const double th = 2 * std::numbers::pi * k / 20.0;
      pred_lm.push_back({spec.mouth_cx + spec.mouth_half_width * std::cos(th),
                         spec.mouth_cy + opening * std::sin(th)});
    }
    lmds.push_back(lmd(pred_lm, labels.mouth_landmarks[i]));
    openings.push_back(opening);
    envelope.push_back(labels.envelope[i]);
  }
  auto mean = [](const std::vector<double>& v) {
    double acc = 0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
  };

  json report = {{"psnr_db", mean(psnrs)},
                 {"ssim", mean(ssims)},
                 {"lmd", mean(lmds)},
                 {"lmd_normalized", mean(lmds) / inter_ocular},
                 {"n_frames", n},
                 {"mouth_envelope_pearson", n > 1 ? pearson(openings, envelope) : 0.0}};
  std::ofstream jf(out);
  if (!jf) throw std::runtime_error("eval: cannot open " + out);
  jf << report.dump(1) << "\n";

  std::ofstream csv(fs::path(out).replace_extension(".csv"));
  csv << "frame,psnr_db,ssim,lmd,mouth_opening,envelope\n";
  for (size_t i = 0; i < n; ++i)
    csv << i << ',' << psnrs[i] << ',' << ssims[i] << ',' << lmds[i] << ',' << openings[i] << ','
        << envelope[i] << '\n';
  std::cout << report.dump(1) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"audio-conditioned talking-face generation toolkit"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "train a model from a config file");
  std::string train_config;
  train->add_option("--config", train_config, "JSON config with a 'training' section")->required();

  auto* dub_cmd = app.add_subcommand("dub", "re-voice a video with new audio");
  std::string dub_video, dub_audio, dub_ckpt, dub_out, dub_mode = "self_pose",
              dub_no_face = "fail";
  double dub_fps = 0.0;
  std::uint64_t dub_seed = 0;
  dub_cmd->add_option("--video", dub_video, "input MP4 (audio sidecar optional)")->required();
  dub_cmd->add_option("--audio", dub_audio, "target speech WAV")->required();
  dub_cmd->add_option("--checkpoint", dub_ckpt, "model checkpoint")->required();
  dub_cmd->add_option("--out", dub_out, "output MP4 path")->required();
  dub_cmd->add_option("--mode", dub_mode, "self_pose | eval")
      ->check(CLI::IsMember({"self_pose", "eval"}));
  dub_cmd->add_option("--no-face", dub_no_face, "fail | copy")
      ->check(CLI::IsMember({"fail", "copy"}));
  dub_cmd->add_option("--fps-out", dub_fps, "output frame rate (0 = source)");
  dub_cmd->add_option("--identity-seed", dub_seed, "eval-mode identity frame seed");

  auto* eval_cmd = app.add_subcommand("eval", "score a prediction against a labeled clip");
  std::string eval_pred, eval_gt, eval_out;
  eval_cmd->add_option("--pred", eval_pred, "predicted frames dir or MP4")->required();
  eval_cmd->add_option("--gt", eval_gt, "ground-truth clip directory")->required();
  eval_cmd->add_option("--out", eval_out, "metric report JSON path")->required();

  auto* toy = app.add_subcommand("make-toy-data", "generate the synthetic corpus");
  std::string toy_out;
  int toy_clips = 10;
  std::uint64_t toy_seed = 0;
  double toy_heldout = 0.1, toy_duration = 4.0;
  int toy_frame_size = 96;
  toy->add_option("--out", toy_out, "corpus directory")->required();
  toy->add_option("--clips", toy_clips, "number of clips");
  toy->add_option("--seed", toy_seed, "base seed");
  toy->add_option("--heldout-fraction", toy_heldout, "held-out split fraction");
  toy->add_option("--duration", toy_duration, "clip duration in seconds");
  toy->add_option("--frame-size", toy_frame_size, "square frame size in pixels");

  auto* pipe = app.add_subcommand("pipeline", "run the full translation pipeline");
  std::string pipe_config, pipe_video, pipe_out;
  pipe->add_option("--config", pipe_config, "JSON config with a 'pipeline' section")->required();
  pipe->add_option("--video", pipe_video, "source video")->required();
  pipe->add_option("--out", pipe_out, "final output MP4 path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_config);
    if (dub_cmd->parsed())
      return cmd_dub(dub_video, dub_audio, dub_ckpt, dub_out, dub_mode, dub_no_face, dub_fps,
                     dub_seed);
    if (eval_cmd->parsed()) return cmd_eval(eval_pred, eval_gt, eval_out);
    if (toy->parsed()) {
      ToyClipSpec base;
      base.duration_s = toy_duration;
      base.frame_size = toy_frame_size;
      if (toy_frame_size != 96) {
        const double scale = toy_frame_size / 96.0;
        base.head_radius_px *= scale;
        base.mouth_cx *= scale;
        base.mouth_cy *= scale;
        base.mouth_half_width *= scale;
        base.a_min *= scale;
        base.a_max *= scale;
      }
      write_toy_corpus(toy_out, toy_clips, toy_seed, toy_heldout, base);
      std::cout << "wrote " << toy_clips << " clips to " << toy_out << "\n";
      return 0;
    }
    if (pipe->parsed()) {
      const AppConfig cfg = load_config(pipe_config);
      if (!cfg.pipeline) throw ConfigError("config has no 'pipeline' section: " + pipe_config);
      const std::string out = run_pipeline(*cfg.pipeline, pipe_video, pipe_out);
      std::cout << "pipeline output: " << out << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const StageError& e) {
    return fail("stage", e.what(), 3);
  } catch (const DubNoFaceError& e) {
    return fail("no_face", e.what(), 4);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return fail("usage", "no subcommand", 2);
}
