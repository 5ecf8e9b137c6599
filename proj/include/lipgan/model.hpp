#pragma once

#include <random>
#include <string>
#include <vector>

#include "lipgan/image.hpp"
#include "lipgan/mfcc.hpp"
#include "lipgan/tensor.hpp"

namespace lipgan {

struct ArchitectureConfig {
  int face_size = 96;        // H
  int embedding_size = 256;  // h
  int stem_width = 32;
  std::vector<int> encoder_widths = {32, 64, 128, 256, 512, 512};  // one per downsample
  std::vector<int> decoder_widths = {512, 256, 128, 64, 32, 32};   // one per upsample
  std::vector<int> audio_widths = {32, 64, 128, 256};
  int skip_count = 6;
  int audio_rows = 12;  // M
  int audio_cols = 35;  // T_f

  void validate() const {
    if (skip_count != static_cast<int>(encoder_widths.size()))
      throw std::invalid_argument("ArchitectureConfig: encoder scale count must equal skip_count");
    if (skip_count != static_cast<int>(decoder_widths.size()))
      throw std::invalid_argument("ArchitectureConfig: decoder upsample count must equal skip_count");
    if (face_size >> skip_count < 1)
      throw std::invalid_argument("ArchitectureConfig: face_size too small for the scale count");
    if (embedding_size < 1 || face_size < 2 || audio_widths.empty())
      throw std::invalid_argument("ArchitectureConfig: invalid sizes");
  }

  // Spatial extents after each stride-2 encoder stage (ceil division chain).
  std::vector<int> encoder_sizes() const {
    std::vector<int> s;
    int cur = face_size;
    for (int i = 0; i < skip_count; ++i) {
      cur = (cur + 1) / 2;
      s.push_back(cur);
    }
    return s;
  }

  std::pair<int, int> audio_bottleneck() const {
    int h = audio_rows, w = audio_cols;
    for (size_t i = 0; i < audio_widths.size(); ++i) {
      h = (h + 1) / 2;
      w = (w + 1) / 2;
    }
    return {h, w};
  }

  bool operator==(const ArchitectureConfig&) const = default;
};

// H x H x 6 generator input: identity face channels stacked with a pose prior
// whose lower half is forced to zero on construction.
template <typename S>
struct GeneratorInput {
  Image<S> stacked;  // channels 0-2 identity, 3-5 masked pose

  static GeneratorInput make(const Image<S>& identity, const Image<S>& pose) {
    if (!identity.same_shape(pose) || identity.channels != 3)
      throw std::invalid_argument("GeneratorInput: crops must be H x H x 3 and equal");
    GeneratorInput gi;
    gi.stacked = Image<S>(identity.height, identity.width, 6);
    const Image<S> masked = mask_lower_half(pose);
    gi.stacked.data.leftCols(3) = identity.data;
    gi.stacked.data.rightCols(3) = masked.data;
    return gi;
  }

  int size() const { return stacked.height; }
};

namespace modeld {

template <typename S>
void add_conv(ParamStore<S>& p, std::mt19937_64& rng, const std::string& name, int k, int cin,
              int cout) {
  using Mat = typename ParamStore<S>::Mat;
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / (k * k * cin)));
  Mat w(k * k * cin, cout);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = static_cast<S>(dist(rng));
  p.add(name + "/w", std::move(w), {k, k, cin, cout});
  p.add(name + "/b", Mat::Zero(1, cout), {cout});
}

template <typename S>
void add_dense(ParamStore<S>& p, std::mt19937_64& rng, const std::string& name, int in, int out) {
  using Mat = typename ParamStore<S>::Mat;
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / in));
  Mat w(in, out);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = static_cast<S>(dist(rng));
  p.add(name + "/w", std::move(w), {in, out});
  p.add(name + "/b", Mat::Zero(1, out), {out});
}

// Parameters of one face encoder branch (stem + per-scale residual stages + fc).
template <typename S>
void init_face_encoder(ParamStore<S>& p, std::mt19937_64& rng, const std::string& prefix,
                       const ArchitectureConfig& cfg, int in_channels) {
  add_conv(p, rng, prefix + "/stem", 3, in_channels, cfg.stem_width);
  int cin = cfg.stem_width;
  for (int i = 0; i < cfg.skip_count; ++i) {
    const int w = cfg.encoder_widths[i];
    add_conv(p, rng, prefix + "/down" + std::to_string(i), 3, cin, w);
    add_conv(p, rng, prefix + "/res" + std::to_string(i) + "/c1", 3, w, w);
    add_conv(p, rng, prefix + "/res" + std::to_string(i) + "/c2", 3, w, w);
    cin = w;
  }
  const auto sizes = cfg.encoder_sizes();
  const int bottleneck = sizes.back() * sizes.back() * cfg.encoder_widths.back();
  add_dense(p, rng, prefix + "/fc", bottleneck, cfg.embedding_size);
}

template <typename S>
void init_audio_encoder(ParamStore<S>& p, std::mt19937_64& rng, const std::string& prefix,
                        const ArchitectureConfig& cfg) {
  int cin = 1;
  for (size_t i = 0; i < cfg.audio_widths.size(); ++i) {
    add_conv(p, rng, prefix + "/conv" + std::to_string(i), 3, cin, cfg.audio_widths[i]);
    cin = cfg.audio_widths[i];
  }
  const auto [bh, bw] = cfg.audio_bottleneck();
  add_dense(p, rng, prefix + "/fc", bh * bw * cin, cfg.embedding_size);
}

}  // namespace modeld

// Deterministic fan-in-scaled initialization of all generator and
// discriminator parameters.
template <typename S>
ParamStore<S> init_params(const ArchitectureConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ParamStore<S> p;
  std::mt19937_64 rng(seed);
  modeld::init_face_encoder(p, rng, "g/face", cfg, 6);
  modeld::init_audio_encoder(p, rng, "g/audio", cfg);

  // Decoder: dense from the joint 2h embedding back to the bottleneck map,
  // then skip_count upsample stages mirroring the encoder.
  const auto sizes = cfg.encoder_sizes();
  const int bot_size = sizes.back();
  const int bot_width = cfg.encoder_widths.back();
  std::mt19937_64& r = rng;
  modeld::add_dense(p, r, "g/dec/fc", 2 * cfg.embedding_size, bot_size * bot_size * bot_width);
  // bottleneck skip concat -> fuse conv
  modeld::add_conv(p, r, "g/dec/bottle", 3, 2 * bot_width, cfg.decoder_widths[0]);
  int cin = cfg.decoder_widths[0];
  for (int j = 0; j < cfg.skip_count; ++j) {
    const int dw = cfg.decoder_widths[j];
    // concat the matching encoder skip before the stage conv (last stage at
    // full resolution has no skip: all encoder scales are consumed).
    const int skip_w = (j < cfg.skip_count - 1) ? cfg.encoder_widths[cfg.skip_count - 2 - j] : 0;
    modeld::add_conv(p, r, "g/dec/up" + std::to_string(j), 3, cin + skip_w, dw);
    modeld::add_conv(p, r, "g/dec/res" + std::to_string(j) + "/c1", 3, dw, dw);
    modeld::add_conv(p, r, "g/dec/res" + std::to_string(j) + "/c2", 3, dw, dw);
    cin = dw;
  }
  modeld::add_conv(p, r, "g/dec/out", 1, cin, 3);

  modeld::init_face_encoder(p, rng, "d/face", cfg, 3);
  modeld::init_audio_encoder(p, rng, "d/audio", cfg);
  return p;
}

template <typename S>
struct FaceEncoderOut {
  TensorPtr<S> embedding;
  std::vector<TensorPtr<S>> skips;  // one per scale, bottleneck last
};

template <typename S>
TensorPtr<S> res_block(Tape<S>& tape, const TensorPtr<S>& x, const std::string& name) {
  auto y = relu(tape, conv2d(tape, x, name + "/c1", 3, 1));
  y = conv2d(tape, y, name + "/c2", 3, 1);
  return relu(tape, add(tape, x, y));
}

template <typename S>
FaceEncoderOut<S> encode_face(Tape<S>& tape, const TensorPtr<S>& input,
                              const std::string& prefix, const ArchitectureConfig& cfg) {
  FaceEncoderOut<S> out;
  auto x = relu(tape, conv2d(tape, input, prefix + "/stem", 3, 1));
  for (int i = 0; i < cfg.skip_count; ++i) {
    x = relu(tape, conv2d(tape, x, prefix + "/down" + std::to_string(i), 3, 2));
    x = res_block(tape, x, prefix + "/res" + std::to_string(i));
    out.skips.push_back(x);
  }
  out.embedding = dense(tape, flatten(tape, x), prefix + "/fc");
  return out;
}

template <typename S>
TensorPtr<S> encode_audio(Tape<S>& tape, const TensorPtr<S>& heatmap, const std::string& prefix,
                          const ArchitectureConfig& cfg) {
  if (heatmap->H != cfg.audio_rows || heatmap->W != cfg.audio_cols || heatmap->C != 1)
    throw std::invalid_argument("encode_audio: heatmap shape mismatch");
  auto x = heatmap;
  for (size_t i = 0; i < cfg.audio_widths.size(); ++i)
    x = relu(tape, conv2d(tape, x, prefix + "/conv" + std::to_string(i), 3, 2));
  return dense(tape, flatten(tape, x), prefix + "/fc");
}

template <typename S>
TensorPtr<S> heatmap_tensor(Tape<S>& tape, const MfccHeatmap& a, bool needs_grad = false) {
  const int m = a.coeff_count(), t = a.frame_count();
  typename TensorVar<S>::Mat data(m * t, 1);
  for (int y = 0; y < m; ++y)
    for (int x = 0; x < t; ++x) data(y * t + x, 0) = static_cast<S>(a.values(y, x));
  return input_map(tape, data, m, t, 1, needs_grad);
}

template <typename S>
TensorPtr<S> image_tensor(Tape<S>& tape, const Image<S>& img, bool needs_grad = false) {
  return input_map(tape, img.data, img.height, img.width, img.channels, needs_grad);
}

template <typename S>
struct GeneratorOut {
  TensorPtr<S> face;         // H x H x 3, sigmoid range
  TensorPtr<S> penultimate;  // decoder features feeding the 1x1 output conv
  std::vector<TensorPtr<S>> decoder_layers;  // per-scale decoder block outputs
  TensorPtr<S> face_embedding;
  TensorPtr<S> audio_embedding;
};

template <typename S>
GeneratorOut<S> generator_forward(Tape<S>& tape, const TensorPtr<S>& input6,
                                  const MfccHeatmap& a, const ArchitectureConfig& cfg) {
  if (input6->H != cfg.face_size || input6->W != cfg.face_size || input6->C != 6)
    throw std::invalid_argument("generator_forward: input must be H x H x 6");
  GeneratorOut<S> out;
  auto enc = encode_face(tape, input6, "g/face", cfg);
  out.face_embedding = enc.embedding;
  out.audio_embedding = encode_audio(tape, heatmap_tensor(tape, a), "g/audio", cfg);
  auto joint = concat_vec(tape, out.face_embedding, out.audio_embedding);

  const auto sizes = cfg.encoder_sizes();
  const int bot = sizes.back();
  const int bot_w = cfg.encoder_widths.back();
  auto x = relu(tape, unflatten(tape, dense(tape, joint, "g/dec/fc"), bot, bot, bot_w));
  x = concat_channels(tape, x, enc.skips.back());
  x = relu(tape, conv2d(tape, x, "g/dec/bottle", 3, 1));
  for (int j = 0; j < cfg.skip_count; ++j) {
    const int target = (j < cfg.skip_count - 1) ? sizes[cfg.skip_count - 2 - j] : cfg.face_size;
    x = upsample_nearest(tape, x, target, target);
    if (j < cfg.skip_count - 1)
      x = concat_channels(tape, x, enc.skips[cfg.skip_count - 2 - j]);
    x = relu(tape, conv2d(tape, x, "g/dec/up" + std::to_string(j), 3, 1));
    x = res_block(tape, x, "g/dec/res" + std::to_string(j));
    out.decoder_layers.push_back(x);
  }
  out.penultimate = x;
  out.face = sigmoid(tape, conv2d(tape, x, "g/dec/out", 1, 1));
  return out;
}

template <typename S>
GeneratorOut<S> generator_forward(Tape<S>& tape, const GeneratorInput<S>& gi, const MfccHeatmap& a,
                                  const ArchitectureConfig& cfg) {
  return generator_forward(tape, image_tensor<S>(tape, gi.stacked), a, cfg);
}

template <typename S>
Image<S> tensor_to_image(const TensorPtr<S>& t) {
  Image<S> img(t->H, t->W, t->C);
  img.data = t->val;
  return img;
}

template <typename S>
struct DiscriminatorOut {
  TensorPtr<S> distance;  // 1 x 1
  TensorPtr<S> face_embedding;
  TensorPtr<S> audio_embedding;
};

// d = || E_face(s) - E_audio(a) ||_2 with encoders mirroring the generator's
// branches under separate parameters; the face branch consumes H x H x 3.
template <typename S>
DiscriminatorOut<S> discriminator_forward(Tape<S>& tape, const TensorPtr<S>& face,
                                          const MfccHeatmap& a, const ArchitectureConfig& cfg) {
  if (face->H != cfg.face_size || face->W != cfg.face_size || face->C != 3)
    throw std::invalid_argument("discriminator_forward: face must be H x H x 3");
  DiscriminatorOut<S> out;
  out.face_embedding = encode_face(tape, face, "d/face", cfg).embedding;
  out.audio_embedding = encode_audio(tape, heatmap_tensor(tape, a), "d/audio", cfg);
  out.distance = l2_distance(tape, out.face_embedding, out.audio_embedding);
  return out;
}

template <typename S>
DiscriminatorOut<S> discriminator_forward(Tape<S>& tape, const Image<S>& face,
                                          const MfccHeatmap& a, const ArchitectureConfig& cfg) {
  return discriminator_forward(tape, image_tensor<S>(tape, face), a, cfg);
}

}  // namespace lipgan
