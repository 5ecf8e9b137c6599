#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lipgan/model.hpp"

namespace lipgan {

inline void to_json(nlohmann::json& j, const ArchitectureConfig& c) {
  j = {{"face_size", c.face_size},
       {"embedding_size", c.embedding_size},
       {"stem_width", c.stem_width},
       {"encoder_widths", c.encoder_widths},
       {"decoder_widths", c.decoder_widths},
       {"audio_widths", c.audio_widths},
       {"skip_count", c.skip_count},
       {"audio_rows", c.audio_rows},
       {"audio_cols", c.audio_cols}};
}

inline void from_json(const nlohmann::json& j, ArchitectureConfig& c) {
  ArchitectureConfig d;
  c.face_size = j.value("face_size", d.face_size);
  c.embedding_size = j.value("embedding_size", d.embedding_size);
  c.stem_width = j.value("stem_width", d.stem_width);
  c.encoder_widths = j.value("encoder_widths", d.encoder_widths);
  c.decoder_widths = j.value("decoder_widths", d.decoder_widths);
  c.audio_widths = j.value("audio_widths", d.audio_widths);
  c.skip_count = j.value("skip_count", d.skip_count);
  c.audio_rows = j.value("audio_rows", d.audio_rows);
  c.audio_cols = j.value("audio_cols", d.audio_cols);
}

struct CheckpointMeta {
  ArchitectureConfig architecture;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
};

// Single-file archive: magic, little-endian u32 header length, JSON header
// (metadata plus tensor index), then raw little-endian float32 data.
inline constexpr char kCheckpointMagic[8] = {'L', 'I', 'P', 'G', 'A', 'N', 'C', 'K'};

template <typename S>
void save_checkpoint(const std::string& path, const ParamStore<S>& params,
                     const CheckpointMeta& meta) {
  nlohmann::json header;
  header["architecture"] = meta.architecture;
  header["step"] = meta.step;
  header["seed"] = meta.seed;
  nlohmann::json index = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, mat] : params.tensors) {
    const auto count = static_cast<std::uint64_t>(mat.size());
    index.push_back({{"name", name},
                     {"shape", params.shapes.at(name)},
                     {"offset", offset},
                     {"count", count}});
    offset += count;
  }
  header["tensors"] = index;
  const std::string hs = header.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(kCheckpointMagic, 8);
  const std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
  std::uint8_t lenb[4] = {static_cast<std::uint8_t>(hlen), static_cast<std::uint8_t>(hlen >> 8),
                          static_cast<std::uint8_t>(hlen >> 16), static_cast<std::uint8_t>(hlen >> 24)};
  f.write(reinterpret_cast<const char*>(lenb), 4);
  f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  std::vector<float> buf;
  for (const auto& [name, mat] : params.tensors) {
    buf.resize(static_cast<size_t>(mat.size()));
    for (Eigen::Index i = 0; i < mat.size(); ++i)
      buf[static_cast<size_t>(i)] = static_cast<float>(mat.data()[i]);
    f.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!f) throw std::runtime_error("save_checkpoint: write failure on " + path);
}

template <typename S>
std::pair<ParamStore<S>, CheckpointMeta> load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  std::uint8_t lenb[4];
  f.read(reinterpret_cast<char*>(lenb), 4);
  const std::uint32_t hlen = lenb[0] | (lenb[1] << 8) | (lenb[2] << 16) |
                             (static_cast<std::uint32_t>(lenb[3]) << 24);
  std::string hs(hlen, '\0');
  f.read(hs.data(), hlen);
  if (!f) throw std::runtime_error("load_checkpoint: truncated header in " + path);
  const nlohmann::json header = nlohmann::json::parse(hs);

  CheckpointMeta meta;
  meta.architecture = header.at("architecture").get<ArchitectureConfig>();
  meta.step = header.at("step").get<std::uint64_t>();
  meta.seed = header.at("seed").get<std::uint64_t>();

  ParamStore<S> params;
  for (const auto& entry : header.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    const std::uint64_t count = entry.at("count").get<std::uint64_t>();
    std::vector<float> buf(count);
    f.read(reinterpret_cast<char*>(buf.data()),
           static_cast<std::streamsize>(count * sizeof(float)));
    if (!f) throw std::runtime_error("load_checkpoint: truncated tensor " + name);
    // Matrix extents are recovered from the shape tag: conv kernels are
    // (k*k*cin) x cout, dense (in x out), biases 1 x n.
    Eigen::Index rows, cols;
    if (shape.size() == 4) {
      rows = static_cast<Eigen::Index>(shape[0]) * shape[1] * shape[2];
      cols = shape[3];
    } else if (shape.size() == 2) {
      rows = shape[0];
      cols = shape[1];
    } else if (shape.size() == 1) {
      rows = 1;
      cols = shape[0];
    } else {
      throw std::runtime_error("load_checkpoint: unsupported shape rank for " + name);
    }
    typename ParamStore<S>::Mat m(rows, cols);
    if (static_cast<std::uint64_t>(m.size()) != count)
      throw std::runtime_error("load_checkpoint: shape/count mismatch for " + name);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<S>(buf[static_cast<size_t>(i)]);
    params.add(name, std::move(m), shape);
  }
  return {std::move(params), meta};
}

}  // namespace lipgan
