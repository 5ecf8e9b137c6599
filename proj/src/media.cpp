#include "lipgan/media.hpp"

#include <cstdlib>
#include <filesystem>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

namespace lipgan {

namespace {

std::string sidecar_wav(const std::string& video_path) {
  std::filesystem::path p(video_path);
  p.replace_extension(".wav");
  return p.string();
}

Frame mat_to_frame(const cv::Mat& bgr, int index, double fps) {
  Frame f(bgr.rows, bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      f.at(y, x, 0) = row[x][2];
      f.at(y, x, 1) = row[x][1];
      f.at(y, x, 2) = row[x][0];
    }
  }
  f.index = index;
  f.timestamp_ms = fps > 0 ? index * 1000.0 / fps : 0.0;
  return f;
}

cv::Mat frame_to_mat(const Frame& f) {
  cv::Mat bgr(f.height, f.width, CV_8UC3);
  for (int y = 0; y < f.height; ++y) {
    cv::Vec3b* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < f.width; ++x) {
      row[x][0] = f.at(y, x, 2);
      row[x][1] = f.at(y, x, 1);
      row[x][2] = f.at(y, x, 0);
    }
  }
  return bgr;
}

bool ffmpeg_available() {
  static const bool available = [] {
    return std::system("ffmpeg -version > /dev/null 2>&1") == 0;
  }();
  return available;
}

}  // namespace

VideoClip decode_video(const std::string& path) {
  if (!std::filesystem::exists(path)) throw DecodeError("decode_video: no such file: " + path);
  cv::VideoCapture cap(path);
  if (!cap.isOpened()) throw DecodeError("decode_video: unreadable container: " + path);
  VideoClip clip;
  clip.fps = cap.get(cv::CAP_PROP_FPS);
  cv::Mat m;
  int index = 0;
  while (cap.read(m)) clip.frames.push_back(mat_to_frame(m, index++, clip.fps));
  if (clip.frames.empty()) throw DecodeError("decode_video: no decodable frames in " + path);
  const std::string wav = sidecar_wav(path);
  if (std::filesystem::exists(wav)) clip.audio = read_wav(wav);
  return clip;
}

std::string encode_video(const std::vector<Frame>& frames, const std::optional<Waveform>& audio,
                         double fps, const std::string& path) {
  if (frames.empty()) throw std::invalid_argument("encode_video: empty frame list");
  const int h = frames.front().height, w = frames.front().width;
  cv::VideoWriter writer(path, cv::VideoWriter::fourcc('m', 'p', '4', 'v'), fps, cv::Size(w, h));
  if (!writer.isOpened()) throw std::runtime_error("encode_video: cannot open writer for " + path);
  for (const Frame& f : frames) {
    if (f.height != h || f.width != w)
      throw std::invalid_argument("encode_video: inconsistent frame sizes");
    writer.write(frame_to_mat(f));
  }
  writer.release();
  if (audio && !audio->empty()) {
    const std::string wav = sidecar_wav(path);
    write_wav(wav, *audio);
    if (ffmpeg_available()) {
      const std::string tmp = path + ".mux.mp4";
      const std::string cmd = "ffmpeg -y -loglevel error -i '" + path + "' -i '" + wav +
                              "' -c:v copy -c:a aac -shortest '" + tmp + "' > /dev/null 2>&1";
      if (std::system(cmd.c_str()) == 0 && std::filesystem::exists(tmp))
        std::filesystem::rename(tmp, path);
      else
        std::filesystem::remove(tmp);
    }
  }
  return path;
}

Frame read_png(const std::string& path) {
  cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
  if (m.empty()) throw DecodeError("read_png: cannot read " + path);
  return mat_to_frame(m, 0, 0.0);
}

void write_png(const std::string& path, const Frame& frame) {
  if (!cv::imwrite(path, frame_to_mat(frame)))
    throw std::runtime_error("write_png: cannot write " + path);
}

}  // namespace lipgan
