#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lipgan {

// Planar real-valued image. Pixels are stored as a (H*W) x C matrix with
// row-major spatial indexing (row y, column x -> y*W + x), which lets image
// operations and the network layers share one memory layout.
template <typename Scalar>
struct Image {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Mat data;
  int height = 0;
  int width = 0;
  int channels = 0;

  Image() = default;
  Image(int h, int w, int c) : data(Mat::Zero(h * w, c)), height(h), width(w), channels(c) {}

  Scalar& at(int y, int x, int c) { return data(y * width + x, c); }
  Scalar at(int y, int x, int c) const { return data(y * width + x, c); }

  bool same_shape(const Image& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

using ImageF = Image<float>;
using ImageD = Image<double>;

// 8-bit interleaved RGB video frame.
struct Frame {
  std::vector<std::uint8_t> pixels;  // h*w*3, RGB interleaved
  int height = 0;
  int width = 0;
  int index = 0;
  double timestamp_ms = 0.0;

  Frame() = default;
  Frame(int h, int w) : pixels(static_cast<size_t>(h) * w * 3, 0), height(h), width(w) {}

  std::uint8_t& at(int y, int x, int c) { return pixels[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  std::uint8_t at(int y, int x, int c) const { return pixels[(static_cast<size_t>(y) * width + x) * 3 + c]; }
};

struct FaceBox {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;
  int frame_index = 0;

  bool inside(int frame_w, int frame_h) const {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= frame_w && y + h <= frame_h;
  }
};

// Bilinear sample of channel c at continuous position (y, x) in pixel units.
template <typename Scalar>
Scalar bilinear_sample(const Image<Scalar>& img, double y, double x, int c) {
  const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, img.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = std::clamp(x - x0, 0.0, 1.0);
  const double fy = std::clamp(y - y0, 0.0, 1.0);
  const double v = (1 - fy) * ((1 - fx) * img.at(y0, x0, c) + fx * img.at(y0, x1, c)) +
                   fy * ((1 - fx) * img.at(y1, x0, c) + fx * img.at(y1, x1, c));
  return static_cast<Scalar>(v);
}

// Bilinear resize with pixel-center alignment.
template <typename Scalar>
Image<Scalar> resize_bilinear(const Image<Scalar>& src, int out_h, int out_w) {
  Image<Scalar> dst(out_h, out_w, src.channels);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double src_y = (y + 0.5) * sy - 0.5;
    for (int x = 0; x < out_w; ++x) {
      const double src_x = (x + 0.5) * sx - 0.5;
      for (int c = 0; c < src.channels; ++c)
        dst.at(y, x, c) = bilinear_sample(src, src_y, src_x, c);
    }
  }
  return dst;
}

template <typename Scalar>
Image<Scalar> frame_to_image(const Frame& f) {
  Image<Scalar> img(f.height, f.width, 3);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(y, x, c) = static_cast<Scalar>(f.at(y, x, c)) / Scalar(255);
  return img;
}

template <typename Scalar>
Frame image_to_frame(const Image<Scalar>& img) {
  Frame f(img.height, img.width);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = std::clamp(static_cast<double>(img.at(y, x, c)), 0.0, 1.0);
        f.at(y, x, c) = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
  return f;
}

// Crop the boxed region and resample it to size x size, rescaled to [0,1].
template <typename Scalar>
Image<Scalar> crop_resize(const Frame& frame, const FaceBox& box, int size = 96) {
  if (!box.inside(frame.width, frame.height))
    throw std::invalid_argument("crop_resize: box outside frame bounds");
  Image<Scalar> region(box.h, box.w, 3);
  for (int y = 0; y < box.h; ++y)
    for (int x = 0; x < box.w; ++x)
      for (int c = 0; c < 3; ++c)
        region.at(y, x, c) = static_cast<Scalar>(frame.at(box.y + y, box.x + x, c)) / Scalar(255);
  if (box.h == size && box.w == size) return region;
  return resize_bilinear(region, size, size);
}

// Zero rows floor(H/2) .. H-1 in every channel; upper rows pass through.
template <typename Scalar>
Image<Scalar> mask_lower_half(const Image<Scalar>& crop) {
  Image<Scalar> out = crop;
  const int from = crop.height / 2;
  const int rows = (crop.height - from) * crop.width;
  if (rows > 0) out.data.block(from * crop.width, 0, rows, crop.channels).setZero();
  return out;
}

// Write a generated crop into the frame region with a linear alpha feather of
// the given width at the pasted box border. A border edge flush with the frame
// edge gets no feather.
template <typename Scalar>
Frame paste_back(const Frame& frame, const FaceBox& box, const Image<Scalar>& generated,
                 int feather_px = 5) {
  if (!box.inside(frame.width, frame.height))
    throw std::invalid_argument("paste_back: box outside frame bounds");
  Image<Scalar> resized = (generated.height == box.h && generated.width == box.w)
                              ? generated
                              : resize_bilinear(generated, box.h, box.w);
  Frame out = frame;
  const bool feather_left = box.x > 0;
  const bool feather_top = box.y > 0;
  const bool feather_right = box.x + box.w < frame.width;
  const bool feather_bottom = box.y + box.h < frame.height;
  for (int y = 0; y < box.h; ++y) {
    for (int x = 0; x < box.w; ++x) {
      double alpha = 1.0;
      if (feather_left) alpha = std::min(alpha, static_cast<double>(x) / feather_px);
      if (feather_right) alpha = std::min(alpha, static_cast<double>(box.w - 1 - x) / feather_px);
      if (feather_top) alpha = std::min(alpha, static_cast<double>(y) / feather_px);
      if (feather_bottom) alpha = std::min(alpha, static_cast<double>(box.h - 1 - y) / feather_px);
      alpha = std::clamp(alpha, 0.0, 1.0);
      for (int c = 0; c < 3; ++c) {
        const double gen = std::clamp(static_cast<double>(resized.at(y, x, c)), 0.0, 1.0) * 255.0;
        const double src = frame.at(box.y + y, box.x + x, c);
        out.at(box.y + y, box.x + x, c) =
            static_cast<std::uint8_t>(std::lround(alpha * gen + (1.0 - alpha) * src));
      }
    }
  }
  return out;
}

}  // namespace lipgan
