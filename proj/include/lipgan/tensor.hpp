#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lipgan {

// Named parameter arrays. Matrices carry the layout used by the layer math
// (conv kernels as (k*k*Cin) x Cout, dense as in x out, biases as 1 x n);
// `shapes` carries the logical shape tag used by the checkpoint format.
template <typename S>
struct ParamStore {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  std::map<std::string, Mat> tensors;
  std::map<std::string, std::vector<int>> shapes;

  Mat& at(const std::string& name) {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw std::out_of_range("ParamStore: missing " + name);
    return it->second;
  }
  const Mat& at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw std::out_of_range("ParamStore: missing " + name);
    return it->second;
  }
  void add(const std::string& name, Mat m, std::vector<int> shape) {
    tensors[name] = std::move(m);
    shapes[name] = std::move(shape);
  }
  size_t scalar_count() const {
    size_t n = 0;
    for (const auto& [k, v] : tensors) n += static_cast<size_t>(v.size());
    return n;
  }
};

// A value on the tape. Feature maps are (H*W) x C with row-major spatial
// indexing; plain vectors use H=n, W=1, C=1 with an n x 1 matrix.
template <typename S>
struct TensorVar {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  Mat val;
  Mat grad;
  int H = 0, W = 0, C = 0;
  bool needs_grad = false;

  void ensure_grad() {
    if (grad.rows() != val.rows() || grad.cols() != val.cols())
      grad = Mat::Zero(val.rows(), val.cols());
  }
};

template <typename S>
using TensorPtr = std::shared_ptr<TensorVar<S>>;

// Records forward ops; running the tape backwards accumulates gradients into
// tensor grads and (for parameters) into the attached gradient store.
template <typename S>
struct Tape {
  using Mat = typename ParamStore<S>::Mat;

  const ParamStore<S>& params;
  ParamStore<S>* grads = nullptr;  // null => inference only, nothing recorded
  std::vector<std::function<void()>> ops;

  explicit Tape(const ParamStore<S>& p, ParamStore<S>* g = nullptr) : params(p), grads(g) {}

  bool recording() const { return grads != nullptr; }

  Mat& grad_of(const std::string& name) {
    auto it = grads->tensors.find(name);
    if (it == grads->tensors.end()) {
      const Mat& p = params.at(name);
      it = grads->tensors.emplace(name, Mat::Zero(p.rows(), p.cols())).first;
    }
    return it->second;
  }

  void backward(const TensorPtr<S>& loss) {
    loss->ensure_grad();
    loss->grad.setConstant(S(1));
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) (*it)();
    ops.clear();
  }

  TensorPtr<S> make(int h, int w, int c, bool needs_grad) {
    auto t = std::make_shared<TensorVar<S>>();
    t->H = h;
    t->W = w;
    t->C = c;
    t->needs_grad = needs_grad && recording();
    return t;
  }
};

// ---- layer ops ----

template <typename S>
TensorPtr<S> input_map(Tape<S>& tape, const typename TensorVar<S>::Mat& data, int h, int w, int c,
                       bool needs_grad = false) {
  auto t = tape.make(h, w, c, needs_grad);
  t->val = data;
  if (t->val.rows() != h * w || t->val.cols() != c)
    throw std::invalid_argument("input_map: data does not match declared shape");
  return t;
}

namespace nnd {
// SAME padding for a given stride: output ceil(n/s).
inline int out_extent(int n, int stride) { return (n + stride - 1) / stride; }
inline int pad_before(int n, int k, int stride) {
  const int out = out_extent(n, stride);
  const int total = std::max((out - 1) * stride + k - n, 0);
  return total / 2;
}
}  // namespace nnd

// 2-D convolution, SAME padding, square kernel. Weights at <name>/w with
// layout (k*k*Cin) x Cout (column ((ky*k)+kx)*Cin + ci), bias at <name>/b.
template <typename S>
TensorPtr<S> conv2d(Tape<S>& tape, const TensorPtr<S>& x, const std::string& name, int kernel,
                    int stride = 1) {
  using Mat = typename TensorVar<S>::Mat;
  const Mat& w = tape.params.at(name + "/w");
  const Mat& b = tape.params.at(name + "/b");
  const int cin = x->C;
  const int cout = static_cast<int>(w.cols());
  if (w.rows() != kernel * kernel * cin)
    throw std::invalid_argument("conv2d: weight shape mismatch at " + name);
  const int ho = nnd::out_extent(x->H, stride);
  const int wo = nnd::out_extent(x->W, stride);
  const int pt = nnd::pad_before(x->H, kernel, stride);
  const int pl = nnd::pad_before(x->W, kernel, stride);

  auto patches = std::make_shared<Mat>(Mat::Zero(ho * wo, kernel * kernel * cin));
  for (int oy = 0; oy < ho; ++oy) {
    for (int ox = 0; ox < wo; ++ox) {
      const int row = oy * wo + ox;
      for (int ky = 0; ky < kernel; ++ky) {
        const int iy = oy * stride - pt + ky;
        if (iy < 0 || iy >= x->H) continue;
        for (int kx = 0; kx < kernel; ++kx) {
          const int ix = ox * stride - pl + kx;
          if (ix < 0 || ix >= x->W) continue;
          patches->block(row, (ky * kernel + kx) * cin, 1, cin) =
              x->val.block(iy * x->W + ix, 0, 1, cin);
        }
      }
    }
  }
  auto out = tape.make(ho, wo, cout, true);
  out->val.noalias() = (*patches) * w;
  out->val.rowwise() += b.row(0);

  if (tape.recording()) {
    const int H = x->H, W = x->W;
    tape.ops.push_back([&tape, x, out, patches, name, kernel, stride, pt, pl, H, W, cin]() {
      const Mat& w2 = tape.params.at(name + "/w");
      tape.grad_of(name + "/w").noalias() += patches->transpose() * out->grad;
      tape.grad_of(name + "/b").row(0) += out->grad.colwise().sum();
      if (x->needs_grad) {
        x->ensure_grad();
        const Mat dpatches = out->grad * w2.transpose();
        const int ho = nnd::out_extent(H, stride), wo = nnd::out_extent(W, stride);
        for (int oy = 0; oy < ho; ++oy)
          for (int ox = 0; ox < wo; ++ox) {
            const int row = oy * wo + ox;
            for (int ky = 0; ky < kernel; ++ky) {
              const int iy = oy * stride - pt + ky;
              if (iy < 0 || iy >= H) continue;
              for (int kx = 0; kx < kernel; ++kx) {
                const int ix = ox * stride - pl + kx;
                if (ix < 0 || ix >= W) continue;
                x->grad.block(iy * W + ix, 0, 1, cin) +=
                    dpatches.block(row, (ky * kernel + kx) * cin, 1, cin);
              }
            }
          }
      }
    });
  }
  return out;
}

template <typename S>
TensorPtr<S> relu(Tape<S>& tape, const TensorPtr<S>& x) {
  auto out = tape.make(x->H, x->W, x->C, x->needs_grad);
  out->val = x->val.cwiseMax(S(0));
  if (tape.recording() && x->needs_grad) {
    tape.ops.push_back([x, out]() {
      x->ensure_grad();
      x->grad.array() += out->grad.array() * (x->val.array() > S(0)).template cast<S>();
    });
  }
  return out;
}

template <typename S>
TensorPtr<S> sigmoid(Tape<S>& tape, const TensorPtr<S>& x) {
  auto out = tape.make(x->H, x->W, x->C, x->needs_grad);
  out->val = (S(1) / (S(1) + (-x->val.array()).exp())).matrix();
  if (tape.recording() && x->needs_grad) {
    tape.ops.push_back([x, out]() {
      x->ensure_grad();
      x->grad.array() += out->grad.array() * out->val.array() * (S(1) - out->val.array());
    });
  }
  return out;
}

template <typename S>
TensorPtr<S> add(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
  if (a->val.rows() != b->val.rows() || a->val.cols() != b->val.cols())
    throw std::invalid_argument("add: shape mismatch");
  auto out = tape.make(a->H, a->W, a->C, a->needs_grad || b->needs_grad);
  out->val = a->val + b->val;
  if (tape.recording() && out->needs_grad) {
    tape.ops.push_back([a, b, out]() {
      if (a->needs_grad) {
        a->ensure_grad();
        a->grad += out->grad;
      }
      if (b->needs_grad) {
        b->ensure_grad();
        b->grad += out->grad;
      }
    });
  }
  return out;
}

// Channel-wise concatenation of two maps with equal spatial extent.
template <typename S>
TensorPtr<S> concat_channels(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
  if (a->H != b->H || a->W != b->W)
    throw std::invalid_argument("concat_channels: spatial mismatch");
  auto out = tape.make(a->H, a->W, a->C + b->C, a->needs_grad || b->needs_grad);
  out->val.resize(a->val.rows(), a->C + b->C);
  out->val.leftCols(a->C) = a->val;
  out->val.rightCols(b->C) = b->val;
  if (tape.recording() && out->needs_grad) {
    tape.ops.push_back([a, b, out]() {
      if (a->needs_grad) {
        a->ensure_grad();
        a->grad += out->grad.leftCols(a->C);
      }
      if (b->needs_grad) {
        b->ensure_grad();
        b->grad += out->grad.rightCols(b->C);
      }
    });
  }
  return out;
}

// Nearest-neighbour resize to an explicit spatial extent (used for the decoder
// upsampling path, where ceil-divided encoder sizes are not powers of two).
template <typename S>
TensorPtr<S> upsample_nearest(Tape<S>& tape, const TensorPtr<S>& x, int ho, int wo) {
  auto out = tape.make(ho, wo, x->C, x->needs_grad);
  out->val.resize(ho * wo, x->C);
  std::vector<int> src_row(static_cast<size_t>(ho) * wo);
  for (int y = 0; y < ho; ++y) {
    const int sy = std::min(static_cast<int>(static_cast<long long>(y) * x->H / ho), x->H - 1);
    for (int xx = 0; xx < wo; ++xx) {
      const int sx = std::min(static_cast<int>(static_cast<long long>(xx) * x->W / wo), x->W - 1);
      src_row[static_cast<size_t>(y) * wo + xx] = sy * x->W + sx;
    }
  }
  for (size_t r = 0; r < src_row.size(); ++r) out->val.row(static_cast<Eigen::Index>(r)) = x->val.row(src_row[r]);
  if (tape.recording() && x->needs_grad) {
    tape.ops.push_back([x, out, src_row = std::move(src_row)]() {
      x->ensure_grad();
      for (size_t r = 0; r < src_row.size(); ++r)
        x->grad.row(src_row[r]) += out->grad.row(static_cast<Eigen::Index>(r));
    });
  }
  return out;
}

// Flatten a map to an n x 1 vector, ordering (y, x, c) -> (y*W + x)*C + c.
template <typename S>
TensorPtr<S> flatten(Tape<S>& tape, const TensorPtr<S>& x) {
  const int n = x->H * x->W * x->C;
  auto out = tape.make(n, 1, 1, x->needs_grad);
  out->val.resize(n, 1);
  for (int r = 0; r < x->H * x->W; ++r)
    for (int c = 0; c < x->C; ++c) out->val(r * x->C + c, 0) = x->val(r, c);
  if (tape.recording() && x->needs_grad) {
    tape.ops.push_back([x, out]() {
      x->ensure_grad();
      for (int r = 0; r < x->H * x->W; ++r)
        for (int c = 0; c < x->C; ++c) x->grad(r, c) += out->grad(r * x->C + c, 0);
    });
  }
  return out;
}

// Inverse of flatten: reshape an n x 1 vector into an h x w x c map.
template <typename S>
TensorPtr<S> unflatten(Tape<S>& tape, const TensorPtr<S>& x, int h, int w, int c) {
  if (x->val.rows() != h * w * c || x->val.cols() != 1)
    throw std::invalid_argument("unflatten: size mismatch");
  auto out = tape.make(h, w, c, x->needs_grad);
  out->val.resize(h * w, c);
  for (int r = 0; r < h * w; ++r)
    for (int cc = 0; cc < c; ++cc) out->val(r, cc) = x->val(r * c + cc, 0);
  if (tape.recording() && x->needs_grad) {
    tape.ops.push_back([x, out, h, w, c]() {
      x->ensure_grad();
      for (int r = 0; r < h * w; ++r)
        for (int cc = 0; cc < c; ++cc) x->grad(r * c + cc, 0) += out->grad(r, cc);
    });
  }
  return out;
}

// Fully connected layer on an n x 1 vector. Weights (in x out), bias (1 x out).
template <typename S>
TensorPtr<S> dense(Tape<S>& tape, const TensorPtr<S>& x, const std::string& name) {
  using Mat = typename TensorVar<S>::Mat;
  const Mat& w = tape.params.at(name + "/w");
  const Mat& b = tape.params.at(name + "/b");
  if (w.rows() != x->val.rows()) throw std::invalid_argument("dense: input size mismatch at " + name);
  auto out = tape.make(static_cast<int>(w.cols()), 1, 1, true);
  out->val.noalias() = w.transpose() * x->val;
  out->val += b.transpose();
  if (tape.recording()) {
    tape.ops.push_back([&tape, x, out, name]() {
      const Mat& w2 = tape.params.at(name + "/w");
      tape.grad_of(name + "/w").noalias() += x->val * out->grad.transpose();
      tape.grad_of(name + "/b") += out->grad.transpose();
      if (x->needs_grad) {
        x->ensure_grad();
        x->grad.noalias() += w2 * out->grad;
      }
    });
  }
  return out;
}

template <typename S>
TensorPtr<S> concat_vec(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
  const int n = static_cast<int>(a->val.rows() + b->val.rows());
  auto out = tape.make(n, 1, 1, a->needs_grad || b->needs_grad);
  out->val.resize(n, 1);
  out->val.topRows(a->val.rows()) = a->val;
  out->val.bottomRows(b->val.rows()) = b->val;
  if (tape.recording() && out->needs_grad) {
    tape.ops.push_back([a, b, out]() {
      if (a->needs_grad) {
        a->ensure_grad();
        a->grad += out->grad.topRows(a->val.rows());
      }
      if (b->needs_grad) {
        b->ensure_grad();
        b->grad += out->grad.bottomRows(b->val.rows());
      }
    });
  }
  return out;
}

// Euclidean distance between two equal-length vectors, as a 1 x 1 tensor.
// Gradient at zero distance is defined as zero.
template <typename S>
TensorPtr<S> l2_distance(Tape<S>& tape, const TensorPtr<S>& a, const TensorPtr<S>& b) {
  if (a->val.rows() != b->val.rows())
    throw std::invalid_argument("l2_distance: length mismatch");
  auto out = tape.make(1, 1, 1, a->needs_grad || b->needs_grad);
  const S d = (a->val - b->val).norm();
  out->val.resize(1, 1);
  out->val(0, 0) = d;
  if (tape.recording() && out->needs_grad) {
    tape.ops.push_back([a, b, out, d]() {
      if (d <= S(0)) return;
      const auto diff = (a->val - b->val) / d * out->grad(0, 0);
      if (a->needs_grad) {
        a->ensure_grad();
        a->grad += diff;
      }
      if (b->needs_grad) {
        b->ensure_grad();
        b->grad -= diff;
      }
    });
  }
  return out;
}

}  // namespace lipgan
