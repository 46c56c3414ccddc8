#pragma once
// Frozen visual front end: a small from-scratch CNN trained once on the
// pretraining images (27-way combination class + a separate left/not-left
// output), then used only as a feature bank. The three deepest conv layers'
// ReLU activations, concatenated and max-normalized per feature, are the
// 4416-dim input the associative network sees.
//
// Layers are generic (any kernel/channel geometry) and templated on the
// scalar so gradients can be finite-difference-checked in double; the
// production reservoir is float. Convolutions are valid-mode stride 1 via
// im2col + GEMM, pooling is 2x2/2 max with floor semantics.

#include "aan/binio.hpp"
#include "aan/png_io.hpp"
#include "aan/rng.hpp"
#include "aan/shape_world.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace aan {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

struct LayerDef {
  enum Kind : std::uint8_t { conv = 0, pool = 1 } kind = conv;
  int out_c = 0;  // conv only
  int k = 0;      // conv only
};

inline LayerDef conv_def(int out_c, int k) { return {LayerDef::conv, out_c, k}; }
inline LayerDef pool_def() { return {LayerDef::pool, 0, 0}; }

// The binding reservoir geometry: 100x100x3 in, six conv layers with three
// interleaved 2x2 poolings, ending at 1x1x64, then a 28-way linear head
// (27 softmax classes + 1 independent logistic output).
inline std::vector<LayerDef> reservoir_layout() {
  return {conv_def(4, 5),  pool_def(),      conv_def(32, 5), pool_def(),
          conv_def(64, 5), pool_def(),      conv_def(128, 5),
          conv_def(128, 3), conv_def(64, 3)};
}

inline constexpr int kFeatureDim = 4416;  // 128*5*5 + 128*3*3 + 64*1*1
inline constexpr int kHeadOutputs = 28;
inline constexpr int kNumClasses = 27;

// Activations are stored as (channels x positions) matrices, positions
// row-major (p = y*w + x). Eigen's column-major storage then walks
// channel-fastest, which is what both GEMM operands want.
template <typename T>
class ConvNet {
 public:
  struct Layer {
    LayerDef def;
    int in_c = 0, in_h = 0, in_w = 0;
    int out_c = 0, out_h = 0, out_w = 0;
    // conv state
    Mat<T> W;   // (out_c, in_c*k*k)
    Vec<T> b;   // (out_c)
    Mat<T> dW, mW;
    Vec<T> db, mb;
    // buffers
    Mat<T> cols;     // (in_c*k*k, out_h*out_w)
    Mat<T> dcols;    // same shape, backward scratch
    Mat<T> act;      // (out_c, out_h*out_w) post-ReLU (conv) / pooled (pool)
    Mat<T> dact;     // gradient wrt act
    std::vector<std::int32_t> argmax;  // pool only, per output element
  };

  ConvNet() = default;

  ConvNet(const std::vector<LayerDef>& defs, int in_c, int in_h, int in_w,
          int head_out, std::uint64_t seed) {
    in_c_ = in_c;
    in_h_ = in_h;
    in_w_ = in_w;
    Rng rng(sub_seed(seed, 0x52455352ull));  // weight-init stream
    int c = in_c, h = in_h, w = in_w;
    for (const auto& d : defs) {
      Layer L;
      L.def = d;
      L.in_c = c;
      L.in_h = h;
      L.in_w = w;
      if (d.kind == LayerDef::conv) {
        L.out_c = d.out_c;
        L.out_h = h - d.k + 1;
        L.out_w = w - d.k + 1;
        if (L.out_h <= 0 || L.out_w <= 0) throw std::runtime_error("conv shrinks below 1x1");
        const int fan_in = c * d.k * d.k;
        L.W.resize(d.out_c, fan_in);
        const double sigma = std::sqrt(2.0 / fan_in);
        for (int i = 0; i < L.W.rows(); ++i)
          for (int j = 0; j < L.W.cols(); ++j)
            L.W(i, j) = static_cast<T>(rng.normal() * sigma);
        L.b = Vec<T>::Zero(d.out_c);
        L.dW = Mat<T>::Zero(L.W.rows(), L.W.cols());
        L.mW = Mat<T>::Zero(L.W.rows(), L.W.cols());
        L.db = Vec<T>::Zero(d.out_c);
        L.mb = Vec<T>::Zero(d.out_c);
        L.cols.resize(fan_in, L.out_h * L.out_w);
        L.dcols.resize(fan_in, L.out_h * L.out_w);
      } else {
        L.out_c = c;
        L.out_h = h / 2;
        L.out_w = w / 2;
        if (L.out_h == 0 || L.out_w == 0) throw std::runtime_error("pool shrinks below 1x1");
        L.argmax.assign(std::size_t(L.out_c) * L.out_h * L.out_w, 0);
      }
      L.act.resize(L.out_c, L.out_h * L.out_w);
      L.dact.resize(L.out_c, L.out_h * L.out_w);
      c = L.out_c;
      h = L.out_h;
      w = L.out_w;
      layers_.push_back(std::move(L));
    }
    head_in_ = c * h * w;
    headW_.resize(head_out, head_in_);
    const double sigma = std::sqrt(2.0 / head_in_);
    for (int i = 0; i < headW_.rows(); ++i)
      for (int j = 0; j < headW_.cols(); ++j)
        headW_(i, j) = static_cast<T>(rng.normal() * sigma);
    headB_ = Vec<T>::Zero(head_out);
    head_dW_ = Mat<T>::Zero(head_out, head_in_);
    head_mW_ = Mat<T>::Zero(head_out, head_in_);
    head_db_ = Vec<T>::Zero(head_out);
    head_mb_ = Vec<T>::Zero(head_out);
    logits_.resize(head_out);
  }

  int input_c() const { return in_c_; }
  int input_h() const { return in_h_; }
  int input_w() const { return in_w_; }
  std::size_t num_layers() const { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return layers_[i]; }
  Mat<T>& head_weights() { return headW_; }

  // input: (in_c, in_h*in_w)
  const Vec<T>& forward(const Mat<T>& input) {
    const Mat<T>* x = &input;
    for (auto& L : layers_) {
      if (L.def.kind == LayerDef::conv) {
        im2col(*x, L);
        L.act.noalias() = L.W * L.cols;
        L.act.colwise() += L.b;
        L.act = L.act.cwiseMax(T(0));  // ReLU
      } else {
        max_pool(*x, L);
      }
      x = &L.act;
    }
    Eigen::Map<const Vec<T>> flat(x->data(), head_in_);
    logits_.noalias() = headW_ * flat;
    logits_ += headB_;
    return logits_;
  }

  // Softmax cross-entropy on the first kNumClasses outputs plus logistic
  // loss on the last output. Accumulates parameter gradients; call
  // sgd_step() once per batch.
  double loss_and_backward(const Mat<T>& input, int cls, bool left) {
    forward(input);

    Vec<T> dlogits(logits_.size());
    // stable softmax over the class block
    const int C = kNumClasses;
    T mx = logits_.head(C).maxCoeff();
    Vec<T> ex = (logits_.head(C).array() - mx).exp();
    const T Z = ex.sum();
    double loss = -std::log(double(ex[cls] / Z) + 1e-300);
    dlogits.head(C) = ex / Z;
    dlogits[cls] -= T(1);
    // logistic output
    const T z = logits_[logits_.size() - 1];
    const double p = 1.0 / (1.0 + std::exp(-double(z)));
    const double y = left ? 1.0 : 0.0;
    loss += -(y * std::log(p + 1e-300) + (1.0 - y) * std::log(1.0 - p + 1e-300));
    dlogits[logits_.size() - 1] = static_cast<T>(p - y);

    // head
    const Mat<T>& top = layers_.empty() ? input : layers_.back().act;
    Eigen::Map<const Vec<T>> flat(top.data(), head_in_);
    head_dW_.noalias() += dlogits * flat.transpose();
    head_db_ += dlogits;
    Vec<T> dflat = headW_.transpose() * dlogits;

    // down the stack
    Mat<T>* dnext = &layers_.back().dact;
    Eigen::Map<Mat<T>>(layers_.back().dact.data(), layers_.back().dact.rows(),
                       layers_.back().dact.cols()) =
        Eigen::Map<Mat<T>>(dflat.data(), layers_.back().act.rows(),
                           layers_.back().act.cols());
    for (std::size_t li = layers_.size(); li-- > 0;) {
      Layer& L = layers_[li];
      Mat<T>* dbelow = li == 0 ? nullptr : &layers_[li - 1].dact;
      if (L.def.kind == LayerDef::conv) {
        // ReLU gate
        *dnext = dnext->array() * (L.act.array() > T(0)).template cast<T>();
        L.dW.noalias() += *dnext * L.cols.transpose();
        L.db += dnext->rowwise().sum();
        if (dbelow) {
          L.dcols.noalias() = L.W.transpose() * *dnext;
          col2im(L.dcols, L, *dbelow);
        }
      } else if (dbelow) {
        dbelow->setZero();
        const T* dsrc = dnext->data();
        T* ddst = dbelow->data();
        const int n = L.out_c * L.out_h * L.out_w;
        for (int i = 0; i < n; ++i) ddst[L.argmax[i]] += dsrc[i];
      }
      dnext = dbelow;
      if (!dnext) break;
    }
    return loss;
  }

  void sgd_step(double lr, double momentum, int batch) {
    const T scale = static_cast<T>(1.0 / batch);
    for (auto& L : layers_) {
      if (L.def.kind != LayerDef::conv) continue;
      L.mW = static_cast<T>(momentum) * L.mW - static_cast<T>(lr) * (L.dW * scale);
      L.mb = static_cast<T>(momentum) * L.mb - static_cast<T>(lr) * (L.db * scale);
      L.W += L.mW;
      L.b += L.mb;
      L.dW.setZero();
      L.db.setZero();
    }
    head_mW_ = static_cast<T>(momentum) * head_mW_ - static_cast<T>(lr) * (head_dW_ * scale);
    head_mb_ = static_cast<T>(momentum) * head_mb_ - static_cast<T>(lr) * (head_db_ * scale);
    headW_ += head_mW_;
    headB_ += head_mb_;
    head_dW_.setZero();
    head_db_.setZero();
  }

  // --- flat parameter access (gradient checking, checksums) ---------------
  std::size_t param_count() const {
    std::size_t n = headW_.size() + headB_.size();
    for (const auto& L : layers_)
      if (L.def.kind == LayerDef::conv) n += L.W.size() + L.b.size();
    return n;
  }

  template <typename F>
  void for_each_param_block(F&& f) {
    for (auto& L : layers_)
      if (L.def.kind == LayerDef::conv) {
        f(L.W.data(), L.W.size(), L.dW.data());
        f(L.b.data(), L.b.size(), L.db.data());
      }
    f(headW_.data(), headW_.size(), head_dW_.data());
    f(headB_.data(), headB_.size(), head_db_.data());
  }

  std::vector<T> get_params() {
    std::vector<T> out;
    out.reserve(param_count());
    for_each_param_block([&](T* p, std::ptrdiff_t n, T*) { out.insert(out.end(), p, p + n); });
    return out;
  }
  void set_params(const std::vector<T>& v) {
    std::size_t off = 0;
    for_each_param_block([&](T* p, std::ptrdiff_t n, T*) {
      std::copy(v.begin() + off, v.begin() + off + n, p);
      off += n;
    });
    if (off != v.size()) throw std::runtime_error("set_params: size mismatch");
  }
  std::vector<T> get_grads() {
    std::vector<T> out;
    out.reserve(param_count());
    for_each_param_block([&](T*, std::ptrdiff_t n, T* g) { out.insert(out.end(), g, g + n); });
    return out;
  }
  void zero_grads() {
    for_each_param_block([&](T*, std::ptrdiff_t n, T* g) { std::fill(g, g + n, T(0)); });
  }

 private:
  void im2col(const Mat<T>& x, Layer& L) {
    const int k = L.def.k;
    // cols(row = (dy*k+dx)*in_c + c, col = p) so that channel runs fastest,
    // matching the (channels x positions) activation layout.
    for (int oy = 0; oy < L.out_h; ++oy)
      for (int ox = 0; ox < L.out_w; ++ox) {
        const int p = oy * L.out_w + ox;
        T* dst = L.cols.col(p).data();
        for (int dy = 0; dy < k; ++dy) {
          const int iy = oy + dy;
          const T* src = x.col(iy * L.in_w + ox).data();
          // copy k consecutive input columns (each in_c long)
          std::copy(src, src + std::size_t(k) * L.in_c, dst);
          dst += std::size_t(k) * L.in_c;
        }
      }
  }

  void col2im(const Mat<T>& cols, Layer& L, Mat<T>& dx) {
    dx.setZero();
    const int k = L.def.k;
    for (int oy = 0; oy < L.out_h; ++oy)
      for (int ox = 0; ox < L.out_w; ++ox) {
        const int p = oy * L.out_w + ox;
        const T* src = cols.col(p).data();
        for (int dy = 0; dy < k; ++dy) {
          const int iy = oy + dy;
          T* dst = dx.col(iy * L.in_w + ox).data();
          for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(k) * L.in_c; ++i) dst[i] += src[i];
          src += std::size_t(k) * L.in_c;
        }
      }
  }

  void max_pool(const Mat<T>& x, Layer& L) {
    for (int oy = 0; oy < L.out_h; ++oy)
      for (int ox = 0; ox < L.out_w; ++ox) {
        const int p_out = oy * L.out_w + ox;
        for (int c = 0; c < L.out_c; ++c) {
          T best = -std::numeric_limits<T>::infinity();
          int best_idx = 0;
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx) {
              const int p_in = (2 * oy + dy) * L.in_w + (2 * ox + dx);
              const T v = x(c, p_in);
              if (v > best) {
                best = v;
                best_idx = p_in * L.in_c + c;  // flat col-major index into x
              }
            }
          L.act(c, p_out) = best;
          L.argmax[std::size_t(p_out) * L.out_c + c] = best_idx;
        }
      }
  }

  int in_c_ = 0, in_h_ = 0, in_w_ = 0;
  int head_in_ = 0;
  std::vector<Layer> layers_;
  Mat<T> headW_, head_dW_, head_mW_;
  Vec<T> headB_, head_db_, head_mb_;
  Vec<T> logits_;
};

// (channels x positions) float input, RGB scaled to [0,1].
inline Mat<float> image_to_input(const ImageRGB& img) {
  Mat<float> x(3, img.width * img.height);
  const std::size_t n = std::size_t(img.width) * img.height;
  for (std::size_t p = 0; p < n; ++p) {
    x(0, p) = img.pixels[p * 3 + 0] / 255.0f;
    x(1, p) = img.pixels[p * 3 + 1] / 255.0f;
    x(2, p) = img.pixels[p * 3 + 2] / 255.0f;
  }
  return x;
}

// The trained front end plus its per-feature normalization constants.
struct ReservoirModel {
  ConvNet<float> net;
  std::vector<float> feat_max;  // empty until fit_normalization ran

  static constexpr float kNormFloor = 1e-6f;
  // Activation blocks that make up the feature vector (conv layers 4..6 in
  // the stack; indices into reservoir_layout()).
  static constexpr int kFeatureLayers[3] = {6, 7, 8};

  static ReservoirModel fresh(std::uint64_t seed) {
    ReservoirModel m;
    m.net = ConvNet<float>(reservoir_layout(), 3, kCanvas, kCanvas, kHeadOutputs, seed);
    return m;
  }

  // Raw (unnormalized) feature vector: the three deepest conv activations
  // flattened in storage order and concatenated, 4416 values.
  void raw_features(const Mat<float>& input, float* out) {
    net.forward(input);
    std::size_t off = 0;
    for (int li : kFeatureLayers) {
      const auto& act = net.layer(li).act;
      std::copy(act.data(), act.data() + act.size(), out + off);
      off += act.size();
    }
    if (off != kFeatureDim) throw std::runtime_error("feature dim mismatch");
  }

  void normalized_features(const Mat<float>& input, float* out) {
    if (feat_max.empty()) throw std::runtime_error("normalization not fitted");
    raw_features(input, out);
    for (int i = 0; i < kFeatureDim; ++i) {
      const float d = std::max(feat_max[i], kNormFloor);
      out[i] = std::min(out[i] / d, 1.0f);
    }
  }
};

struct HeadAccuracy {
  double class_acc = 0.0;  // 27-way argmax
  double left_acc = 0.0;   // logistic output thresholded at 0.5
};

struct ReservoirTrainConfig {
  int epochs = 20;
  double lr = 0.02;
  double lr_decay = 0.92;  // per epoch
  double momentum = 0.9;
  int batch = 32;
  std::uint64_t seed = 1;
  // Progress callback (epoch, mean loss); optional.
  std::function<void(int, double)> on_epoch;
};

// Images come through a callback so callers can serve them from disk or
// render them on the fly (rendering is ~2 orders of magnitude cheaper than
// one training step, so nothing is cached).
using ImageSource = std::function<ImageRGB(std::size_t)>;

inline HeadAccuracy evaluate_head(ReservoirModel& model,
                                  const std::vector<ImageLabel>& labels,
                                  const ImageSource& image_at) {
  std::size_t ok_cls = 0, ok_left = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Mat<float> x = image_to_input(image_at(i));
    const auto& logits = model.net.forward(x);
    int arg = 0;
    logits.head(kNumClasses).maxCoeff(&arg);
    if (arg == labels[i].class_index) ++ok_cls;
    if ((logits[kHeadOutputs - 1] > 0.0f) == labels[i].is_left) ++ok_left;
  }
  const double n = std::max<std::size_t>(labels.size(), 1);
  return {double(ok_cls) / n, double(ok_left) / n};
}

inline ReservoirModel train_reservoir(const std::vector<ImageLabel>& labels,
                                      const ImageSource& image_at,
                                      const ReservoirTrainConfig& cfg) {
  ReservoirModel model = ReservoirModel::fresh(cfg.seed);
  Rng order_rng(sub_seed(cfg.seed, 0x5348464cull));
  std::vector<std::uint32_t> idx(labels.size());
  for (std::uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;

  double lr = cfg.lr;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(idx);
    double loss_sum = 0.0;
    std::size_t done = 0;
    while (done < idx.size()) {
      const int bs = static_cast<int>(std::min<std::size_t>(cfg.batch, idx.size() - done));
      for (int b = 0; b < bs; ++b) {
        const auto& lab = labels[idx[done + b]];
        const Mat<float> x = image_to_input(image_at(idx[done + b]));
        loss_sum += model.net.loss_and_backward(x, lab.class_index, lab.is_left);
      }
      model.net.sgd_step(lr, cfg.momentum, bs);
      done += bs;
    }
    if (cfg.on_epoch) cfg.on_epoch(epoch, loss_sum / std::max<std::size_t>(idx.size(), 1));
    lr *= cfg.lr_decay;
  }
  return model;
}

// Per-feature max over the given set; the constants then freeze with the
// model. An all-dead feature keeps max 0 and the 1e-6 floor takes over.
inline void fit_normalization(ReservoirModel& model, std::size_t count,
                              const ImageSource& image_at) {
  model.feat_max.assign(kFeatureDim, 0.0f);
  std::vector<float> buf(kFeatureDim);
  for (std::size_t i = 0; i < count; ++i) {
    const Mat<float> x = image_to_input(image_at(i));
    model.raw_features(x, buf.data());
    for (int f = 0; f < kFeatureDim; ++f)
      model.feat_max[f] = std::max(model.feat_max[f], buf[f]);
  }
}

// --- model file (magic AANR, version 1) ------------------------------------

inline void save_reservoir(const std::string& path, ReservoirModel& model) {
  BinWriter w(path);
  w.magic("AANR");
  w.u32(1);
  const auto layout = reservoir_layout();
  w.u32(static_cast<std::uint32_t>(layout.size()));
  for (const auto& d : layout) {
    w.u8(d.kind);
    w.u32(static_cast<std::uint32_t>(d.out_c));
    w.u32(static_cast<std::uint32_t>(d.k));
  }
  model.net.for_each_param_block(
      [&](float* p, std::ptrdiff_t n, float*) { w.f32s(p, static_cast<std::size_t>(n)); });
  w.u8(model.feat_max.empty() ? 0 : 1);
  if (!model.feat_max.empty()) w.f32s(model.feat_max.data(), model.feat_max.size());
}

inline ReservoirModel load_reservoir(const std::string& path) {
  BinReader r(path);
  r.expect_magic("AANR", "reservoir model");
  if (r.u32() != 1) throw std::runtime_error("reservoir model: unsupported version");
  const auto expect = reservoir_layout();
  if (r.u32() != expect.size())
    throw std::runtime_error("reservoir model: layer count mismatch");
  for (const auto& d : expect) {
    if (r.u8() != d.kind || r.u32() != std::uint32_t(d.out_c) || r.u32() != std::uint32_t(d.k))
      throw std::runtime_error("reservoir model: layer geometry mismatch");
  }
  ReservoirModel model = ReservoirModel::fresh(0);
  model.net.for_each_param_block(
      [&](float* p, std::ptrdiff_t n, float*) { r.f32s(p, static_cast<std::size_t>(n)); });
  if (r.u8()) {
    model.feat_max.assign(kFeatureDim, 0.0f);
    r.f32s(model.feat_max.data(), model.feat_max.size());
  }
  return model;
}

// FNV-1a over the parameter bytes; the associative stage must leave this
// untouched (the reservoir is frozen after training).
inline std::uint64_t reservoir_checksum(ReservoirModel& model) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  model.net.for_each_param_block(
      [&](float* p, std::ptrdiff_t n, float*) { mix(p, std::size_t(n) * 4); });
  if (!model.feat_max.empty()) mix(model.feat_max.data(), model.feat_max.size() * 4);
  return h;
}

}  // namespace aan
