#include "edmp/denoiser.hpp"

#include "edmp/rng.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace edmp::nn {

using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using ConstVecMap = Eigen::Map<const Vec>;
using MutVecMap = Eigen::Map<Vec>;

// ---------------------------------------------------------------------------
// ops

Mat im2col(const Mat& x, const ConvShape& s) {
  const int len = static_cast<int>(x.cols());
  const int out_len = s.out_length(len);
  const int pad = s.pad();
  Mat cols = Mat::Zero(static_cast<Eigen::Index>(s.cin) * s.kernel, out_len);
  for (int j = 0; j < out_len; ++j) {
    for (int k = 0; k < s.kernel; ++k) {
      int src = j * s.stride + k - pad;
      if (src < 0 || src >= len) continue;
      for (int c = 0; c < s.cin; ++c) cols(c * s.kernel + k, j) = x(c, src);
    }
  }
  return cols;
}

Mat col2im(const Mat& cols, const ConvShape& s, int length) {
  Mat x = Mat::Zero(s.cin, length);
  const int pad = s.pad();
  for (int j = 0; j < cols.cols(); ++j) {
    for (int k = 0; k < s.kernel; ++k) {
      int src = j * s.stride + k - pad;
      if (src < 0 || src >= length) continue;
      for (int c = 0; c < s.cin; ++c) x(c, src) += cols(c * s.kernel + k, j);
    }
  }
  return x;
}

Mat conv1d(const Mat& x, std::span<const double> w, std::span<const double> b, const ConvShape& s) {
  ConstMap wm(w.data(), s.cout, static_cast<Eigen::Index>(s.cin) * s.kernel);
  Mat y = wm * im2col(x, s);
  y.colwise() += ConstVecMap(b.data(), s.cout);
  return y;
}

Mat conv1d_reference(const Mat& x, std::span<const double> w, std::span<const double> b, const ConvShape& s) {
  const int len = static_cast<int>(x.cols());
  const int out_len = s.out_length(len);
  Mat y(s.cout, out_len);
  for (int o = 0; o < s.cout; ++o) {
    for (int j = 0; j < out_len; ++j) {
      double acc = b[o];
      for (int c = 0; c < s.cin; ++c) {
        for (int k = 0; k < s.kernel; ++k) {
          int src = j * s.stride + k - s.pad();
          if (src >= 0 && src < len) acc += w[(static_cast<std::size_t>(o) * s.cin + c) * s.kernel + k] * x(c, src);
        }
      }
      y(o, j) = acc;
    }
  }
  return y;
}

Mat conv1d_backward(const Mat& cols, const Mat& dy, std::span<const double> w, const ConvShape& s, int length,
                    std::span<double> dw, std::span<double> db) {
  const Eigen::Index ck = static_cast<Eigen::Index>(s.cin) * s.kernel;
  MutMap(dw.data(), s.cout, ck).noalias() += dy * cols.transpose();
  MutVecMap(db.data(), s.cout) += dy.rowwise().sum();
  Mat dcols = ConstMap(w.data(), s.cout, ck).transpose() * dy;
  return col2im(dcols, s, length);
}

Mat silu(const Mat& x) {
  return x.unaryExpr([](double v) { return v * sigmoid(v); });
}

Mat silu_backward(const Mat& x, const Mat& dy) {
  return dy.binaryExpr(x, [](double g, double v) {
    double sg = sigmoid(v);
    return g * (sg * (1.0 + v * (1.0 - sg)));
  });
}

Mat upsample2(const Mat& x, int length) {
  Mat y(x.rows(), length);
  for (int j = 0; j < length; ++j) y.col(j) = x.col(std::min<Eigen::Index>(j / 2, x.cols() - 1));
  return y;
}

Mat upsample2_backward(const Mat& dy, int source_length) {
  Mat dx = Mat::Zero(dy.rows(), source_length);
  for (int j = 0; j < dy.cols(); ++j) dx.col(std::min(j / 2, source_length - 1)) += dy.col(j);
  return dx;
}

Vec timestep_embedding(int t, int dim) {
  const int half = dim / 2;
  Vec e(dim);
  for (int i = 0; i < half; ++i) {
    double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / std::max(1, half - 1));
    e[i] = std::sin(t * freq);
    e[half + i] = std::cos(t * freq);
  }
  return e;
}

// ---------------------------------------------------------------------------
// config

std::string DenoiserConfig::descriptor() const {
  std::ostringstream os;
  os << "unet1d m=" << m << " h=" << h << " widths=" << widths[0] << ',' << widths[1] << ',' << widths[2]
     << " kernel=" << kernel << " temb=" << temb_dim;
  return os.str();
}

DenoiserConfig DenoiserConfig::from_descriptor(const std::string& text) {
  DenoiserConfig c;
  std::istringstream is(text);
  std::string word;
  is >> word;
  if (word != "unet1d") throw std::invalid_argument("unknown architecture '" + word + "'");
  int seen = 0;
  while (is >> word) {
    auto eq = word.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("bad descriptor token '" + word + "'");
    std::string key = word.substr(0, eq), val = word.substr(eq + 1);
    if (key == "m") {
      c.m = std::stoi(val);
    } else if (key == "h") {
      c.h = std::stoi(val);
    } else if (key == "kernel") {
      c.kernel = std::stoi(val);
    } else if (key == "temb") {
      c.temb_dim = std::stoi(val);
    } else if (key == "widths") {
      char sep1 = 0, sep2 = 0;
      std::istringstream ws(val);
      ws >> c.widths[0] >> sep1 >> c.widths[1] >> sep2 >> c.widths[2];
      if (!ws || sep1 != ',' || sep2 != ',') throw std::invalid_argument("bad widths '" + val + "'");
    } else {
      throw std::invalid_argument("unknown descriptor key '" + key + "'");
    }
    ++seen;
  }
  if (seen != 5) throw std::invalid_argument("incomplete architecture descriptor '" + text + "'");
  return c;
}

// ---------------------------------------------------------------------------
// network

struct Denoiser::ResCache {
  Mat x;
  Mat cols1, pre1, cols2, pre2, skip_cols;
};

struct Denoiser::Forward {
  Vec e_raw, e_pre, emb;
  ResCache c_enc1, c_enc2, c_mid, c_dec2, c_dec1;
  Mat enc1, cols_down1, d1, enc2, cols_down2, d2, mid, dec2, dec1, cols_head, out;
};

std::size_t Denoiser::add_tensor(const std::string& name, std::vector<int> shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  TensorInfo info{name, std::move(shape), params_.size(), n};
  params_.resize(params_.size() + n, 0.0);
  tensors_.push_back(std::move(info));
  return tensors_.back().offset;
}

Denoiser::Conv Denoiser::make_conv(const std::string& name, ConvShape shape) {
  Conv c;
  c.shape = shape;
  c.w = add_tensor(name + ".w", {shape.cout, shape.cin, shape.kernel});
  c.b = add_tensor(name + ".b", {shape.cout});
  return c;
}

Denoiser::Linear Denoiser::make_linear(const std::string& name, int in, int out) {
  Linear l;
  l.in = in;
  l.out = out;
  l.w = add_tensor(name + ".w", {out, in});
  l.b = add_tensor(name + ".b", {out});
  return l;
}

Denoiser::ResBlock Denoiser::make_block(const std::string& name, int cin, int cout) {
  ResBlock b;
  b.name = name;
  b.conv1 = make_conv(name + ".conv1", {cin, cout, cfg_.kernel, 1});
  b.temb = make_linear(name + ".temb", cfg_.temb_dim, cout);
  b.conv2 = make_conv(name + ".conv2", {cout, cout, cfg_.kernel, 1});
  if (cin != cout) {
    b.has_skip = true;
    b.skip = make_conv(name + ".skip", {cin, cout, 1, 1});
  }
  return b;
}

Denoiser::Denoiser(const DenoiserConfig& cfg) : cfg_(cfg) {
  if (cfg.m < 1 || cfg.h < 4) throw std::invalid_argument("denoiser: need m >= 1 and h >= 4");
  if (cfg.kernel < 1 || cfg.kernel % 2 == 0) throw std::invalid_argument("denoiser: kernel must be odd");
  if (cfg.temb_dim < 2 || cfg.temb_dim % 2) throw std::invalid_argument("denoiser: temb_dim must be even");
  for (int w : cfg.widths)
    if (w < 1) throw std::invalid_argument("denoiser: widths must be positive");
  const auto [w1, w2, w3] = cfg.widths;
  temb_mlp_ = make_linear("temb_mlp", cfg.temb_dim, cfg.temb_dim);
  enc1_ = make_block("enc1", cfg.m, w1);
  down1_ = make_conv("down1", {w1, w1, cfg.kernel, 2});
  enc2_ = make_block("enc2", w1, w2);
  down2_ = make_conv("down2", {w2, w2, cfg.kernel, 2});
  mid_ = make_block("mid", w2, w3);
  dec2_ = make_block("dec2", w3 + w2, w2);
  dec1_ = make_block("dec1", w2 + w1, w1);
  head_ = make_conv("head", {w1, cfg.m, cfg.kernel, 1});
}

void Denoiser::initialize(std::uint64_t seed) {
  rng::Stream stream(seed, rng::Purpose::param_init);
  // Biases reuse the fan-in of the weight registered just before them.
  std::size_t fan_in = 1;
  for (const TensorInfo& t : tensors_) {
    if (t.shape.size() > 1) {
      fan_in = 1;
      for (std::size_t d = 1; d < t.shape.size(); ++d) fan_in *= t.shape[d];
    }
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.size; ++i) params_[t.offset + i] = stream.uniform(-bound, bound);
  }
  zero_head();
  round_to_float();
}

void Denoiser::zero_head() {
  std::fill_n(params_.begin() + head_.w, head_.shape.weight_size(), 0.0);
  std::fill_n(params_.begin() + head_.b, head_.shape.cout, 0.0);
}

void Denoiser::round_to_float() {
  for (double& p : params_) p = static_cast<double>(static_cast<float>(p));
}

Mat Denoiser::apply_conv(const Conv& c, const Mat& x, Mat* cols_out) const {
  Mat cols = im2col(x, c.shape);
  Mat y = ConstMap(params_.data() + c.w, c.shape.cout, static_cast<Eigen::Index>(c.shape.cin) * c.shape.kernel) * cols;
  y.colwise() += ConstVecMap(params_.data() + c.b, c.shape.cout);
  if (cols_out) *cols_out = std::move(cols);
  return y;
}

Vec Denoiser::apply_linear(const Linear& l, const Vec& x) const {
  return ConstMap(params_.data() + l.w, l.out, l.in) * x + ConstVecMap(params_.data() + l.b, l.out);
}

namespace {
void require_finite(const Mat& m, const std::string& layer) {
  if (!m.allFinite()) throw std::runtime_error("denoiser: non-finite activation in layer " + layer);
}
}  // namespace

Mat Denoiser::block_forward(const ResBlock& blk, const Mat& x, const Vec& emb, ResCache& cache) const {
  cache.x = x;
  cache.pre1 = apply_conv(blk.conv1, x, &cache.cols1);
  cache.pre1.colwise() += apply_linear(blk.temb, emb);
  Mat a1 = silu(cache.pre1);
  cache.pre2 = apply_conv(blk.conv2, a1, &cache.cols2);
  Mat out = silu(cache.pre2);
  if (blk.has_skip) {
    out += apply_conv(blk.skip, x, &cache.skip_cols);
  } else {
    out += x;
  }
  require_finite(out, blk.name);
  return out;
}

Mat Denoiser::conv_backward(const Conv& c, const Mat& cols, const Mat& dy, int length, std::span<double> grad) const {
  return conv1d_backward(cols, dy, span(c.w, c.shape.weight_size()), c.shape, length,
                         grad.subspan(c.w, c.shape.weight_size()), grad.subspan(c.b, c.shape.cout));
}

Mat Denoiser::block_backward(const ResBlock& blk, const ResCache& cache, const Mat& dout, const Vec& emb, Vec& demb,
                             std::span<double> grad) const {
  const int len = static_cast<int>(cache.x.cols());
  Mat dpre2 = silu_backward(cache.pre2, dout);
  Mat da1 = conv_backward(blk.conv2, cache.cols2, dpre2, len, grad);
  Mat dpre1 = silu_backward(cache.pre1, da1);
  Vec dproj = dpre1.rowwise().sum();
  MutMap(grad.data() + blk.temb.w, blk.temb.out, blk.temb.in).noalias() += dproj * emb.transpose();
  MutVecMap(grad.data() + blk.temb.b, blk.temb.out) += dproj;
  demb.noalias() += ConstMap(params_.data() + blk.temb.w, blk.temb.out, blk.temb.in).transpose() * dproj;
  Mat dx = conv_backward(blk.conv1, cache.cols1, dpre1, len, grad);
  if (blk.has_skip) {
    dx += conv_backward(blk.skip, cache.skip_cols, dout, len, grad);
  } else {
    dx += dout;
  }
  return dx;
}

void Denoiser::run_forward(const Trajectory& x_t, int t, Forward& f) const {
  if (x_t.rows() != cfg_.h || x_t.cols() != cfg_.m)
    throw std::invalid_argument("denoiser: expected a " + std::to_string(cfg_.h) + "x" + std::to_string(cfg_.m) +
                                " trajectory");
  f.e_raw = timestep_embedding(t, cfg_.temb_dim);
  f.e_pre = apply_linear(temb_mlp_, f.e_raw);
  f.emb = silu(f.e_pre);
  Mat x = x_t.transpose();
  require_finite(x, "input");
  f.enc1 = block_forward(enc1_, x, f.emb, f.c_enc1);
  f.d1 = apply_conv(down1_, f.enc1, &f.cols_down1);
  require_finite(f.d1, "down1");
  f.enc2 = block_forward(enc2_, f.d1, f.emb, f.c_enc2);
  f.d2 = apply_conv(down2_, f.enc2, &f.cols_down2);
  require_finite(f.d2, "down2");
  f.mid = block_forward(mid_, f.d2, f.emb, f.c_mid);
  Mat cat2(f.mid.rows() + f.enc2.rows(), f.enc2.cols());
  cat2 << upsample2(f.mid, static_cast<int>(f.enc2.cols())), f.enc2;
  f.dec2 = block_forward(dec2_, cat2, f.emb, f.c_dec2);
  Mat cat1(f.dec2.rows() + f.enc1.rows(), f.enc1.cols());
  cat1 << upsample2(f.dec2, static_cast<int>(f.enc1.cols())), f.enc1;
  f.dec1 = block_forward(dec1_, cat1, f.emb, f.c_dec1);
  f.out = apply_conv(head_, f.dec1, &f.cols_head);
  require_finite(f.out, "head");
}

Trajectory Denoiser::predict(const Trajectory& x_t, int t) const {
  Forward f;
  run_forward(x_t, t, f);
  return f.out.transpose();
}

namespace {
double masked_mse(const Mat& pred, const Mat& target, bool exclude_endpoints, Mat* dpred) {
  // pred/target are m x h (channel-major).
  const Eigen::Index h = pred.cols();
  const Eigen::Index first = exclude_endpoints ? 1 : 0;
  const Eigen::Index count = exclude_endpoints ? h - 2 : h;
  const double n = static_cast<double>(count * pred.rows());
  Mat diff = pred.middleCols(first, count) - target.middleCols(first, count);
  if (dpred) {
    *dpred = Mat::Zero(pred.rows(), h);
    dpred->middleCols(first, count) = (2.0 / n) * diff;
  }
  return diff.squaredNorm() / n;
}
}  // namespace

double Denoiser::loss(const Trajectory& x_t, int t, const Trajectory& eps, bool exclude_endpoints) const {
  Forward f;
  run_forward(x_t, t, f);
  return masked_mse(f.out, eps.transpose(), exclude_endpoints, nullptr);
}

double Denoiser::loss_and_gradient(const Trajectory& x_t, int t, const Trajectory& eps, bool exclude_endpoints,
                                   std::span<double> out_grad) const {
  if (out_grad.size() != params_.size()) throw std::invalid_argument("denoiser: gradient buffer size mismatch");
  // Vectorised reductions round differently depending on where a buffer
  // starts, so gradients are formed in aligned scratch and added afterwards.
  thread_local AlignedBuffer scratch;
  scratch.assign(params_.size(), 0.0);
  std::span<double> grad(scratch);
  Forward f;
  run_forward(x_t, t, f);
  Mat dout;
  double value = masked_mse(f.out, eps.transpose(), exclude_endpoints, &dout);

  const auto [w1, w2, w3] = cfg_.widths;
  const int h = cfg_.h;
  const int l1 = static_cast<int>(f.enc2.cols());
  const int l2 = static_cast<int>(f.mid.cols());
  Vec demb = Vec::Zero(cfg_.temb_dim);

  Mat d_dec1 = conv_backward(head_, f.cols_head, dout, h, grad);
  Mat d_cat1 = block_backward(dec1_, f.c_dec1, d_dec1, f.emb, demb, grad);
  Mat d_enc1 = d_cat1.bottomRows(w1);
  Mat d_dec2 = upsample2_backward(d_cat1.topRows(w2), l1);
  Mat d_cat2 = block_backward(dec2_, f.c_dec2, d_dec2, f.emb, demb, grad);
  Mat d_enc2 = d_cat2.bottomRows(w2);
  Mat d_mid = upsample2_backward(d_cat2.topRows(w3), l2);
  Mat d_d2 = block_backward(mid_, f.c_mid, d_mid, f.emb, demb, grad);
  d_enc2 += conv_backward(down2_, f.cols_down2, d_d2, l1, grad);
  Mat d_d1 = block_backward(enc2_, f.c_enc2, d_enc2, f.emb, demb, grad);
  d_enc1 += conv_backward(down1_, f.cols_down1, d_d1, h, grad);
  block_backward(enc1_, f.c_enc1, d_enc1, f.emb, demb, grad);

  Vec d_pre = silu_backward(f.e_pre, demb);
  MutMap(grad.data() + temb_mlp_.w, temb_mlp_.out, temb_mlp_.in).noalias() += d_pre * f.e_raw.transpose();
  MutVecMap(grad.data() + temb_mlp_.b, temb_mlp_.out) += d_pre;
  for (std::size_t k = 0; k < out_grad.size(); ++k) out_grad[k] += grad[k];
  return value;
}

}  // namespace edmp::nn
