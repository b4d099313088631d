#pragma once

// Per-sample building blocks of the denoiser. Feature maps are channel-major
// (channels x length). Weights live in a flat parameter buffer; a conv weight
// is laid out [out][in][k].

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <span>

namespace edmp::nn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ConvShape {
  int cin = 1;
  int cout = 1;
  int kernel = 1;
  int stride = 1;

  int pad() const { return kernel / 2; }
  int out_length(int len) const { return (len + 2 * pad() - kernel) / stride + 1; }
  std::size_t weight_size() const { return static_cast<std::size_t>(cout) * cin * kernel; }
};

// Unfold x (cin x L) into (cin*kernel) x out_length(L) columns.
Mat im2col(const Mat& x, const ConvShape& s);
// Adjoint of im2col.
Mat col2im(const Mat& cols, const ConvShape& s, int length);

Mat conv1d(const Mat& x, std::span<const double> w, std::span<const double> b, const ConvShape& s);
// Direct nested-loop convolution kept as the reference for conv1d.
Mat conv1d_reference(const Mat& x, std::span<const double> w, std::span<const double> b, const ConvShape& s);

// Given the forward input's columns and dL/dy, accumulate dL/dw, dL/db and
// return dL/dx.
Mat conv1d_backward(const Mat& cols, const Mat& dy, std::span<const double> w, const ConvShape& s,
                    int length, std::span<double> dw, std::span<double> db);

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
Mat silu(const Mat& x);
// dL/dx for y = silu(x).
Mat silu_backward(const Mat& x, const Mat& dy);

// Nearest-neighbour 2x upsampling cropped to `length` columns.
Mat upsample2(const Mat& x, int length);
Mat upsample2_backward(const Mat& dy, int source_length);

// Sinusoidal timestep embedding of even dimension `dim`.
Vec timestep_embedding(int t, int dim);

}  // namespace edmp::nn
