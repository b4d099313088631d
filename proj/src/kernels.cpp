#include "edmp/kernels.hpp"

#include "edmp/denoiser.hpp"

#include <omp.h>

#include <exception>
#include <stdexcept>

namespace edmp::kernels {

int thread_count() { return omp_get_max_threads(); }

void set_thread_count(int n) {
  if (n < 1) throw std::invalid_argument("thread count must be >= 1");
  omp_set_num_threads(n);
}

void for_each_index(int n, Exec exec, const std::function<void(int)>& fn) {
  if (exec == Exec::serial) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void predict_batch(const nn::Denoiser& net, std::span<const Trajectory> x, std::span<const int> t,
                   std::span<Trajectory> out, Exec exec) {
  if (x.size() != t.size() || x.size() != out.size())
    throw std::invalid_argument("predict_batch: size mismatch");
  for_each_index(static_cast<int>(x.size()), exec, [&](int i) { out[i] = net.predict(x[i], t[i]); });
}

BatchGradient loss_gradient_batch(const nn::Denoiser& net, std::span<const TrainSample> batch,
                                  bool exclude_endpoints, Exec exec) {
  const int n = static_cast<int>(batch.size());
  if (n == 0) throw std::invalid_argument("loss_gradient_batch: empty batch");
  const int chunks = (n + kGradientChunk - 1) / kGradientChunk;
  const std::size_t p = net.parameter_count();
  std::vector<std::vector<double>> grads(chunks);
  std::vector<double> losses(chunks, 0.0);
  for_each_index(chunks, exec, [&](int c) {
    grads[c].assign(p, 0.0);
    const int end = std::min(n, (c + 1) * kGradientChunk);
    for (int i = c * kGradientChunk; i < end; ++i)
      losses[c] += net.loss_and_gradient(batch[i].x_t, batch[i].t, batch[i].eps, exclude_endpoints, grads[c]);
  });
  BatchGradient out;
  out.gradient.assign(p, 0.0);
  for (int c = 0; c < chunks; ++c) {
    out.loss += losses[c];
    for (std::size_t k = 0; k < p; ++k) out.gradient[k] += grads[c][k];
  }
  const double inv = 1.0 / n;
  out.loss *= inv;
  for (double& g : out.gradient) g *= inv;
  return out;
}

}  // namespace edmp::kernels
