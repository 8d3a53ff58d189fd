#include "agrimeta/tensornet/kernels.hpp"

#include <algorithm>

#include "agrimeta/error.hpp"

namespace agrimeta::tensornet::kernels {

void conv1d_forward(std::span<const double> in, std::size_t cin, std::size_t len,
                    std::span<const double> w, std::span<const double> b, std::size_t cout,
                    std::size_t k, std::span<double> out) {
  const std::size_t lout = len - k + 1;
  for (std::size_t c = 0; c < cout; ++c) {
    double* __restrict o = out.data() + c * lout;
    std::fill_n(o, lout, b[c]);
    for (std::size_t d = 0; d < cin; ++d) {
      const double* wk = w.data() + (c * cin + d) * k;
      for (std::size_t j = 0; j < k; ++j) {
        const double wv = wk[j];
        const double* __restrict src = in.data() + d * len + j;
#pragma omp simd
        for (std::size_t i = 0; i < lout; ++i) o[i] += wv * src[i];
      }
    }
  }
}

void conv1d_backward(std::span<const double> in, std::size_t cin, std::size_t len,
                     std::span<const double> w, std::size_t cout, std::size_t k,
                     std::span<const double> grad_out, std::span<double> grad_w,
                     std::span<double> grad_b, std::span<double> grad_in) {
  const std::size_t lout = len - k + 1;
  const bool want_input = !grad_in.empty();
  if (want_input) std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (std::size_t c = 0; c < cout; ++c) {
    const double* __restrict go = grad_out.data() + c * lout;
    double bias_sum = 0.0;
#pragma omp simd reduction(+ : bias_sum)
    for (std::size_t i = 0; i < lout; ++i) bias_sum += go[i];
    grad_b[c] += bias_sum;
    for (std::size_t d = 0; d < cin; ++d) {
      const double* __restrict src = in.data() + d * len;
      const double* wk = w.data() + (c * cin + d) * k;
      double* gw = grad_w.data() + (c * cin + d) * k;
      for (std::size_t j = 0; j < k; ++j) {
        double acc = 0.0;
#pragma omp simd reduction(+ : acc)
        for (std::size_t i = 0; i < lout; ++i) acc += go[i] * src[i + j];
        gw[j] += acc;
        if (want_input) {
          const double wv = wk[j];
          double* __restrict gi = grad_in.data() + d * len + j;
#pragma omp simd
          for (std::size_t i = 0; i < lout; ++i) gi[i] += wv * go[i];
        }
      }
    }
  }
}

void avgpool_forward(std::span<const double> in, std::size_t channels, std::size_t len,
                     std::size_t window, std::span<double> out) {
  const std::size_t lout = len / window;
  const double inv = 1.0 / static_cast<double>(window);
  for (std::size_t c = 0; c < channels; ++c) {
    const double* src = in.data() + c * len;
    for (std::size_t o = 0; o < lout; ++o) {
      double sum = 0.0;
      for (std::size_t r = 0; r < window; ++r) sum += src[o * window + r];
      out[c * lout + o] = sum * inv;
    }
  }
}

void avgpool_backward(std::span<const double> grad_out, std::size_t channels, std::size_t len,
                      std::size_t window, std::span<double> grad_in) {
  const std::size_t lout = len / window;
  const double inv = 1.0 / static_cast<double>(window);
  std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t o = 0; o < lout; ++o) {
      const double g = grad_out[c * lout + o] * inv;
      for (std::size_t r = 0; r < window; ++r) grad_in[c * len + o * window + r] = g;
    }
  }
}

void dense_forward(std::span<const double> in, std::size_t n, std::span<const double> w,
                   std::span<const double> b, std::size_t m, std::span<double> out) {
  for (std::size_t r = 0; r < m; ++r) {
    const double* __restrict row = w.data() + r * n;
    const double* __restrict x = in.data();
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t i = 0; i < n; ++i) acc += row[i] * x[i];
    out[r] = b[r] + acc;
  }
}

void dense_backward(std::span<const double> in, std::size_t n, std::span<const double> w,
                    std::size_t m, std::span<const double> grad_out, std::span<double> grad_w,
                    std::span<double> grad_b, std::span<double> grad_in) {
  const bool want_input = !grad_in.empty();
  if (want_input) std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const double g = grad_out[r];
    grad_b[r] += g;
    if (g == 0.0) continue;
    double* __restrict gw = grad_w.data() + r * n;
    const double* __restrict x = in.data();
#pragma omp simd
    for (std::size_t i = 0; i < n; ++i) gw[i] += g * x[i];
    if (want_input) {
      const double* __restrict row = w.data() + r * n;
      double* __restrict gi = grad_in.data();
#pragma omp simd
      for (std::size_t i = 0; i < n; ++i) gi[i] += g * row[i];
    }
  }
}

void relu_forward(std::span<double> x) {
  for (auto& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward(std::span<const double> activation, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activation[i] > 0.0)) grad[i] = 0.0;
  }
}

}  // namespace agrimeta::tensornet::kernels

namespace agrimeta::tensornet {

Tensor conv1d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (input.rank() != 2 || weights.rank() != 3 || bias.rank() != 1) {
    throw ValidationError("conv1d: expected input (Cin,L), weights (Cout,Cin,k), bias (Cout)");
  }
  const std::size_t cin = input.dim(0), len = input.dim(1);
  const std::size_t cout = weights.dim(0), k = weights.dim(2);
  if (weights.dim(1) != cin || bias.dim(0) != cout) throw ValidationError("conv1d: shape mismatch");
  if (k == 0 || len < k) throw ValidationError("conv1d: kernel longer than input");
  Tensor out({cout, len - k + 1});
  kernels::conv1d_forward(input.data(), cin, len, weights.data(), bias.data(), cout, k, out.data());
  return out;
}

Tensor avgpool1d(const Tensor& input, std::size_t window) {
  if (input.rank() != 2) throw ValidationError("avgpool1d: expected input (C,L)");
  if (window == 0 || window > input.dim(1)) throw ValidationError("avgpool1d: window larger than input");
  Tensor out({input.dim(0), input.dim(1) / window});
  kernels::avgpool_forward(input.data(), input.dim(0), input.dim(1), window, out.data());
  return out;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2 || bias.rank() != 1) throw ValidationError("dense: expected weights (m,n), bias (m)");
  const std::size_t m = weights.dim(0), n = weights.dim(1);
  if (input.size() != n || bias.dim(0) != m) throw ValidationError("dense: shape mismatch");
  Tensor out({m});
  kernels::dense_forward(input.data(), n, weights.data(), bias.data(), m, out.data());
  return out;
}

}  // namespace agrimeta::tensornet
