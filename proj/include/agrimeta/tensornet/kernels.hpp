#pragma once

#include <cstddef>
#include <span>

#include "agrimeta/tensornet/tensor.hpp"

// Production layer kernels on raw row-major buffers. Backward kernels
// accumulate (+=) into weight/bias gradients; an empty grad_in span skips the
// input gradient.
namespace agrimeta::tensornet::kernels {

void conv1d_forward(std::span<const double> in, std::size_t cin, std::size_t len,
                    std::span<const double> w, std::span<const double> b, std::size_t cout,
                    std::size_t k, std::span<double> out);
void conv1d_backward(std::span<const double> in, std::size_t cin, std::size_t len,
                     std::span<const double> w, std::size_t cout, std::size_t k,
                     std::span<const double> grad_out, std::span<double> grad_w,
                     std::span<double> grad_b, std::span<double> grad_in);

void avgpool_forward(std::span<const double> in, std::size_t channels, std::size_t len,
                     std::size_t window, std::span<double> out);
// Overwrites grad_in; positions in the truncated remainder get 0.
void avgpool_backward(std::span<const double> grad_out, std::size_t channels, std::size_t len,
                      std::size_t window, std::span<double> grad_in);

void dense_forward(std::span<const double> in, std::size_t n, std::span<const double> w,
                   std::span<const double> b, std::size_t m, std::span<double> out);
void dense_backward(std::span<const double> in, std::size_t n, std::span<const double> w,
                    std::size_t m, std::span<const double> grad_out, std::span<double> grad_w,
                    std::span<double> grad_b, std::span<double> grad_in);

void relu_forward(std::span<double> x);
// grad *= (activation > 0); the subgradient at 0 is 0.
void relu_backward(std::span<const double> activation, std::span<double> grad);

}  // namespace agrimeta::tensornet::kernels

namespace agrimeta::tensornet {

// Checked tensor-level operations.
// input (Cin, L), weights (Cout, Cin, k), bias (Cout) -> (Cout, L-k+1); valid, stride 1.
Tensor conv1d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);
// Non-overlapping windows; the remainder L mod window is dropped.
Tensor avgpool1d(const Tensor& input, std::size_t window);
// input (n), weights (m, n), bias (m) -> (m).
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias);

}  // namespace agrimeta::tensornet
