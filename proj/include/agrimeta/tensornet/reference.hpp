#pragma once

#include <span>

#include "agrimeta/tensornet/network.hpp"
#include "agrimeta/tensornet/parameters.hpp"
#include "agrimeta/tensornet/spec.hpp"
#include "agrimeta/tensornet/tensor.hpp"

// Serial textbook implementation of the same network, written directly from
// the layer formulas. Slow; kept as a cross-check for the production kernels
// and the parallel batch path.
namespace agrimeta::tensornet::reference {

Tensor conv1d(const Tensor& input, const Tensor& weights, const Tensor& bias);
Tensor avgpool(const Tensor& input, std::size_t window);
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

double forward(const NetworkSpec& spec, const Parameters& params, const NetInput& input);
LossAndGradient backward(const NetworkSpec& spec, const Parameters& params,
                         std::span<const NetInput> inputs, std::span<const double> targets);

}  // namespace agrimeta::tensornet::reference
