#include "agrimeta/tensornet/tensor.hpp"

#include <functional>
#include <numeric>

#include "agrimeta/error.hpp"

namespace agrimeta::tensornet {
namespace {

std::size_t volume(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(volume(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != volume(shape_)) throw ValidationError("tensor data does not match shape");
}

}  // namespace agrimeta::tensornet
