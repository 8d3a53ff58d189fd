#include "agrimeta/tensornet/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "agrimeta/error.hpp"
#include "agrimeta/rng.hpp"

namespace agrimeta::tensornet {

Parameters::Parameters(const NetworkSpec& spec) {
  validate(spec);
  std::size_t offset = 0;
  const auto add_stream = [&](const std::string& prefix, Shape shape, std::span<const LayerSpec> layers) {
    std::size_t index = 0;
    for (const auto& l : layers) {
      if (l.has_parameters()) {
        ParamBlock b;
        b.kind = l.kind;
        b.out = l.units;
        if (l.kind == LayerKind::Conv1D) {
          b.name = prefix + ".conv" + std::to_string(index);
          b.in = shape.channels;
          b.kernel = l.kernel;
        } else {
          b.name = prefix + ".dense" + std::to_string(index);
          b.in = shape.size();
          b.kernel = 1;
        }
        b.weight_offset = offset;
        offset += b.weight_size();
        b.bias_offset = offset;
        offset += b.bias_size();
        blocks_.push_back(b);
      }
      shape = output_shape(shape, l);
      ++index;
    }
  };
  add_stream("temporal", spec.temporal_input, spec.temporal);
  add_stream("scalar", spec.scalar_input, spec.scalar);
  if (spec.use_soil) add_stream("soil", spec.soil_input, spec.soil);
  add_stream("head", Shape{head_input_size(spec), 1}, spec.head);
  values_.assign(offset, 0.0);
  frozen_.assign(blocks_.size(), 0);
}

std::span<double> Parameters::weight(std::size_t layer) {
  const auto& b = blocks_.at(layer);
  return std::span<double>(values_).subspan(b.weight_offset, b.weight_size());
}
std::span<const double> Parameters::weight(std::size_t layer) const {
  const auto& b = blocks_.at(layer);
  return std::span<const double>(values_).subspan(b.weight_offset, b.weight_size());
}
std::span<double> Parameters::bias(std::size_t layer) {
  const auto& b = blocks_.at(layer);
  return std::span<double>(values_).subspan(b.bias_offset, b.bias_size());
}
std::span<const double> Parameters::bias(std::size_t layer) const {
  const auto& b = blocks_.at(layer);
  return std::span<const double>(values_).subspan(b.bias_offset, b.bias_size());
}

void Parameters::freeze_all_but_last(std::size_t trainable) {
  const std::size_t n = blocks_.size();
  for (std::size_t i = 0; i < n; ++i) frozen_[i] = i + trainable < n ? 1 : 0;
}

void Parameters::unfreeze_all() { std::fill(frozen_.begin(), frozen_.end(), 0); }

std::vector<bool> Parameters::freeze_mask() const {
  return std::vector<bool>(frozen_.begin(), frozen_.end());
}

bool Parameters::same_layout(const Parameters& other) const {
  if (blocks_.size() != other.blocks_.size() || values_.size() != other.values_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& a = blocks_[i];
    const auto& b = other.blocks_[i];
    if (a.kind != b.kind || a.out != b.out || a.in != b.in || a.kernel != b.kernel ||
        a.weight_offset != b.weight_offset) {
      return false;
    }
  }
  return true;
}

bool Parameters::operator==(const Parameters& other) const {
  return same_layout(other) && frozen_ == other.frozen_ && values_ == other.values_;
}

Parameters init_parameters(const NetworkSpec& spec, std::uint64_t seed) {
  Parameters params(spec);
  for (std::size_t i = 0; i < params.layer_count(); ++i) {
    const auto& b = params.block(i);
    const double limit = std::sqrt(6.0 / static_cast<double>(b.fan_in() + b.fan_out()));
    std::mt19937_64 rng(derive_seed(seed, {static_cast<std::int64_t>(i)}));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& w : params.weight(i)) w = dist(rng);
  }
  return params;
}

void mask_frozen(const Parameters& params, std::span<double> gradient) {
  if (gradient.size() != params.size()) throw ValidationError("gradient size mismatch");
  for (std::size_t i = 0; i < params.layer_count(); ++i) {
    if (!params.frozen(i)) continue;
    const auto& b = params.block(i);
    std::fill_n(gradient.begin() + static_cast<std::ptrdiff_t>(b.weight_offset),
                b.weight_size() + b.bias_size(), 0.0);
  }
}

}  // namespace agrimeta::tensornet
