#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agrimeta/tensornet/spec.hpp"

namespace agrimeta::tensornet {

// Location of one parameterized layer inside the flat value vector.
// Conv weights are (out, in, kernel); dense weights are (out, in, 1).
struct ParamBlock {
  std::string name;
  LayerKind kind = LayerKind::Dense;
  std::size_t out = 0;
  std::size_t in = 0;
  std::size_t kernel = 1;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;

  std::size_t weight_size() const { return out * in * kernel; }
  std::size_t bias_size() const { return out; }
  std::size_t fan_in() const { return in * kernel; }
  std::size_t fan_out() const { return out * kernel; }
};

// Layer blocks in order temporal, scalar, soil, head. The same layout indexes
// gradient and optimizer-moment vectors.
class Parameters {
 public:
  Parameters() = default;
  explicit Parameters(const NetworkSpec& spec);

  std::size_t layer_count() const { return blocks_.size(); }
  const ParamBlock& block(std::size_t layer) const { return blocks_.at(layer); }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> weight(std::size_t layer);
  std::span<const double> weight(std::size_t layer) const;
  std::span<double> bias(std::size_t layer);
  std::span<const double> bias(std::size_t layer) const;

  bool frozen(std::size_t layer) const { return frozen_.at(layer) != 0; }
  void set_frozen(std::size_t layer, bool frozen) { frozen_.at(layer) = frozen ? 1 : 0; }
  // Freeze every layer except the last `trainable` parameterized layers.
  void freeze_all_but_last(std::size_t trainable);
  void unfreeze_all();
  std::vector<bool> freeze_mask() const;

  bool same_layout(const Parameters& other) const;
  bool operator==(const Parameters& other) const;

 private:
  std::vector<ParamBlock> blocks_;
  std::vector<double> values_;
  std::vector<std::uint8_t> frozen_;
};

// Glorot-uniform weights, zero biases.
Parameters init_parameters(const NetworkSpec& spec, std::uint64_t seed);

// Zero the gradient entries of frozen layers.
void mask_frozen(const Parameters& params, std::span<double> gradient);

}  // namespace agrimeta::tensornet
