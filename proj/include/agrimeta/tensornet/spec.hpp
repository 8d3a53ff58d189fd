#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace agrimeta::tensornet {

enum class LayerKind : std::uint8_t { Conv1D = 1, AvgPool = 2, Dense = 3 };

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  std::size_t units = 1;   // output channels (Conv1D) or output features (Dense)
  std::size_t kernel = 1;  // kernel size (Conv1D) or window (AvgPool)
  bool relu = true;

  static LayerSpec conv(std::size_t filters, std::size_t kernel_size, bool relu = true) {
    return {LayerKind::Conv1D, filters, kernel_size, relu};
  }
  static LayerSpec pool(std::size_t window) { return {LayerKind::AvgPool, 0, window, false}; }
  static LayerSpec dense(std::size_t units, bool relu = true) { return {LayerKind::Dense, units, 1, relu}; }

  bool has_parameters() const { return kind != LayerKind::AvgPool; }
  bool operator==(const LayerSpec&) const = default;
};

struct Shape {
  std::size_t channels = 1;
  std::size_t length = 1;
  std::size_t size() const { return channels * length; }
  bool operator==(const Shape&) const = default;
};

// Three input streams flattened, concatenated and fed to a dense head.
struct NetworkSpec {
  Shape temporal_input{6, 210};
  std::vector<LayerSpec> temporal;
  Shape scalar_input{3, 1};
  std::vector<LayerSpec> scalar;
  bool use_soil = true;
  Shape soil_input{7, 120};
  std::vector<LayerSpec> soil;
  std::vector<LayerSpec> head;

  bool operator==(const NetworkSpec&) const = default;
};

// Temporal [Conv(20,3) Pool(5) Conv(7,2) Pool(5)], scalar [Dense(20) Dense(20)],
// optional soil [Conv(5,5) Pool(24)], head [Dense(25) Dense(5) Dense(1, linear)].
NetworkSpec metamodel_spec(bool with_soil = true);

// Conv1D and AvgPool need a sequence; Dense flattens its input to (units, 1).
Shape output_shape(Shape input, const LayerSpec& layer);
Shape stream_output(Shape input, std::span<const LayerSpec> layers);
std::size_t head_input_size(const NetworkSpec& spec);

// Throws ValidationError on ill-formed shapes or a head not ending in linear Dense(1).
void validate(const NetworkSpec& spec);

std::string describe(const NetworkSpec& spec);

}  // namespace agrimeta::tensornet
