#include "agrimeta/tensornet/spec.hpp"

#include <sstream>

#include "agrimeta/error.hpp"

namespace agrimeta::tensornet {

NetworkSpec metamodel_spec(bool with_soil) {
  NetworkSpec spec;
  spec.temporal = {LayerSpec::conv(20, 3), LayerSpec::pool(5), LayerSpec::conv(7, 2),
                   LayerSpec::pool(5)};
  spec.scalar = {LayerSpec::dense(20), LayerSpec::dense(20)};
  spec.use_soil = with_soil;
  spec.soil = {LayerSpec::conv(5, 5), LayerSpec::pool(24)};
  spec.head = {LayerSpec::dense(25), LayerSpec::dense(5), LayerSpec::dense(1, false)};
  return spec;
}

Shape output_shape(Shape input, const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::Conv1D:
      if (layer.units == 0 || layer.kernel == 0) throw ValidationError("conv needs filters and kernel >= 1");
      if (input.length < layer.kernel) {
        throw ValidationError("conv kernel " + std::to_string(layer.kernel) + " longer than input " +
                              std::to_string(input.length));
      }
      return {layer.units, input.length - layer.kernel + 1};
    case LayerKind::AvgPool:
      if (layer.kernel == 0) throw ValidationError("pool window must be >= 1");
      if (layer.kernel > input.length) {
        throw ValidationError("pool window " + std::to_string(layer.kernel) + " longer than input " +
                              std::to_string(input.length));
      }
      return {input.channels, input.length / layer.kernel};
    case LayerKind::Dense:
      if (layer.units == 0) throw ValidationError("dense needs >= 1 unit");
      return {layer.units, 1};
  }
  throw ValidationError("unknown layer kind");
}

Shape stream_output(Shape input, std::span<const LayerSpec> layers) {
  for (const auto& l : layers) input = output_shape(input, l);
  return input;
}

std::size_t head_input_size(const NetworkSpec& spec) {
  std::size_t n = stream_output(spec.temporal_input, spec.temporal).size() +
                  stream_output(spec.scalar_input, spec.scalar).size();
  if (spec.use_soil) n += stream_output(spec.soil_input, spec.soil).size();
  return n;
}

void validate(const NetworkSpec& spec) {
  const std::size_t head_in = head_input_size(spec);
  if (spec.head.empty()) throw ValidationError("network head must not be empty");
  Shape s{head_in, 1};
  for (const auto& l : spec.head) {
    if (l.kind != LayerKind::Dense) throw ValidationError("head layers must be dense");
    s = output_shape(s, l);
  }
  const auto& last = spec.head.back();
  if (last.units != 1 || last.relu) throw ValidationError("head must end in a linear Dense(1)");
}

std::string describe(const NetworkSpec& spec) {
  std::ostringstream os;
  const auto stream = [&](const char* name, Shape in, const std::vector<LayerSpec>& layers) {
    os << name << " " << in.channels << "x" << in.length;
    for (const auto& l : layers) {
      in = output_shape(in, l);
      switch (l.kind) {
        case LayerKind::Conv1D: os << " -> conv(" << l.units << ",k" << l.kernel << ")"; break;
        case LayerKind::AvgPool: os << " -> pool(" << l.kernel << ")"; break;
        case LayerKind::Dense: os << " -> dense(" << l.units << (l.relu ? "" : ",linear") << ")"; break;
      }
      os << "[" << in.channels << "x" << in.length << "]";
    }
    os << "\n";
  };
  stream("temporal", spec.temporal_input, spec.temporal);
  stream("scalar", spec.scalar_input, spec.scalar);
  if (spec.use_soil) stream("soil", spec.soil_input, spec.soil);
  stream("head", Shape{head_input_size(spec), 1}, spec.head);
  return os.str();
}

}  // namespace agrimeta::tensornet
