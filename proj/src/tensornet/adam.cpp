#include "agrimeta/tensornet/adam.hpp"

#include <cmath>

#include "agrimeta/error.hpp"

namespace agrimeta::tensornet {

AdamState AdamState::for_parameters(const Parameters& params, double learning_rate) {
  AdamState s;
  s.m.assign(params.size(), 0.0);
  s.v.assign(params.size(), 0.0);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(Parameters& params, std::span<const double> gradient, AdamState& state) {
  if (gradient.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ValidationError("adam_step: gradient or moment size does not match parameters");
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto values = params.values();
  for (std::size_t layer = 0; layer < params.layer_count(); ++layer) {
    if (params.frozen(layer)) continue;
    const auto& b = params.block(layer);
    const std::size_t ranges[2][2] = {{b.weight_offset, b.weight_size()}, {b.bias_offset, b.bias_size()}};
    for (const auto& r : ranges) {
      for (std::size_t i = r[0]; i < r[0] + r[1]; ++i) {
        const double g = gradient[i];
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
        const double mhat = state.m[i] / c1;
        const double vhat = state.v[i] / c2;
        values[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
      }
    }
  }
}

}  // namespace agrimeta::tensornet
