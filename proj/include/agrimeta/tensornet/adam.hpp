#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "agrimeta/tensornet/parameters.hpp"

namespace agrimeta::tensornet {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_parameters(const Parameters& params, double learning_rate = 0.001);
};

// Bias-corrected ADAM update. Frozen layers are skipped entirely: neither
// their values nor their moments change.
void adam_step(Parameters& params, std::span<const double> gradient, AdamState& state);

}  // namespace agrimeta::tensornet
