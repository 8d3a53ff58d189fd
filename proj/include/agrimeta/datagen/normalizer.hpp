#pragma once

#include <array>
#include <span>
#include <vector>

#include "agrimeta/datagen/sample.hpp"

namespace agrimeta::datagen {

// Per-channel z-scoring; zero-variance features get std = 1.
struct Normalizer {
  std::array<double, kTemporalChannels> temporal_mean{}, temporal_std{};
  std::array<double, kScalarCount> scalar_mean{}, scalar_std{};
  std::array<double, kSoilChannels> soil_mean{}, soil_std{};
  double target_mean = 0.0;
  double target_std = 1.0;

  Sample apply(const Sample& sample) const;
  void apply_in_place(Sample& sample) const;
  double normalize_target(double y) const { return (y - target_mean) / target_std; }
  double invert_target(double z) const { return z * target_std + target_mean; }

  bool operator==(const Normalizer&) const = default;
};

Normalizer fit_normalizer(std::span<const Sample> train_samples);
std::vector<Sample> apply_normalizer(const Normalizer& normalizer, std::span<const Sample> samples);

}  // namespace agrimeta::datagen
