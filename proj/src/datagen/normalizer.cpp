#include "agrimeta/datagen/normalizer.hpp"

#include <algorithm>
#include <cmath>

#include "agrimeta/error.hpp"

namespace agrimeta::datagen {
namespace {


double safe_std(double variance, double mean) {
  const double floor = 1e-12 * std::max(1.0, std::abs(mean));
  return variance > floor * floor ? std::sqrt(variance) : 1.0;
}

}  // namespace

Normalizer fit_normalizer(std::span<const Sample> train) {
  if (train.empty()) throw ValidationError("cannot fit normalizer on an empty training set");
  Normalizer z;
  const double n = static_cast<double>(train.size());

  for (std::size_t c = 0; c < kTemporalChannels; ++c) {
    double sum = 0.0;
    for (const auto& s : train) {
      for (std::size_t t = 0; t < kWindowDays; ++t) sum += s.temporal[c * kWindowDays + t];
    }
    const double mean = sum / (n * kWindowDays);
    double sq = 0.0;
    for (const auto& s : train) {
      for (std::size_t t = 0; t < kWindowDays; ++t) {
        const double d = s.temporal[c * kWindowDays + t] - mean;
        sq += d * d;
      }
    }
    z.temporal_mean[c] = mean;
    z.temporal_std[c] = safe_std(sq / (n * kWindowDays), mean);
  }

  for (std::size_t c = 0; c < kScalarCount; ++c) {
    double sum = 0.0;
    for (const auto& s : train) sum += s.scalars[c];
    const double mean = sum / n;
    double sq = 0.0;
    for (const auto& s : train) sq += (s.scalars[c] - mean) * (s.scalars[c] - mean);
    z.scalar_mean[c] = mean;
    z.scalar_std[c] = safe_std(sq / n, mean);
  }

  for (std::size_t c = 0; c < kSoilChannels; ++c) {
    double sum = 0.0;
    for (const auto& s : train) {
      for (std::size_t l = 0; l < kSoilLayers; ++l) sum += s.soil[c * kSoilLayers + l];
    }
    const double mean = sum / (n * kSoilLayers);
    double sq = 0.0;
    for (const auto& s : train) {
      for (std::size_t l = 0; l < kSoilLayers; ++l) {
        const double d = s.soil[c * kSoilLayers + l] - mean;
        sq += d * d;
      }
    }
    z.soil_mean[c] = mean;
    z.soil_std[c] = safe_std(sq / (n * kSoilLayers), mean);
  }

  double sum = 0.0;
  for (const auto& s : train) sum += s.target;
  z.target_mean = sum / n;
  double sq = 0.0;
  for (const auto& s : train) sq += (s.target - z.target_mean) * (s.target - z.target_mean);
  z.target_std = safe_std(sq / n, z.target_mean);
  return z;
}

void Normalizer::apply_in_place(Sample& s) const {
  for (std::size_t c = 0; c < kTemporalChannels; ++c) {
    for (std::size_t t = 0; t < kWindowDays; ++t) {
      auto& v = s.temporal[c * kWindowDays + t];
      v = (v - temporal_mean[c]) / temporal_std[c];
    }
  }
  for (std::size_t c = 0; c < kScalarCount; ++c) {
    s.scalars[c] = (s.scalars[c] - scalar_mean[c]) / scalar_std[c];
  }
  for (std::size_t c = 0; c < kSoilChannels; ++c) {
    for (std::size_t l = 0; l < kSoilLayers; ++l) {
      auto& v = s.soil[c * kSoilLayers + l];
      v = (v - soil_mean[c]) / soil_std[c];
    }
  }
  s.target = normalize_target(s.target);
}

Sample Normalizer::apply(const Sample& sample) const {
  Sample out = sample;
  apply_in_place(out);
  return out;
}

std::vector<Sample> apply_normalizer(const Normalizer& normalizer, std::span<const Sample> samples) {
  std::vector<Sample> out(samples.begin(), samples.end());
  for (auto& s : out) normalizer.apply_in_place(s);
  return out;
}

}  // namespace agrimeta::datagen
