#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "agrimeta/cropsim/types.hpp"

namespace agrimeta::datagen {

inline constexpr std::size_t kTemporalChannels = 6;  // radiation, rain, tmax, tmin, cum. irrigation, cum. N
inline constexpr std::size_t kWindowDays = 210;
inline constexpr int kWindowStartDoy = 91;
inline constexpr std::size_t kScalarCount = 3;       // max rooting depth, sowing doy, earliness
inline constexpr std::size_t kSoilChannels = 7;      // clay, loam, om, theta_sat, alpha, lambda, n
inline constexpr std::size_t kSoilLayers = 120;      // 1 cm layers

struct SampleMeta {
  std::string location_id;
  int year = 0;
  int soil_code = 0;
};

// Network-ready encoding of one simulation; matrices are row-major
// [channel][time/depth].
struct Sample {
  std::vector<double> temporal;  // kTemporalChannels * kWindowDays
  std::array<double, kScalarCount> scalars{};
  std::vector<double> soil;      // kSoilChannels * kSoilLayers
  double target = 0.0;           // fresh tonne/ha
  SampleMeta meta;

  double temporal_at(std::size_t channel, std::size_t day) const {
    return temporal[channel * kWindowDays + day];
  }
};

std::vector<double> encode_temporal(const cropsim::WeatherSeries& weather,
                                    const cropsim::ManagementPlan& mgmt);
std::vector<double> encode_soil(const cropsim::SoilType& soil);
std::array<double, kScalarCount> encode_scalars(const cropsim::ManagementPlan& mgmt);

Sample encode_sample(const cropsim::WeatherSeries& weather, const cropsim::SoilType& soil,
                     const cropsim::ManagementPlan& mgmt, double target);

}  // namespace agrimeta::datagen
