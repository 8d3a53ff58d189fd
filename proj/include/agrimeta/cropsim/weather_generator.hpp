#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agrimeta/cropsim/types.hpp"

namespace agrimeta::cropsim {

// Climate of one synthetic station. Seasonal sinusoids for temperature and
// clear-sky radiation; rainfall from a two-state Markov occurrence chain with
// exponential amounts.
struct ClimateProfile {
  std::string location_id;
  double mean_temperature = 10.0;   // annual mean, degC
  double temperature_amplitude = 7.5;
  double wet_day_amount = 5.0;      // mean mm on a wet day
  double dry_to_wet = 0.32;         // P(wet | previous dry)
  double wet_to_wet = 0.60;         // P(wet | previous wet)
  double radiation_scale = 1.0;
};

// The seven shipped stations.
const std::vector<ClimateProfile>& shipped_climates();

bool is_leap_year(int year);

// Deterministic in (profile, year, seed).
WeatherSeries generate_weather(const ClimateProfile& climate, int year, std::uint64_t seed);

}  // namespace agrimeta::cropsim
