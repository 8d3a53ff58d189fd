#include "agrimeta/cropsim/weather_generator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "agrimeta/rng.hpp"

namespace agrimeta::cropsim {
namespace {

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) h = (h ^ c) * 0x100000001b3ull;
  return h;
}

}  // namespace

const std::vector<ClimateProfile>& shipped_climates() {
  static const std::vector<ClimateProfile> climates = {
      {"L1", 10.2, 7.0, 5.2, 0.34, 0.60, 0.97},  // coastal north
      {"L2", 10.6, 7.3, 4.8, 0.32, 0.60, 1.00},  // coastal west
      {"L3", 10.1, 7.8, 4.6, 0.30, 0.58, 1.02},  // central
      {"L4", 9.7, 8.1, 4.9, 0.31, 0.59, 1.00},   // north-east
      {"L5", 10.4, 8.3, 4.4, 0.28, 0.57, 1.05},  // south-east, drier
      {"L6", 10.8, 7.9, 5.0, 0.30, 0.61, 1.03},  // south
      {"L7", 9.9, 7.6, 5.4, 0.33, 0.62, 0.98},   // wet east
  };
  return climates;
}

bool is_leap_year(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

WeatherSeries generate_weather(const ClimateProfile& climate, int year, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {static_cast<std::int64_t>(fnv1a(climate.location_id)), year}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Year-level anomalies make some seasons warm/dry and others cool/wet.
  const double year_temperature = 0.7 * normal(rng);
  const double year_rain = std::exp(0.30 * normal(rng));
  const double year_radiation = 1.0 + 0.05 * normal(rng) - 0.08 * (year_rain - 1.0);

  const int n_days = is_leap_year(year) ? 366 : 365;
  WeatherSeries series;
  series.location_id = climate.location_id;
  series.year = year;
  series.days.reserve(static_cast<std::size_t>(n_days));

  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double dry_to_wet = std::clamp(climate.dry_to_wet * std::sqrt(year_rain), 0.02, 0.95);
  const double wet_amount = climate.wet_day_amount * std::sqrt(year_rain);
  std::exponential_distribution<double> amount(1.0 / wet_amount);

  double anomaly = 0.0;
  bool wet = false;
  for (int doy = 1; doy <= n_days; ++doy) {
    const double p_wet = wet ? climate.wet_to_wet : dry_to_wet;
    wet = unit(rng) < p_wet;
    anomaly = 0.7 * anomaly + 2.0 * normal(rng);

    const double seasonal = climate.mean_temperature + year_temperature +
                            climate.temperature_amplitude * std::sin(kTwoPi * (doy - 105) / 365.0);
    const double t_mean = seasonal + anomaly - (wet ? 0.8 : 0.0);
    const double range = std::max(1.0, (wet ? 5.0 : 9.0) + 1.5 * normal(rng));

    const double clear_sky = 4.0 + 26.0 * (0.5 + 0.5 * std::sin(kTwoPi * (doy - 80) / 365.0));
    const double transmissivity = wet ? 0.25 + 0.30 * unit(rng) : 0.55 + 0.30 * unit(rng);

    WeatherDay day;
    day.doy = doy;
    day.radiation = std::max(0.0, clear_sky * transmissivity * climate.radiation_scale * year_radiation);
    day.rain = wet ? amount(rng) : 0.0;
    day.tmax = t_mean + 0.5 * range;
    day.tmin = t_mean - 0.5 * range;
    series.days.push_back(day);
  }
  return series;
}

}  // namespace agrimeta::cropsim
