#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "agrimeta/cropsim/simulator.hpp"
#include "agrimeta/cropsim/soil_library.hpp"
#include "agrimeta/cropsim/types.hpp"
#include "agrimeta/cropsim/weather_generator.hpp"
#include "agrimeta/datagen/sample.hpp"
#include "agrimeta/datagen/scenario.hpp"

namespace agrimeta::testing {

inline cropsim::SoilHorizon horizon(double top, double bottom, double theta_res, double theta_sat,
                                    double alpha, double n, double om = 0.02) {
  cropsim::SoilHorizon h;
  h.top_cm = top;
  h.bottom_cm = bottom;
  h.clay_frac = 0.05;
  h.loam_frac = 0.10;
  h.om_frac = om;
  h.theta_res = theta_res;
  h.theta_sat = theta_sat;
  h.vg_alpha = alpha;
  h.vg_n = n;
  h.vg_lambda = 0.5;
  return h;
}

// One horizon down to 120 cm.
inline cropsim::SoilType uniform_soil(int code, double theta_res, double theta_sat, double alpha,
                                      double n, double om = 0.02) {
  cropsim::SoilType s;
  s.code = code;
  s.name = "uniform " + std::to_string(code);
  s.horizons = {horizon(0.0, 120.0, theta_res, theta_sat, alpha, n, om)};
  return s;
}

inline cropsim::WeatherSeries station_weather(int year = 2000, std::uint64_t seed = 42, std::size_t station = 0) {
  return cropsim::generate_weather(cropsim::shipped_climates().at(station), year, seed);
}

// Same days, every field replaced by a constant.
inline cropsim::WeatherSeries constant_weather(double radiation, double rain, double tmax, double tmin,
                                               int year = 2001) {
  cropsim::WeatherSeries w;
  w.location_id = "C";
  w.year = year;
  for (int d = 1; d <= 365; ++d) w.days.push_back({d, radiation, rain, tmax, tmin});
  return w;
}

inline cropsim::ManagementPlan plan(double n_total, double irrigation_total = 0.0, int sowing = 110,
                                    double earliness = 0.5, double rooting = 45.0) {
  cropsim::ManagementPlan p;
  p.sowing_doy = sowing;
  p.earliness = earliness;
  p.max_rooting_depth = rooting;
  if (n_total > 0) p.n_events = {{sowing - 2, 0.7 * n_total}, {sowing + 40, 0.3 * n_total}};
  if (irrigation_total > 0) {
    for (int k = 0; k < 5; ++k) p.irrigation_events.push_back({160 + 15 * k, irrigation_total / 5.0});
  }
  return p;
}

inline const cropsim::SoilType& shipped_soil(int code) {
  for (const auto& s : cropsim::shipped_soil_library()) {
    if (s.code == code) return s;
  }
  throw std::out_of_range("no soil " + std::to_string(code));
}

// Sample with random content and the given metadata; cheap stand-in for simulation output.
inline datagen::Sample random_sample(std::mt19937_64& rng, const std::string& loc = "L1", int year = 2000,
                                     int soil = 301) {
  std::normal_distribution<double> g;
  datagen::Sample s;
  s.temporal.resize(datagen::kTemporalChannels * datagen::kWindowDays);
  s.soil.resize(datagen::kSoilChannels * datagen::kSoilLayers);
  for (auto& v : s.temporal) v = g(rng);
  for (auto& v : s.soil) v = g(rng);
  for (auto& v : s.scalars) v = g(rng);
  s.target = 40.0 + 5.0 * g(rng);
  s.meta = {loc, year, soil};
  return s;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace agrimeta::testing
