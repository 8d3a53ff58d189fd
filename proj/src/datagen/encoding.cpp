#include "agrimeta/datagen/sample.hpp"

namespace agrimeta::datagen {

std::vector<double> encode_temporal(const cropsim::WeatherSeries& weather,
                                    const cropsim::ManagementPlan& mgmt) {
  std::vector<double> out(kTemporalChannels * kWindowDays);
  double cum_irrigation = 0.0;
  double cum_n = 0.0;
  // Inputs applied before the window are carried into its first day.
  for (const auto& e : mgmt.irrigation_events) {
    if (e.doy < kWindowStartDoy) cum_irrigation += e.mm;
  }
  for (const auto& e : mgmt.n_events) {
    if (e.doy < kWindowStartDoy) cum_n += e.kg_per_ha;
  }
  for (std::size_t t = 0; t < kWindowDays; ++t) {
    const int doy = kWindowStartDoy + static_cast<int>(t);
    const auto& day = weather.day(doy);
    for (const auto& e : mgmt.irrigation_events) {
      if (e.doy == doy) cum_irrigation += e.mm;
    }
    for (const auto& e : mgmt.n_events) {
      if (e.doy == doy) cum_n += e.kg_per_ha;
    }
    out[0 * kWindowDays + t] = day.radiation;
    out[1 * kWindowDays + t] = day.rain;
    out[2 * kWindowDays + t] = day.tmax;
    out[3 * kWindowDays + t] = day.tmin;
    out[4 * kWindowDays + t] = cum_irrigation;
    out[5 * kWindowDays + t] = cum_n;
  }
  return out;
}

std::vector<double> encode_soil(const cropsim::SoilType& soil) {
  std::vector<double> out(kSoilChannels * kSoilLayers);
  for (std::size_t layer = 0; layer < kSoilLayers; ++layer) {
    const auto& h = soil.horizon_at(static_cast<double>(layer) + 0.5);
    const double values[kSoilChannels] = {h.clay_frac, h.loam_frac, h.om_frac, h.theta_sat,
                                          h.vg_alpha,  h.vg_lambda, h.vg_n};
    for (std::size_t c = 0; c < kSoilChannels; ++c) out[c * kSoilLayers + layer] = values[c];
  }
  return out;
}

std::array<double, kScalarCount> encode_scalars(const cropsim::ManagementPlan& mgmt) {
  return {mgmt.max_rooting_depth, static_cast<double>(mgmt.sowing_doy), mgmt.earliness};
}

Sample encode_sample(const cropsim::WeatherSeries& weather, const cropsim::SoilType& soil,
                     const cropsim::ManagementPlan& mgmt, double target) {
  Sample s;
  s.temporal = encode_temporal(weather, mgmt);
  s.scalars = encode_scalars(mgmt);
  s.soil = encode_soil(soil);
  s.target = target;
  s.meta = {weather.location_id, weather.year, soil.code};
  return s;
}

}  // namespace agrimeta::datagen
