#include "agrimeta/cropsim/types.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "agrimeta/error.hpp"

namespace agrimeta::cropsim {

const WeatherDay& WeatherSeries::day(int doy) const {
  if (days.empty() || doy < days.front().doy || doy > days.back().doy) {
    throw ValidationError("weather " + location_id + "/" + std::to_string(year) +
                          " does not cover day " + std::to_string(doy));
  }
  return days[static_cast<std::size_t>(doy - days.front().doy)];
}

const SoilHorizon& SoilType::horizon_at(double depth_cm) const {
  for (const auto& h : horizons) {
    if (depth_cm >= h.top_cm && depth_cm < h.bottom_cm) return h;
  }
  if (!horizons.empty() && depth_cm == horizons.back().bottom_cm) return horizons.back();
  throw ValidationError("depth " + std::to_string(depth_cm) + " cm outside profile of soil " +
                        std::to_string(code));
}

double ManagementPlan::total_nitrogen() const {
  return std::accumulate(n_events.begin(), n_events.end(), 0.0,
                         [](double acc, const NitrogenEvent& e) { return acc + e.kg_per_ha; });
}

double ManagementPlan::total_irrigation() const {
  return std::accumulate(irrigation_events.begin(), irrigation_events.end(), 0.0,
                         [](double acc, const IrrigationEvent& e) { return acc + e.mm; });
}

void validate(const WeatherSeries& weather) {
  const auto where = [&](std::size_t i) {
    return "weather " + weather.location_id + "/" + std::to_string(weather.year) + " row " +
           std::to_string(i + 1);
  };
  if (weather.days.size() != 365 && weather.days.size() != 366) {
    throw ValidationError("weather " + weather.location_id + "/" + std::to_string(weather.year) +
                          " incomplete: " + std::to_string(weather.days.size()) +
                          " days (expected 365 or 366)");
  }
  for (std::size_t i = 0; i < weather.days.size(); ++i) {
    const auto& d = weather.days[i];
    if (d.doy != static_cast<int>(i) + 1) {
      throw ValidationError(where(i) + ": doy " + std::to_string(d.doy) + " breaks sequence");
    }
    if (!std::isfinite(d.radiation) || !std::isfinite(d.rain) || !std::isfinite(d.tmax) ||
        !std::isfinite(d.tmin)) {
      throw ValidationError(where(i) + ": non-finite value");
    }
    if (d.tmax < d.tmin) throw ValidationError(where(i) + ": tmax < tmin");
    if (d.radiation < 0.0) throw ValidationError(where(i) + ": negative radiation");
    if (d.rain < 0.0) throw ValidationError(where(i) + ": negative rain");
  }
}

void validate(const SoilType& soil) {
  const std::string name = "soil " + std::to_string(soil.code);
  if (soil.horizons.empty()) throw ValidationError(name + ": no horizons");
  double expected_top = 0.0;
  for (std::size_t i = 0; i < soil.horizons.size(); ++i) {
    const auto& h = soil.horizons[i];
    const std::string where = name + " horizon " + std::to_string(i);
    if (h.top_cm != expected_top) throw ValidationError(where + ": horizons not contiguous");
    if (!(h.bottom_cm > h.top_cm)) throw ValidationError(where + ": bottom above top");
    for (double f : {h.clay_frac, h.loam_frac, h.om_frac}) {
      if (!(f >= 0.0 && f <= 1.0)) throw ValidationError(where + ": fraction outside [0,1]");
    }
    if (!(h.theta_res >= 0.0 && h.theta_res < h.theta_sat && h.theta_sat <= 1.0)) {
      throw ValidationError(where + ": require 0 <= theta_res < theta_sat <= 1");
    }
    if (!(h.vg_n > 1.0)) throw ValidationError(where + ": vg_n must exceed 1");
    if (!(h.vg_alpha > 0.0)) throw ValidationError(where + ": vg_alpha must be positive");
    if (!std::isfinite(h.vg_lambda)) throw ValidationError(where + ": vg_lambda not finite");
    expected_top = h.bottom_cm;
  }
  if (expected_top < 120.0) throw ValidationError(name + ": profile shallower than 120 cm");
}

void validate(const ManagementPlan& plan, int days_in_year) {
  const auto in_year = [&](int doy) { return doy >= 1 && doy <= days_in_year; };
  if (!in_year(plan.sowing_doy)) throw ValidationError("management: sowing_doy outside year");
  for (const auto& e : plan.n_events) {
    if (!in_year(e.doy)) throw ValidationError("management: nitrogen event doy outside year");
    if (!(e.kg_per_ha >= 0.0)) throw ValidationError("management: negative nitrogen amount");
  }
  for (const auto& e : plan.irrigation_events) {
    if (!in_year(e.doy)) throw ValidationError("management: irrigation event doy outside year");
    if (!(e.mm >= 0.0)) throw ValidationError("management: negative irrigation amount");
  }
  if (!(plan.earliness >= 0.0 && plan.earliness <= 1.0)) {
    throw ValidationError("management: earliness outside [0,1]");
  }
  if (!(plan.max_rooting_depth >= 20.0 && plan.max_rooting_depth <= 120.0)) {
    throw ValidationError("management: max_rooting_depth outside [20,120] cm");
  }
}

}  // namespace agrimeta::cropsim
