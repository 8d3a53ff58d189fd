#pragma once

#include <optional>
#include <string>
#include <vector>

namespace agrimeta::cropsim {

struct WeatherDay {
  int doy = 1;
  double radiation = 0.0;  // MJ/m2/day
  double rain = 0.0;       // mm/day
  double tmax = 0.0;       // degC
  double tmin = 0.0;       // degC
};

struct WeatherSeries {
  std::string location_id;
  int year = 0;
  std::vector<WeatherDay> days;

  // Day record for a given day of year; throws if not covered.
  const WeatherDay& day(int doy) const;
  int last_doy() const { return days.empty() ? 0 : days.back().doy; }
};

struct SoilHorizon {
  double top_cm = 0.0;
  double bottom_cm = 0.0;
  double clay_frac = 0.0;
  double loam_frac = 0.0;
  double om_frac = 0.0;
  double theta_sat = 0.0;
  double vg_alpha = 0.0;  // 1/cm
  double vg_lambda = 0.0;
  double vg_n = 0.0;
  double theta_res = 0.0;
};

struct SoilType {
  int code = 0;  // 1xx clay, 2xx peat, 3xx sand
  std::string name;
  std::vector<SoilHorizon> horizons;

  const SoilHorizon& horizon_at(double depth_cm) const;
  double profile_depth() const { return horizons.empty() ? 0.0 : horizons.back().bottom_cm; }
};

struct NitrogenEvent {
  int doy = 0;
  double kg_per_ha = 0.0;
};

struct IrrigationEvent {
  int doy = 0;
  double mm = 0.0;
};

struct ManagementPlan {
  int sowing_doy = 110;
  std::vector<NitrogenEvent> n_events;
  std::vector<IrrigationEvent> irrigation_events;
  double earliness = 0.5;          // 0 = latest cultivar, 1 = earliest
  double max_rooting_depth = 50.0;  // cm

  double total_nitrogen() const;
  double total_irrigation() const;
};

struct DailyRecord {
  int doy = 0;
  double thermal_time = 0.0;      // degC d since sowing
  double lai = 0.0;
  double soil_water_mm = 0.0;     // rooted + unrooted storage
  double tuber_dry_kg_ha = 0.0;
  double n_available_kg_ha = 0.0;
  // Fluxes of the day, kept so the water balance can be audited.
  double rain = 0.0;
  double irrigation = 0.0;
  double transpiration = 0.0;
  double evaporation = 0.0;
  double drainage = 0.0;
};

struct SimulationResult {
  double fresh_yield = 0.0;  // fresh tonne/ha
  int harvest_doy = 0;
  bool reached_maturity = false;
  std::optional<std::vector<DailyRecord>> daily_trace;
};

// Input checks; each throws ValidationError naming the offending field/row.
void validate(const WeatherSeries& weather);
void validate(const SoilType& soil);
void validate(const ManagementPlan& plan, int days_in_year = 366);

}  // namespace agrimeta::cropsim
