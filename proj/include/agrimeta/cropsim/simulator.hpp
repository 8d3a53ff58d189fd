#pragma once

#include <array>

#include "agrimeta/cropsim/types.hpp"

namespace agrimeta::cropsim {

// Surrogate potato model: radiation-use-efficiency growth limited by the
// smaller of a water and a nitrogen stress factor, degree-day development,
// single root-zone bucket fed by van Genuchten limits.
struct CropParameters {
  double base_temperature = 2.0;       // degC
  double maturity_base = 1400.0;       // degC d, earliest cultivar
  double maturity_earliness_span = 600.0;
  double emergence_tt = 150.0;         // degC d after sowing
  double rue = 1.25;                   // g dry matter / MJ global radiation
  double extinction = 1.0;
  double initial_lai = 0.02;
  double juvenile_lai_rgr = 0.012;     // 1/(degC d)
  double juvenile_lai_limit = 0.75;
  double specific_leaf_area = 0.003;   // LAI per kg/ha leaf dry matter
  double tuber_initiation_fraction = 0.22;  // of maturity thermal time
  double tuber_partition_max = 0.80;
  double senescence_onset = 0.70;      // fraction of maturity thermal time
  double senescence_rate_max = 0.04;   // 1/day at maturity
  double drought_senescence = 0.02;    // 1/day at full water stress
  double initial_root_depth = 10.0;    // cm
  double root_growth_rate = 1.2;       // cm/day
  double crop_factor = 1.1;
  double depletion_fraction = 0.35;    // share of bucket usable without stress
  double mineralization_rate = 2.0;    // kg N/ha per %OM per 30 days
  double mineralization_q10 = 2.0;
  double mineralization_reference_temp = 20.0;  // degC at which the nominal rate applies
  double initial_mineral_n = 20.0;     // kg N/ha at sowing
  double max_n_uptake = 8.0;           // kg N/ha/day
  double dry_matter_fraction = 0.22;
  int harvest_deadline_doy = 300;
};

// Per-centimetre cumulative bucket limits of one soil, 0..120 cm.
class SoilProfile {
 public:
  static constexpr int kDepth = 120;

  explicit SoilProfile(const SoilType& soil);

  // Water (mm) held between the surface and depth_cm at field capacity / wilting point.
  double field_capacity_mm(double depth_cm) const { return interpolate(cum_fc_, depth_cm); }
  double wilting_point_mm(double depth_cm) const { return interpolate(cum_wp_, depth_cm); }
  double topsoil_om_percent() const { return topsoil_om_percent_; }

 private:
  static double interpolate(const std::array<double, kDepth + 1>& cum, double depth_cm);

  std::array<double, kDepth + 1> cum_fc_{};
  std::array<double, kDepth + 1> cum_wp_{};
  double topsoil_om_percent_ = 0.0;
};

struct CropState {
  int doy = 0;
  double thermal_time = 0.0;
  bool emerged = false;
  bool mature = false;
  double lai = 0.0;
  double root_depth = 0.0;
  double root_water = 0.0;      // mm in rooted zone
  double subsoil_water = 0.0;   // mm between root front and max rooting depth
  double n_available = 0.0;     // kg N/ha mineral pool
  double n_uptake = 0.0;        // kg N/ha in crop
  double leaf_dm = 0.0;         // kg/ha
  double stem_dm = 0.0;
  double tuber_dm = 0.0;
  // Fluxes of the last step (mm).
  double rain = 0.0;
  double irrigation = 0.0;
  double transpiration = 0.0;
  double evaporation = 0.0;
  double drainage = 0.0;

  double total_dm() const { return leaf_dm + stem_dm + tuber_dm; }
  double storage() const { return root_water + subsoil_water; }
};

double maturity_thermal_time(const CropParameters& p, double earliness);

// Makkink reference evapotranspiration (mm/day).
double reference_evapotranspiration(double radiation, double mean_temperature);

// State on the sowing day, before that day's step: bucket at field capacity.
CropState initial_state(const SoilProfile& profile, const ManagementPlan& mgmt,
                        const CropParameters& p = {});

// Advance one day. Water balance per step:
// d(storage) = rain + irrigation - transpiration - evaporation - drainage.
CropState simulate_daily_step(const CropState& state, const WeatherDay& day,
                              const SoilProfile& profile, const ManagementPlan& mgmt,
                              const CropParameters& p = {});

struct SimulationOptions {
  bool trace = false;
  CropParameters params{};
};

SimulationResult run_simulation(const WeatherSeries& weather, const SoilType& soil,
                                const ManagementPlan& mgmt,
                                const SimulationOptions& options = {});

// Variant reusing a prebuilt profile; skips input validation.
SimulationResult run_simulation(const WeatherSeries& weather, const SoilProfile& profile,
                                const ManagementPlan& mgmt,
                                const SimulationOptions& options);

}  // namespace agrimeta::cropsim
