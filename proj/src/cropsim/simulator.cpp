#include "agrimeta/cropsim/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "agrimeta/cropsim/hydraulics.hpp"
#include "agrimeta/error.hpp"

namespace agrimeta::cropsim {
namespace {

// Relative growth response to daily mean temperature.
double temperature_factor(double t) {
  if (t <= 4.0) return 0.0;
  if (t < 14.0) return (t - 4.0) / 10.0;
  if (t <= 22.0) return 1.0;
  if (t < 32.0) return 1.0 - 0.7 * (t - 22.0) / 10.0;
  return 0.3;
}

// Critical nitrogen fraction of total dry matter (kg N / kg DM).
double critical_n_fraction(double total_dm_kg_ha) {
  const double w = total_dm_kg_ha / 1000.0;
  return w < 1.0 ? 0.0537 : 0.0537 * std::pow(w, -0.45);
}

double events_on(const std::vector<IrrigationEvent>& events, int doy) {
  double sum = 0.0;
  for (const auto& e : events) {
    if (e.doy == doy) sum += e.mm;
  }
  return sum;
}

double events_on(const std::vector<NitrogenEvent>& events, int doy) {
  double sum = 0.0;
  for (const auto& e : events) {
    if (e.doy == doy) sum += e.kg_per_ha;
  }
  return sum;
}

}  // namespace

SoilProfile::SoilProfile(const SoilType& soil) {
  // Fine-earth limits integrated over one-centimetre layers; 1 cm of water
  // content 1 m3/m3 holds 10 mm.
  for (int cm = 0; cm < kDepth; ++cm) {
    const auto limits = derive_hydraulic_limits(soil, cm + 0.5);
    cum_fc_[cm + 1] = cum_fc_[cm] + 10.0 * limits.field_capacity;
    cum_wp_[cm + 1] = cum_wp_[cm] + 10.0 * limits.wilting_point;
  }
  topsoil_om_percent_ = 100.0 * soil.horizons.front().om_frac;
}

double SoilProfile::interpolate(const std::array<double, kDepth + 1>& cum, double depth_cm) {
  const double d = std::clamp(depth_cm, 0.0, static_cast<double>(kDepth));
  const auto lower = static_cast<int>(std::floor(d));
  if (lower >= kDepth) return cum[kDepth];
  const double frac = d - lower;
  return cum[lower] + frac * (cum[lower + 1] - cum[lower]);
}

double maturity_thermal_time(const CropParameters& p, double earliness) {
  return p.maturity_base + p.maturity_earliness_span * (1.0 - earliness);
}

double reference_evapotranspiration(double radiation, double t) {
  constexpr double kPsychrometric = 0.066;  // kPa/degC
  constexpr double kLatentHeat = 2.45;      // MJ/kg
  const double es = 0.6108 * std::exp(17.27 * t / (t + 237.3));
  const double slope = 4098.0 * es / ((t + 237.3) * (t + 237.3));
  return std::max(0.0, 0.65 * slope / (slope + kPsychrometric) * radiation / kLatentHeat);
}

CropState initial_state(const SoilProfile& profile, const ManagementPlan& mgmt,
                        const CropParameters& p) {
  CropState s;
  s.doy = mgmt.sowing_doy - 1;
  s.root_depth = std::min(p.initial_root_depth, mgmt.max_rooting_depth);
  s.root_water = profile.field_capacity_mm(s.root_depth);
  s.subsoil_water =
      profile.field_capacity_mm(mgmt.max_rooting_depth) - profile.field_capacity_mm(s.root_depth);
  s.n_available = p.initial_mineral_n;
  for (const auto& e : mgmt.n_events) {
    if (e.doy < mgmt.sowing_doy) s.n_available += e.kg_per_ha;
  }
  return s;
}

CropState simulate_daily_step(const CropState& state, const WeatherDay& day,
                              const SoilProfile& profile, const ManagementPlan& mgmt,
                              const CropParameters& p) {
  CropState s = state;
  s.doy = day.doy;
  s.rain = day.rain;
  s.irrigation = events_on(mgmt.irrigation_events, day.doy);
  s.transpiration = s.evaporation = s.drainage = 0.0;

  const double t_mean = 0.5 * (day.tmax + day.tmin);
  const double d_tt = std::max(0.0, t_mean - p.base_temperature);
  s.thermal_time += d_tt;
  const double tt_maturity = maturity_thermal_time(p, mgmt.earliness);
  const double development = s.thermal_time / tt_maturity;

  // Mineralization runs at the nominal rate at the reference temperature
  // and follows a Q10 response around it.
  const double mineralization_temp =
      std::pow(p.mineralization_q10, (std::max(t_mean, 0.0) - p.mineralization_reference_temp) / 10.0);
  s.n_available += events_on(mgmt.n_events, day.doy) +
                   p.mineralization_rate / 30.0 * profile.topsoil_om_percent() * mineralization_temp;

  if (!s.emerged && s.thermal_time >= p.emergence_tt) {
    s.emerged = true;
    s.lai = p.initial_lai;
    s.leaf_dm = p.initial_lai / p.specific_leaf_area;
  }
  const double intercepted = s.emerged ? 1.0 - std::exp(-p.extinction * s.lai) : 0.0;

  // Infiltration: the rooted zone fills to field capacity, the excess
  // refills the unrooted subsoil and then leaves the profile.
  const double fc_root = profile.field_capacity_mm(s.root_depth);
  const double wp_root = profile.wilting_point_mm(s.root_depth);
  const double fc_sub = profile.field_capacity_mm(mgmt.max_rooting_depth) - fc_root;
  s.root_water += s.rain + s.irrigation;
  const double excess = std::max(0.0, s.root_water - fc_root);
  s.root_water -= excess;
  const double to_subsoil = std::min(excess, std::max(0.0, fc_sub - s.subsoil_water));
  s.subsoil_water += to_subsoil;
  s.drainage = excess - to_subsoil;

  const double et0 = reference_evapotranspiration(day.radiation, t_mean);
  const double potential_transpiration = p.crop_factor * et0 * intercepted;
  const double potential_evaporation = et0 * (1.0 - intercepted);
  const double extractable = std::max(0.0, s.root_water - wp_root);
  const double capacity = fc_root - wp_root;
  const double available_fraction = capacity > 0.0 ? std::min(1.0, extractable / capacity) : 0.0;
  const double supply_factor = std::clamp(available_fraction / (1.0 - p.depletion_fraction), 0.0, 1.0);
  s.transpiration = std::min(potential_transpiration * supply_factor, extractable);
  s.evaporation = std::min(potential_evaporation * available_fraction, extractable - s.transpiration);
  s.root_water -= s.transpiration + s.evaporation;
  const double water_stress =
      potential_transpiration > 0.0 ? s.transpiration / potential_transpiration : 1.0;

  if (s.emerged) {
    const double total = s.total_dm();
    const double critical = critical_n_fraction(total) * total;
    const double nitrogen_stress = critical > 0.0 ? std::min(1.0, s.n_uptake / critical) : 1.0;
    const double stress = std::min(water_stress, nitrogen_stress);
    const double growth =
        p.rue * 10.0 * day.radiation * intercepted * temperature_factor(t_mean) * stress;

    const double tt_initiation = p.tuber_initiation_fraction * tt_maturity;
    const double tuber_share =
        s.thermal_time < tt_initiation
            ? 0.0
            : p.tuber_partition_max * std::min(1.0, (s.thermal_time - tt_initiation) / 200.0);
    const double leaf_growth = growth * (1.0 - tuber_share) * 0.65;
    s.tuber_dm += growth * tuber_share;
    s.leaf_dm += leaf_growth;
    s.stem_dm += growth * (1.0 - tuber_share) * 0.35;

    const double new_total = s.total_dm();
    const double demand = critical_n_fraction(new_total) * new_total - s.n_uptake;
    const double uptake = std::clamp(demand, 0.0, std::min(p.max_n_uptake, s.n_available));
    s.n_available -= uptake;
    s.n_uptake += uptake;

    if (s.lai < p.juvenile_lai_limit && s.thermal_time < tt_initiation) {
      s.lai *= std::exp(p.juvenile_lai_rgr * d_tt);
    } else {
      s.lai += p.specific_leaf_area * leaf_growth;
    }
    double death_rate = 0.0;
    if (development > p.senescence_onset) {
      death_rate += p.senescence_rate_max * (development - p.senescence_onset) /
                    (1.0 - p.senescence_onset);
    }
    if (water_stress < 0.5) death_rate += p.drought_senescence * (1.0 - water_stress / 0.5);
    death_rate = std::min(1.0, death_rate);
    s.lai -= s.lai * death_rate;
    s.leaf_dm -= s.leaf_dm * death_rate;

    // Root front advances into the subsoil, taking its water along.
    if (s.root_depth < mgmt.max_rooting_depth && development < 0.6) {
      const double unrooted = mgmt.max_rooting_depth - s.root_depth;
      const double advance =
          std::min(unrooted, p.root_growth_rate * std::min(1.0, d_tt / 12.0));
      const double moved = s.subsoil_water * advance / unrooted;
      s.subsoil_water -= moved;
      s.root_water += moved;
      s.root_depth += advance;
    }
  }

  if (s.thermal_time >= tt_maturity) s.mature = true;
  return s;
}

SimulationResult run_simulation(const WeatherSeries& weather, const SoilType& soil,
                                const ManagementPlan& mgmt, const SimulationOptions& options) {
  validate(weather);
  validate(soil);
  validate(mgmt, static_cast<int>(weather.days.size()));
  return run_simulation(weather, SoilProfile(soil), mgmt, options);
}

SimulationResult run_simulation(const WeatherSeries& weather, const SoilProfile& profile,
                                const ManagementPlan& mgmt, const SimulationOptions& options) {
  const auto& p = options.params;
  const int season_end = std::min(weather.last_doy(), p.harvest_deadline_doy);
  if (mgmt.sowing_doy > season_end) {
    throw ValidationError("sowing day " + std::to_string(mgmt.sowing_doy) +
                          " after season end " + std::to_string(season_end));
  }
  SimulationResult result;
  if (options.trace) result.daily_trace.emplace();

  CropState state = initial_state(profile, mgmt, p);
  for (int doy = mgmt.sowing_doy; doy <= season_end; ++doy) {
    state = simulate_daily_step(state, weather.day(doy), profile, mgmt, p);
    if (result.daily_trace) {
      result.daily_trace->push_back({state.doy, state.thermal_time, state.lai, state.storage(),
                                     state.tuber_dm, state.n_available, state.rain,
                                     state.irrigation, state.transpiration, state.evaporation,
                                     state.drainage});
    }
    if (state.mature) break;
  }
  result.harvest_doy = state.doy;
  result.reached_maturity = state.mature;
  result.fresh_yield = std::max(0.0, state.tuber_dm) / p.dry_matter_fraction / 1000.0;
  return result;
}

}  // namespace agrimeta::cropsim
