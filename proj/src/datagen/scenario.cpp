#include "agrimeta/datagen/scenario.hpp"

#include <algorithm>
#include <random>

#include "agrimeta/cropsim/soil_library.hpp"
#include "agrimeta/cropsim/weather_generator.hpp"
#include "agrimeta/error.hpp"
#include "agrimeta/rng.hpp"

namespace agrimeta::datagen {
namespace {

std::int64_t location_key(const std::string& location) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : location) h = (h ^ c) * 0x100000001b3ull;
  return static_cast<std::int64_t>(h);
}

}  // namespace

FactorialAxes default_axes(int n_locations, int n_years, int n_soils, int n_replicates,
                           int first_year) {
  if (n_locations < 1 || n_years < 1 || n_soils < 1 || n_replicates < 1) {
    throw ValidationError("factorial counts must all be >= 1");
  }
  FactorialAxes axes;
  const auto& climates = cropsim::shipped_climates();
  for (int i = 0; i < n_locations; ++i) {
    axes.locations.push_back(i < static_cast<int>(climates.size())
                                 ? climates[static_cast<std::size_t>(i)].location_id
                                 : "L" + std::to_string(i + 1));
  }
  for (int i = 0; i < n_years; ++i) axes.years.push_back(first_year + i);
  const auto& soils = cropsim::shipped_soil_library();
  for (int i = 0; i < n_soils; ++i) {
    axes.soil_codes.push_back(i < static_cast<int>(soils.size())
                                  ? soils[static_cast<std::size_t>(i)].code
                                  : 900 + i);
  }
  axes.replicates = n_replicates;
  return axes;
}

std::uint64_t scenario_seed(std::uint64_t master_seed, const std::string& location, int year,
                            int soil_code, int replicate) {
  return derive_seed(master_seed, {location_key(location), year, soil_code, replicate});
}

std::vector<Scenario> build_factorial(const FactorialAxes& axes, std::uint64_t master_seed) {
  if (axes.locations.empty() || axes.years.empty() || axes.soil_codes.empty() ||
      axes.replicates < 1) {
    throw ValidationError("factorial axes must all be non-empty");
  }
  std::vector<Scenario> scenarios;
  scenarios.reserve(axes.locations.size() * axes.years.size() * axes.soil_codes.size() *
                    static_cast<std::size_t>(axes.replicates));
  for (const auto& location : axes.locations) {
    for (int year : axes.years) {
      for (int soil : axes.soil_codes) {
        for (int r = 0; r < axes.replicates; ++r) {
          Scenario s;
          s.location_id = location;
          s.year = year;
          s.soil_code = soil;
          s.replicate_index = r;
          s.rng_seed = scenario_seed(master_seed, location, year, soil, r);
          s.mgmt = sample_management(s.rng_seed);
          scenarios.push_back(std::move(s));
        }
      }
    }
  }
  return scenarios;
}

std::vector<Scenario> build_factorial(int n_locations, int n_years, int n_soils, int n_replicates,
                                      std::uint64_t master_seed) {
  return build_factorial(default_axes(n_locations, n_years, n_soils, n_replicates), master_seed);
}

cropsim::ManagementPlan sample_management(std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto uniform_int = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };

  cropsim::ManagementPlan plan;
  plan.sowing_doy = uniform_int(100, 135);

  const double total_n = 300.0 * unit(rng);
  const int n_events = uniform_int(1, 3);
  std::vector<double> weights(static_cast<std::size_t>(n_events));
  double weight_sum = 0.0;
  for (auto& w : weights) {
    w = 0.2 + 0.8 * unit(rng);
    weight_sum += w;
  }
  for (int k = 0; k < n_events; ++k) {
    const int doy = k == 0 ? plan.sowing_doy - uniform_int(0, 7)
                           : plan.sowing_doy + 20 * k + uniform_int(0, 15);
    plan.n_events.push_back({doy, total_n * weights[static_cast<std::size_t>(k)] / weight_sum});
  }

  if (unit(rng) >= 0.5) {
    const int n_irrigations = uniform_int(2, 6);
    for (int k = 0; k < n_irrigations; ++k) {
      const int doy = uniform_int(150, 240);
      plan.irrigation_events.push_back({doy, 10.0 + 20.0 * unit(rng)});
    }
    std::sort(plan.irrigation_events.begin(), plan.irrigation_events.end(),
              [](const auto& a, const auto& b) { return a.doy < b.doy; });
  }

  plan.max_rooting_depth = 30.0 + 30.0 * unit(rng);
  plan.earliness = unit(rng);
  return plan;
}

}  // namespace agrimeta::datagen
