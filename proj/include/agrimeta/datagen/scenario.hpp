#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agrimeta/cropsim/types.hpp"

namespace agrimeta::datagen {

struct Scenario {
  std::string location_id;
  int year = 0;
  int soil_code = 0;
  int replicate_index = 0;
  cropsim::ManagementPlan mgmt;
  std::uint64_t rng_seed = 0;
};

// Levels of each factor in the full factorial design.
struct FactorialAxes {
  std::vector<std::string> locations;
  std::vector<int> years;
  std::vector<int> soil_codes;
  int replicates = 12;
};

// Shipped axes truncated to the given counts: stations L1.., years from
// `first_year`, soils in library order (peat then sand). Counts beyond the
// shipped sets get synthetic identifiers.
FactorialAxes default_axes(int n_locations, int n_years, int n_soils, int n_replicates,
                           int first_year = 1990);

std::uint64_t scenario_seed(std::uint64_t master_seed, const std::string& location, int year,
                            int soil_code, int replicate);

// Location-major ordering: location, year, soil, replicate.
std::vector<Scenario> build_factorial(const FactorialAxes& axes, std::uint64_t master_seed);
std::vector<Scenario> build_factorial(int n_locations, int n_years, int n_soils, int n_replicates,
                                      std::uint64_t master_seed);

// Random management: sowing U{100..135}; total N U[0,300] over 1-3 events;
// irrigation absent with p=0.5, else 2-6 events of U[10,30] mm in DOY 150-240;
// rooting depth U[30,60] cm; earliness U[0,1].
cropsim::ManagementPlan sample_management(std::uint64_t rng_seed);

}  // namespace agrimeta::datagen
