#pragma once

#include "agrimeta/cropsim/types.hpp"

namespace agrimeta::cropsim {

struct VanGenuchten {
  double theta_res = 0.0;
  double theta_sat = 0.0;
  double alpha = 0.0;  // 1/cm
  double n = 0.0;
};

inline constexpr double kFieldCapacityHead = 100.0;    // cm suction, pF 2.0
inline constexpr double kWiltingPointHead = 15849.0;   // cm suction, pF 4.2

// theta(h) = theta_r + (theta_s - theta_r) * [1 + (alpha h)^n]^-(1 - 1/n)
double vg_water_content(double pressure_head_cm, const VanGenuchten& vg);

VanGenuchten retention_of(const SoilHorizon& horizon);

struct HydraulicLimits {
  double field_capacity = 0.0;  // volumetric, m3/m3
  double wilting_point = 0.0;
};

// Bucket limits for the horizon containing `layer_cm`.
HydraulicLimits derive_hydraulic_limits(const SoilType& soil, double layer_cm);

}  // namespace agrimeta::cropsim
