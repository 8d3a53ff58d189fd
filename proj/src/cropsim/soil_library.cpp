#include "agrimeta/cropsim/soil_library.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace agrimeta::cropsim {
namespace {

// Low-discrepancy position of soil i in [0,1) for property k, so properties
// vary independently across the library.
double spread(int i, int k) {
  static constexpr double kSteps[] = {0.6180339887, 0.4142135624, 0.7320508076,
                                      0.2360679775, 0.6457513111, 0.1622776602};
  return std::fmod(0.5 + (i + 1) * kSteps[k % 6] + 0.1 * k, 1.0);
}

double lerp(double lo, double hi, double t) { return lo + (hi - lo) * t; }

SoilType make_peat(int i) {
  SoilType soil;
  soil.code = 201 + i;
  soil.name = "peat-" + std::to_string(soil.code);
  SoilHorizon top;
  top.top_cm = 0.0;
  top.bottom_cm = 30.0;
  top.clay_frac = lerp(0.03, 0.20, spread(i, 0));
  top.loam_frac = lerp(0.10, 0.35, spread(i, 1));
  // Most peat topsoils sit near the lower end of the OM range.
  top.om_frac = lerp(0.15, 0.45, std::pow(spread(i, 2), 3.0));
  top.theta_sat = lerp(0.62, 0.85, spread(i, 3));
  top.theta_res = lerp(0.00, 0.08, spread(i, 4));
  top.vg_alpha = lerp(0.015, 0.060, spread(i, 5));
  top.vg_n = lerp(1.20, 1.40, spread(i, 1));
  top.vg_lambda = lerp(-1.5, 0.5, spread(i, 0));

  SoilHorizon sub = top;
  sub.top_cm = 30.0;
  sub.bottom_cm = 120.0;
  sub.om_frac = top.om_frac * 1.1 > 1.0 ? 1.0 : top.om_frac * 1.1;
  sub.theta_sat = std::min(0.9, top.theta_sat + 0.03);
  sub.vg_alpha = top.vg_alpha * 0.8;
  soil.horizons = {top, sub};
  return soil;
}

SoilType make_sand(int i) {
  SoilType soil;
  soil.code = 301 + i;
  soil.name = "sand-" + std::to_string(soil.code);
  SoilHorizon top;
  top.top_cm = 0.0;
  top.bottom_cm = 30.0;
  top.clay_frac = lerp(0.01, 0.06, spread(i, 0));
  top.loam_frac = lerp(0.05, 0.30, spread(i, 1));
  top.om_frac = lerp(0.01, 0.05, spread(i, 2));
  top.theta_sat = lerp(0.36, 0.43, spread(i, 3));
  top.theta_res = lerp(0.02, 0.05, spread(i, 4));
  top.vg_alpha = lerp(0.015, 0.040, spread(i, 5));
  top.vg_n = lerp(1.50, 2.80, spread(i, 2));
  top.vg_lambda = lerp(0.0, 0.5, spread(i, 3));

  SoilHorizon sub = top;
  sub.top_cm = 30.0;
  sub.bottom_cm = 120.0;
  sub.om_frac = top.om_frac * 0.3;
  sub.theta_sat = top.theta_sat - 0.02;
  sub.vg_n = std::min(2.8, top.vg_n * 1.08);
  soil.horizons = {top, sub};
  return soil;
}

std::vector<SoilType> build_library() {
  std::vector<SoilType> soils;
  for (int i = 0; i < 16; ++i) soils.push_back(make_peat(i));
  for (int i = 0; i < 16; ++i) soils.push_back(make_sand(i));
  return soils;
}

}  // namespace

const std::vector<SoilType>& shipped_soil_library() {
  static const std::vector<SoilType> soils = build_library();
  return soils;
}

}  // namespace agrimeta::cropsim
