#include "agrimeta/cropsim/hydraulics.hpp"

#include <cmath>

#include "agrimeta/error.hpp"

namespace agrimeta::cropsim {

double vg_water_content(double pressure_head_cm, const VanGenuchten& vg) {
  if (!(vg.alpha > 0.0) || !(vg.n > 1.0) || !(vg.theta_res >= 0.0) ||
      !(vg.theta_res < vg.theta_sat)) {
    throw ValidationError("van Genuchten parameters invalid: need alpha > 0, n > 1, "
                          "0 <= theta_res < theta_sat");
  }
  if (!(pressure_head_cm >= 0.0)) throw ValidationError("pressure head must be >= 0");
  const double m = 1.0 - 1.0 / vg.n;
  const double effective = std::pow(1.0 + std::pow(vg.alpha * pressure_head_cm, vg.n), -m);
  return vg.theta_res + (vg.theta_sat - vg.theta_res) * effective;
}

VanGenuchten retention_of(const SoilHorizon& h) {
  return {h.theta_res, h.theta_sat, h.vg_alpha, h.vg_n};
}

HydraulicLimits derive_hydraulic_limits(const SoilType& soil, double layer_cm) {
  if (!(layer_cm >= 0.0) || layer_cm > soil.profile_depth()) {
    throw ValidationError("layer depth outside soil profile");
  }
  const auto vg = retention_of(soil.horizon_at(layer_cm));
  return {vg_water_content(kFieldCapacityHead, vg), vg_water_content(kWiltingPointHead, vg)};
}

}  // namespace agrimeta::cropsim
