#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agrimeta/cropsim/types.hpp"
#include "agrimeta/datagen/sample.hpp"

namespace agrimeta::baselines {

// Inclusive day-of-year bounds of the May-August averaging window.
inline constexpr int kWindowFirstDoy = 121;
inline constexpr int kWindowLastDoy = 243;
inline constexpr std::size_t kLRFeatureCount = 5;

struct LRFeatureRow {
  double earliness = 0.0;
  double sowing_doy = 0.0;
  double mean_precip = 0.0;  // mm/day
  double mean_temp = 0.0;    // degC, daily (tmax + tmin) / 2
  double intercept = 1.0;

  std::array<double, kLRFeatureCount> values() const {
    return {earliness, sowing_doy, mean_precip, mean_temp, intercept};
  }
};

inline const std::array<std::string, kLRFeatureCount> kLRFeatureNames = {
    "earliness", "sowing_doy", "mean_precip_mm_per_day", "mean_daily_temp_c", "intercept"};

LRFeatureRow extract_lr_features(const datagen::Sample& sample);
LRFeatureRow extract_lr_features(const cropsim::WeatherSeries& weather, const cropsim::ManagementPlan& mgmt);

struct LRModel {
  std::array<double, kLRFeatureCount> coefficients{};
  bool fitted = false;

  double predict(const LRFeatureRow& row) const;
  std::vector<double> predict(std::span<const LRFeatureRow> rows) const;
};

// Ordinary least squares through the normal equations. Throws ValidationError
// with fewer than 5 rows or a rank-deficient design.
LRModel fit_ols(std::span<const LRFeatureRow> rows, std::span<const double> targets);

nlohmann::json to_json(const LRModel& model);
LRModel lr_model_from_json(const nlohmann::json& j);

}  // namespace agrimeta::baselines
