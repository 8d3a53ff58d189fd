#include "agrimeta/baselines/linear_regression.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "agrimeta/error.hpp"

namespace agrimeta::baselines {

namespace {

constexpr std::size_t N = kLRFeatureCount;

LRFeatureRow finish(double earliness, double sowing, double rain_sum, double temp_sum, int days) {
  LRFeatureRow row;
  row.earliness = earliness;
  row.sowing_doy = sowing;
  row.mean_precip = rain_sum / days;
  row.mean_temp = temp_sum / days;
  if (!std::isfinite(row.mean_precip) || !std::isfinite(row.mean_temp)) {
    throw ValidationError("non-finite weather in the May-August window");
  }
  return row;
}

}  // namespace

LRFeatureRow extract_lr_features(const datagen::Sample& sample) {
  const int first = kWindowFirstDoy - datagen::kWindowStartDoy;
  const int last = kWindowLastDoy - datagen::kWindowStartDoy;
  if (first < 0 || last >= static_cast<int>(datagen::kWindowDays) ||
      sample.temporal.size() != datagen::kTemporalChannels * datagen::kWindowDays) {
    throw ValidationError("sample encoding does not cover DOY 121-243");
  }
  double rain = 0.0, temp = 0.0;
  for (int d = first; d <= last; ++d) {
    const auto i = static_cast<std::size_t>(d);
    rain += sample.temporal_at(1, i);
    temp += 0.5 * (sample.temporal_at(2, i) + sample.temporal_at(3, i));
  }
  return finish(sample.scalars[2], sample.scalars[1], rain, temp, last - first + 1);
}

LRFeatureRow extract_lr_features(const cropsim::WeatherSeries& weather, const cropsim::ManagementPlan& mgmt) {
  if (weather.days.empty() || weather.last_doy() < kWindowLastDoy) {
    throw ValidationError("weather " + weather.location_id + "/" + std::to_string(weather.year) +
                          " does not cover DOY 121-243");
  }
  double rain = 0.0, temp = 0.0;
  for (int doy = kWindowFirstDoy; doy <= kWindowLastDoy; ++doy) {
    const auto& d = weather.day(doy);
    rain += d.rain;
    temp += 0.5 * (d.tmax + d.tmin);
  }
  return finish(mgmt.earliness, mgmt.sowing_doy, rain, temp, kWindowLastDoy - kWindowFirstDoy + 1);
}

double LRModel::predict(const LRFeatureRow& row) const {
  if (!fitted) throw ValidationError("linear model is not fitted");
  const auto x = row.values();
  double y = 0.0;
  for (std::size_t j = 0; j < N; ++j) y += coefficients[j] * x[j];
  return y;
}

std::vector<double> LRModel::predict(std::span<const LRFeatureRow> rows) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict(r));
  return out;
}

LRModel fit_ols(std::span<const LRFeatureRow> rows, std::span<const double> targets) {
  if (rows.size() != targets.size()) throw ValidationError("fit_ols: rows and targets differ in length");
  if (rows.size() < N) throw ValidationError("fit_ols: need at least 5 rows, got " + std::to_string(rows.size()));

  // Column scaling keeps the pivot threshold meaningful for features with
  // very different magnitudes (DOY vs fractions).
  std::array<double, N> scale{};
  for (const auto& r : rows) {
    const auto x = r.values();
    for (std::size_t j = 0; j < N; ++j) scale[j] = std::max(scale[j], std::abs(x[j]));
  }
  for (std::size_t j = 0; j < N; ++j) {
    if (scale[j] == 0.0) throw ValidationError("fit_ols: rank-deficient design (all-zero column " + kLRFeatureNames[j] + ")");
  }

  double a[N][N + 1] = {};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto x = rows[k].values();
    for (std::size_t i = 0; i < N; ++i) {
      const double xi = x[i] / scale[i];
      for (std::size_t j = 0; j < N; ++j) a[i][j] += xi * x[j] / scale[j];
      a[i][N] += xi * targets[k];
    }
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < N; ++i) trace += a[i][i];

  // Gauss-Jordan with partial pivoting on the scaled Gram matrix. A pivot
  // below 1e-10 of the trace signals linear dependence between columns.
  for (std::size_t c = 0; c < N; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < N; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
    }
    if (std::abs(a[pivot][c]) <= 1e-10 * trace) {
      throw ValidationError("fit_ols: rank-deficient design matrix");
    }
    for (std::size_t j = 0; j <= N; ++j) std::swap(a[c][j], a[pivot][j]);
    for (std::size_t r = 0; r < N; ++r) {
      if (r == c) continue;
      const double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= N; ++j) a[r][j] -= f * a[c][j];
    }
  }

  LRModel model;
  for (std::size_t j = 0; j < N; ++j) {
    model.coefficients[j] = a[j][N] / a[j][j] / scale[j];
    if (!std::isfinite(model.coefficients[j])) throw NumericalFault("fit_ols: non-finite coefficient");
  }
  model.fitted = true;
  return model;
}

nlohmann::json to_json(const LRModel& model) {
  nlohmann::json coef = nlohmann::json::object();
  for (std::size_t j = 0; j < N; ++j) coef[kLRFeatureNames[j]] = model.coefficients[j];
  return {{"model", "linear_regression"}, {"fitted", model.fitted}, {"coefficients", coef}};
}

LRModel lr_model_from_json(const nlohmann::json& j) {
  LRModel m;
  try {
    m.fitted = j.at("fitted").get<bool>();
    for (std::size_t k = 0; k < N; ++k) m.coefficients[k] = j.at("coefficients").at(kLRFeatureNames[k]).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("linear model json: ") + e.what());
  }
  return m;
}

}  // namespace agrimeta::baselines
