#include "agrimeta/evalx/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "agrimeta/error.hpp"

namespace agrimeta::evalx {

namespace {

void check_pair(std::span<const double> p, std::span<const double> o, std::size_t min_n, const char* what) {
  if (p.size() != o.size()) throw ValidationError(std::string(what) + ": length mismatch");
  if (p.size() < min_n) throw ValidationError(std::string(what) + ": not enough values");
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || !std::isfinite(o[i])) throw ValidationError(std::string(what) + ": non-finite value");
  }
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double rmse(std::span<const double> predictions, std::span<const double> observations) {
  check_pair(predictions, observations, 1, "rmse");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - observations[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(predictions.size()));
}

double pearson_r(std::span<const double> predictions, std::span<const double> observations) {
  check_pair(predictions, observations, 2, "pearson_r");
  const double mp = mean_of(predictions);
  const double mo = mean_of(observations);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double dp = predictions[i] - mp;
    const double dobs = observations[i] - mo;
    sxy += dp * dobs;
    sxx += dp * dp;
    syy += dobs * dobs;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson_r: undefined for constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double mean_bias(std::span<const double> predictions, std::span<const double> observations) {
  check_pair(predictions, observations, 1, "mean_bias");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) sum += predictions[i] - observations[i];
  return sum / static_cast<double>(predictions.size());
}

EvalReport evaluate(std::string model_id, std::string dataset_id, std::span<const double> predictions,
                    std::span<const double> observations) {
  EvalReport r;
  r.model_id = std::move(model_id);
  r.dataset_id = std::move(dataset_id);
  r.rmse = rmse(predictions, observations);
  r.mean_bias = mean_bias(predictions, observations);
  try {
    r.pearson_r = pearson_r(predictions, observations);
  } catch (const ValidationError&) {
    r.pearson_r.reset();
  }
  r.n = predictions.size();
  r.pairs.reserve(r.n);
  for (std::size_t i = 0; i < r.n; ++i) r.pairs.emplace_back(predictions[i], observations[i]);
  return r;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw ValidationError("mean_std: empty input");
  MeanStd m;
  m.mean = mean_of(values);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

}  // namespace agrimeta::evalx
