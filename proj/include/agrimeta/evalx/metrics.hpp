#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace agrimeta::evalx {

// Root mean squared error; throws on empty input, length mismatch or non-finite values.
double rmse(std::span<const double> predictions, std::span<const double> observations);

// Sample Pearson correlation, clamped to [-1, 1]. Throws ValidationError when
// either input is constant or shorter than 2.
double pearson_r(std::span<const double> predictions, std::span<const double> observations);

// Mean of (prediction - observation).
double mean_bias(std::span<const double> predictions, std::span<const double> observations);

struct EvalReport {
  std::string model_id;
  std::string dataset_id;
  double rmse = 0.0;                // fresh tonne/ha
  std::optional<double> pearson_r;  // empty when undefined (constant input)
  double mean_bias = 0.0;
  std::size_t n = 0;
  std::vector<std::pair<double, double>> pairs;  // (prediction, observation)
};

EvalReport evaluate(std::string model_id, std::string dataset_id, std::span<const double> predictions,
                    std::span<const double> observations);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

}  // namespace agrimeta::evalx
