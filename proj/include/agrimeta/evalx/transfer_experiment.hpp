#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "agrimeta/datagen/sample.hpp"
#include "agrimeta/evalx/metrics.hpp"
#include "agrimeta/trainer/trainer.hpp"

namespace agrimeta::evalx {

struct TransferExperimentConfig {
  std::size_t pretrain_size = 10000;  // drawn from peat (2xx) samples
  std::size_t holdout_size = 17000;   // drawn from sand (3xx) samples, fixed across seeds
  std::vector<std::size_t> finetune_sizes{50, 200, 1000};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::uint64_t master_seed = 0;  // selects the hold-out
  bool use_soil_stream = false;
  trainer::TrainConfig pretrain;  // per-run seed is overridden
  trainer::TrainConfig finetune;
  trainer::TrainConfig baseline;

  void validate() const;
};

// `size` 0 with model "pretrained" is the unadapted source-domain model.
struct TransferRow {
  std::string model;  // pretrained | metamodel | data_driven
  std::size_t size = 0;
  std::uint64_t seed = 0;
  double rmse = 0.0;
  std::optional<double> pearson_r;
  double mean_bias = 0.0;
  std::size_t n_eval = 0;
  int epochs_run = 0;
};

struct TransferResults {
  std::vector<TransferRow> rows;
  std::size_t holdout_size = 0;

  std::vector<double> rmse_of(const std::string& model, std::size_t size) const;
  MeanStd rmse_summary(const std::string& model, std::size_t size) const;
};

// Data plan shared by the experiment runner and its tests.
struct TransferPlan {
  std::vector<std::size_t> holdout;  // indices into the sand subset
  std::vector<std::size_t> pool;     // remaining sand indices, fine-tune candidates
};

TransferPlan plan_transfer(std::size_t n_sand, const TransferExperimentConfig& config);
// Per-seed fine-tune indices into the sand subset; prefixes nest across sizes.
std::vector<std::size_t> finetune_indices(const TransferPlan& plan, std::size_t size, std::uint64_t seed);
std::vector<std::size_t> pretrain_indices(std::size_t n_peat, std::size_t size, std::uint64_t seed);

using ProgressFn = std::function<void(const std::string&)>;

TransferResults run_transfer_experiment(std::span<const datagen::Sample> synthetic,
                                        const TransferExperimentConfig& config, const ProgressFn& progress = {});

}  // namespace agrimeta::evalx
