#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "agrimeta/datagen/normalizer.hpp"
#include "agrimeta/datagen/sample.hpp"
#include "agrimeta/tensornet/model_io.hpp"
#include "agrimeta/tensornet/parameters.hpp"
#include "agrimeta/tensornet/spec.hpp"
#include "agrimeta/trainer/monitor.hpp"

namespace agrimeta::trainer {

struct TrainConfig {
  double initial_lr = 0.001;
  double es_min_delta = 0.001;
  int es_patience = 20;
  double lr_factor = 0.5;
  double lr_min_delta = 0.001;
  int lr_patience = 10;
  int max_epochs = 500;
  std::size_t batch_size = 32;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
  MonitorConfig monitor() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean MSE over the epoch's batches (normalized target units)
  double val_loss = 0.0;    // MSE on the validation split after the epoch
  double lr = 0.0;          // learning rate used during the epoch

  bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = 0;             // 0 only when no epoch ran
  double best_val_loss = 0.0;
  double initial_val_loss = 0.0;  // validation MSE of the starting parameters
  double best_val_rmse = 0.0;     // fresh tonne/ha, at the best epoch
  bool early_stopped = false;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  std::vector<EpochRecord> history;

  bool operator==(const TrainReport&) const = default;
};

struct TrainResult {
  tensornet::Parameters params;  // from the best-validation epoch
  datagen::Normalizer normalizer;
  TrainReport report;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded random hold-out of round(n * val_fraction) samples (at least one,
// leaving at least one for training). Both index lists are ascending.
Split split_train_validation(std::size_t n, double val_fraction, std::uint64_t seed);

// Fits the normalizer on the training portion, then trains from `initial`.
TrainResult train(const tensornet::NetworkSpec& spec, tensornet::Parameters initial,
                  std::span<const datagen::Sample> dataset, const TrainConfig& config);

// As train(), but with a fixed normalizer instead of one fitted here.
TrainResult train_with_normalizer(const tensornet::NetworkSpec& spec, tensornet::Parameters initial,
                                  std::span<const datagen::Sample> dataset, const TrainConfig& config,
                                  const datagen::Normalizer& normalizer);

// Freezes all but the last two parameterized layers of the pretrained model
// and trains on the target data, keeping the pretrained normalizer.
TrainResult fine_tune(const tensornet::Model& pretrained, std::span<const datagen::Sample> target,
                      const TrainConfig& config);

// Predictions in fresh tonne/ha for raw (unnormalized) samples.
std::vector<double> predict(const tensornet::NetworkSpec& spec, const tensornet::Parameters& params,
                            const datagen::Normalizer& normalizer, std::span<const datagen::Sample> samples);

}  // namespace agrimeta::trainer
