#include "agrimeta/trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "agrimeta/datagen/dataset.hpp"
#include "agrimeta/error.hpp"
#include "agrimeta/rng.hpp"
#include "agrimeta/tensornet/adam.hpp"
#include "agrimeta/tensornet/network.hpp"

namespace agrimeta::trainer {

namespace tn = agrimeta::tensornet;
using datagen::Sample;

void TrainConfig::validate() const {
  if (!(initial_lr > 0.0) || !std::isfinite(initial_lr)) throw ValidationError("initial_lr must be a positive number");
  if (!(lr_factor > 0.0 && lr_factor < 1.0)) throw ValidationError("lr_factor must be in (0, 1)");
  if (es_patience < 1 || lr_patience < 1) throw ValidationError("patience values must be >= 1");
  if (es_min_delta < 0.0 || lr_min_delta < 0.0) throw ValidationError("min_delta values must be >= 0");
  if (max_epochs < 0) throw ValidationError("max_epochs must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ValidationError("val_fraction must be in (0, 1)");
}

MonitorConfig TrainConfig::monitor() const {
  return {initial_lr, es_min_delta, es_patience, lr_factor, lr_min_delta, lr_patience};
}

Split split_train_validation(std::size_t n, double val_fraction, std::uint64_t seed) {
  if (n < 2) throw ValidationError("need at least 2 samples to split train/validation");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ValidationError("val_fraction must be in (0, 1)");
  auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * val_fraction));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  Split s;
  s.validation = datagen::draw_indices(n, n_val, derive_seed(seed, {0x5e1}));
  std::sort(s.validation.begin(), s.validation.end());
  s.train.reserve(n - n_val);
  std::size_t v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (v < s.validation.size() && s.validation[v] == i) {
      ++v;
    } else {
      s.train.push_back(i);
    }
  }
  return s;
}

namespace {

double mse(const std::vector<double>& pred, const std::vector<double>& target) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    sum += e * e;
  }
  return sum / static_cast<double>(pred.size());
}

void require_finite(double v, const std::string& what, int epoch) {
  if (!std::isfinite(v)) {
    throw NumericalFault("non-finite " + what + " at epoch " + std::to_string(epoch) +
                         "; try a smaller learning rate or check the input data");
  }
}

}  // namespace

TrainResult train_with_normalizer(const tn::NetworkSpec& spec, tn::Parameters initial,
                                  std::span<const Sample> dataset, const TrainConfig& config,
                                  const datagen::Normalizer& normalizer) {
  config.validate();
  tn::validate(spec);
  if (dataset.size() < 10) {
    throw ValidationError("training needs at least 10 samples, got " + std::to_string(dataset.size()));
  }
  if (!initial.same_layout(tn::Parameters(spec))) {
    throw ValidationError("initial parameters do not match the network spec");
  }

  const Split split = split_train_validation(dataset.size(), config.val_fraction, config.seed);
  const auto normalized = datagen::apply_normalizer(normalizer, dataset);
  std::vector<tn::NetInput> inputs;
  std::vector<double> targets;
  inputs.reserve(normalized.size());
  targets.reserve(normalized.size());
  for (const auto& s : normalized) {
    inputs.push_back(tn::input_of(s));
    targets.push_back(s.target);
  }
  std::vector<tn::NetInput> val_inputs;
  std::vector<double> val_targets;
  for (auto i : split.validation) {
    val_inputs.push_back(inputs[i]);
    val_targets.push_back(targets[i]);
  }

  const tn::Network net(spec);
  auto validation_loss = [&](const tn::Parameters& p) { return mse(net.forward_batch(p, val_inputs), val_targets); };

  TrainResult result;
  result.normalizer = normalizer;
  TrainReport& report = result.report;
  report.train_size = split.train.size();
  report.val_size = split.validation.size();
  report.initial_val_loss = validation_loss(initial);
  require_finite(report.initial_val_loss, "initial validation loss", 0);

  PlateauMonitor monitor(config.monitor());
  monitor.seed(report.initial_val_loss);

  tn::Parameters params = std::move(initial);
  tn::Parameters best = params;
  double best_val = std::numeric_limits<double>::infinity();
  tn::AdamState adam = tn::AdamState::for_parameters(params, config.initial_lr);

  std::vector<tn::NetInput> batch_inputs;
  std::vector<double> batch_targets;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = monitor.lr();
    adam.learning_rate = lr;
    const auto order = datagen::draw_indices(split.train.size(), split.train.size(),
                                             derive_seed(config.seed, {0xe90c, epoch}));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch_inputs.clear();
      batch_targets.clear();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = split.train[order[k]];
        batch_inputs.push_back(inputs[i]);
        batch_targets.push_back(targets[i]);
      }
      auto lg = net.backward(params, batch_inputs, batch_targets);
      require_finite(lg.loss, "training loss", epoch);
      tn::mask_frozen(params, lg.gradient);
      tn::adam_step(params, lg.gradient, adam);
      loss_sum += lg.loss * static_cast<double>(end - start);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.val_loss = validation_loss(params);
    require_finite(rec.val_loss, "validation loss", epoch);
    report.history.push_back(rec);
    report.epochs_run = epoch;
    if (rec.val_loss < best_val) {
      best_val = rec.val_loss;
      best = params;
      report.best_epoch = epoch;
    }
    if (monitor.observe(rec.val_loss).stop) {
      report.early_stopped = true;
      break;
    }
  }

  report.best_val_loss = report.epochs_run == 0 ? report.initial_val_loss : best_val;
  report.best_val_rmse = std::sqrt(report.best_val_loss) * normalizer.target_std;
  result.params = std::move(best);
  return result;
}

TrainResult train(const tn::NetworkSpec& spec, tn::Parameters initial, std::span<const Sample> dataset,
                  const TrainConfig& config) {
  config.validate();
  if (dataset.size() < 10) {
    throw ValidationError("training needs at least 10 samples, got " + std::to_string(dataset.size()));
  }
  const Split split = split_train_validation(dataset.size(), config.val_fraction, config.seed);
  const auto train_part = datagen::take(dataset, split.train);
  const auto normalizer = datagen::fit_normalizer(train_part);
  return train_with_normalizer(spec, std::move(initial), dataset, config, normalizer);
}

TrainResult fine_tune(const tn::Model& pretrained, std::span<const Sample> target, const TrainConfig& config) {
  for (const auto& s : target) {
    if (s.temporal.size() != pretrained.spec.temporal_input.size() ||
        (pretrained.spec.use_soil && s.soil.size() != pretrained.spec.soil_input.size())) {
      throw ValidationError("target sample shapes do not match the pretrained model's inputs");
    }
  }
  tn::Parameters params = pretrained.params;
  params.freeze_all_but_last(2);
  return train_with_normalizer(pretrained.spec, std::move(params), target, config, pretrained.normalizer);
}

std::vector<double> predict(const tn::NetworkSpec& spec, const tn::Parameters& params,
                            const datagen::Normalizer& normalizer, std::span<const Sample> samples) {
  const tn::Network net(spec);
  std::vector<double> out;
  out.reserve(samples.size());
  constexpr std::size_t kChunk = 2048;
  for (std::size_t start = 0; start < samples.size(); start += kChunk) {
    const auto chunk = samples.subspan(start, std::min(kChunk, samples.size() - start));
    const auto normalized = datagen::apply_normalizer(normalizer, chunk);
    std::vector<tn::NetInput> inputs;
    inputs.reserve(normalized.size());
    for (const auto& s : normalized) inputs.push_back(tn::input_of(s));
    for (double z : net.forward_batch(params, inputs)) out.push_back(normalizer.invert_target(z));
  }
  return out;
}

}  // namespace agrimeta::trainer
