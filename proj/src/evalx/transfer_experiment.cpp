#include "agrimeta/evalx/transfer_experiment.hpp"

#include <algorithm>

#include "agrimeta/baselines/data_driven.hpp"
#include "agrimeta/datagen/dataset.hpp"
#include "agrimeta/error.hpp"
#include "agrimeta/rng.hpp"
#include "agrimeta/tensornet/parameters.hpp"

namespace agrimeta::evalx {

namespace tn = agrimeta::tensornet;

void TransferExperimentConfig::validate() const {
  if (pretrain_size < 10) throw ValidationError("pretrain_size must be >= 10");
  if (holdout_size < 2) throw ValidationError("holdout_size must be >= 2");
  if (seeds.empty()) throw ValidationError("at least one seed is required");
  for (auto s : finetune_sizes) {
    if (s < 10) throw ValidationError("fine-tune sizes must be >= 10");
  }
  pretrain.validate();
  finetune.validate();
  baseline.validate();
}

std::vector<double> TransferResults::rmse_of(const std::string& model, std::size_t size) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.model == model && r.size == size) out.push_back(r.rmse);
  }
  return out;
}

MeanStd TransferResults::rmse_summary(const std::string& model, std::size_t size) const {
  const auto v = rmse_of(model, size);
  if (v.empty()) throw ValidationError("no results for " + model + " at size " + std::to_string(size));
  return mean_std(v);
}

TransferPlan plan_transfer(std::size_t n_sand, const TransferExperimentConfig& config) {
  const std::size_t largest =
      config.finetune_sizes.empty() ? 0 : *std::max_element(config.finetune_sizes.begin(), config.finetune_sizes.end());
  if (n_sand < config.holdout_size + largest) {
    throw ValidationError("sand domain has " + std::to_string(n_sand) + " samples; need " +
                          std::to_string(config.holdout_size + largest) + " for hold-out plus fine-tuning");
  }
  auto order = datagen::draw_indices(n_sand, n_sand, derive_seed(config.master_seed, {0x401d}));
  TransferPlan plan;
  plan.holdout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(config.holdout_size));
  plan.pool.assign(order.begin() + static_cast<std::ptrdiff_t>(config.holdout_size), order.end());
  std::sort(plan.holdout.begin(), plan.holdout.end());
  std::sort(plan.pool.begin(), plan.pool.end());
  return plan;
}

std::vector<std::size_t> finetune_indices(const TransferPlan& plan, std::size_t size, std::uint64_t seed) {
  if (size > plan.pool.size()) throw ValidationError("fine-tune size exceeds the available sand pool");
  const auto draw = datagen::draw_indices(plan.pool.size(), size, derive_seed(seed, {0xf17e}));
  std::vector<std::size_t> out;
  out.reserve(size);
  for (auto i : draw) out.push_back(plan.pool[i]);
  return out;
}

std::vector<std::size_t> pretrain_indices(std::size_t n_peat, std::size_t size, std::uint64_t seed) {
  if (size > n_peat) {
    throw ValidationError("peat domain has " + std::to_string(n_peat) + " samples; pretraining needs " +
                          std::to_string(size));
  }
  return datagen::draw_indices(n_peat, size, derive_seed(seed, {0x9ea7}));
}

TransferResults run_transfer_experiment(std::span<const datagen::Sample> synthetic,
                                        const TransferExperimentConfig& config, const ProgressFn& progress) {
  config.validate();
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  std::vector<datagen::Sample> peat, sand;
  for (const auto& s : synthetic) {
    if (s.meta.soil_code >= 200 && s.meta.soil_code <= 299) peat.push_back(s);
    if (s.meta.soil_code >= 300 && s.meta.soil_code <= 399) sand.push_back(s);
  }
  if (peat.size() < config.pretrain_size) {
    throw ValidationError("insufficient peat samples: " + std::to_string(peat.size()) + " < " +
                          std::to_string(config.pretrain_size));
  }
  const TransferPlan plan = plan_transfer(sand.size(), config);
  const auto holdout = datagen::take(sand, plan.holdout);
  std::vector<double> observed;
  for (const auto& s : holdout) observed.push_back(s.target);

  const auto spec = tn::metamodel_spec(config.use_soil_stream);
  TransferResults results;
  results.holdout_size = holdout.size();

  auto record = [&](const std::string& model, std::size_t size, std::uint64_t seed,
                    const trainer::TrainResult& tr) {
    const auto pred = trainer::predict(spec, tr.params, tr.normalizer, holdout);
    const auto ev = evaluate(model, "sand_holdout", pred, observed);
    results.rows.push_back({model, size, seed, ev.rmse, ev.pearson_r, ev.mean_bias, ev.n, tr.report.epochs_run});
    say(model + " size=" + std::to_string(size) + " seed=" + std::to_string(seed) +
        " rmse=" + std::to_string(ev.rmse) + " epochs=" + std::to_string(tr.report.epochs_run));
  };

  const std::size_t largest =
      config.finetune_sizes.empty() ? 0 : *std::max_element(config.finetune_sizes.begin(), config.finetune_sizes.end());

  for (auto seed : config.seeds) {
    const auto pre_set = datagen::take(peat, pretrain_indices(peat.size(), config.pretrain_size, seed));
    auto pre_cfg = config.pretrain;
    pre_cfg.seed = derive_seed(seed, {0x9ea7, 1});
    say("pretraining seed=" + std::to_string(seed) + " on " + std::to_string(pre_set.size()) + " peat samples");
    const auto pretrained_run =
        trainer::train(spec, tn::init_parameters(spec, derive_seed(seed, {0x1a17})), pre_set, pre_cfg);
    record("pretrained", 0, seed, pretrained_run);
    tn::Model pretrained{spec, pretrained_run.params, pretrained_run.normalizer, {pre_cfg.seed, pre_cfg.val_fraction, {}}};

    const auto all_ft = finetune_indices(plan, largest, seed);
    for (auto size : config.finetune_sizes) {
      const std::vector<std::size_t> idx(all_ft.begin(), all_ft.begin() + static_cast<std::ptrdiff_t>(size));
      const auto subset = datagen::take(sand, idx);

      auto ft_cfg = config.finetune;
      ft_cfg.seed = derive_seed(seed, {0xf17e, static_cast<std::int64_t>(size)});
      record("metamodel", size, seed, trainer::fine_tune(pretrained, subset, ft_cfg));

      auto dd_cfg = config.baseline;
      dd_cfg.seed = ft_cfg.seed;
      record("data_driven", size, seed,
             baselines::build_data_driven_baseline(spec, subset, dd_cfg, derive_seed(seed, {0xdd, static_cast<std::int64_t>(size)})));
    }
  }
  return results;
}

}  // namespace agrimeta::evalx
