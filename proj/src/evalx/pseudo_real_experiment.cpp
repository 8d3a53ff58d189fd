#include "agrimeta/evalx/pseudo_real_experiment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "agrimeta/baselines/data_driven.hpp"
#include "agrimeta/error.hpp"
#include "agrimeta/evalx/cross_validation.hpp"
#include "agrimeta/rng.hpp"
#include "agrimeta/tensornet/parameters.hpp"

namespace agrimeta::evalx {

namespace tn = agrimeta::tensornet;

cropsim::CropParameters PseudoDataConfig::truth() const {
  cropsim::CropParameters p = crop_model;
  p.rue *= rue_factor;
  p.mineralization_rate *= mineralization_factor;
  p.dry_matter_fraction = dry_matter_fraction;
  return p;
}

cropsim::ManagementPlan standardized_management(std::uint64_t rng_seed) {
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  cropsim::ManagementPlan m;
  m.sowing_doy = 105 + static_cast<int>(std::floor(unit(rng) * 21.0));
  const double total_n = 120.0 + 120.0 * unit(rng);
  m.n_events.push_back({m.sowing_doy - 3, 0.7 * total_n});
  m.n_events.push_back({m.sowing_doy + 35, 0.3 * total_n});
  if (unit(rng) < 0.4) {
    for (int doy : {170, 190, 210}) m.irrigation_events.push_back({doy, 25.0});
  }
  m.earliness = 0.2 + 0.6 * unit(rng);
  m.max_rooting_depth = 35.0 + 20.0 * unit(rng);
  return m;
}

std::vector<PseudoObservation> generate_pseudo_observations(const datagen::WeatherStore& weather,
                                                            const datagen::SoilLibrary& soils,
                                                            const PseudoDataConfig& config) {
  if (config.years.empty() || config.records_per_year == 0) throw ValidationError("pseudo data needs years and records");
  if (config.noise_sigma < 0.0) throw ValidationError("noise_sigma must be >= 0");
  const auto locations = weather.locations();
  const auto codes = soils.codes();
  if (locations.empty() || codes.empty()) throw ValidationError("pseudo data needs weather and soils");

  const cropsim::SimulationOptions model_opts{false, config.crop_model};
  const cropsim::SimulationOptions truth_opts{false, config.truth()};
  std::vector<PseudoObservation> out;
  for (int year : config.years) {
    for (std::size_t k = 0; k < config.records_per_year; ++k) {
      std::mt19937_64 rng(derive_seed(config.seed, {0x0b5, year, static_cast<std::int64_t>(k)}));
      const auto& loc = locations[rng() % locations.size()];
      const int code = codes[rng() % codes.size()];
      if (!weather.contains(loc, year)) {
        throw ValidationError("pseudo data: no weather for " + loc + "/" + std::to_string(year));
      }
      const auto& w = weather.get(loc, year);
      const auto& soil = soils.get(code);
      const auto mgmt = standardized_management(rng());
      std::normal_distribution<double> noise(0.0, config.noise_sigma);
      const double eps = noise(rng);
      const double truth = cropsim::run_simulation(w, soil, mgmt, truth_opts).fresh_yield;
      PseudoObservation obs;
      obs.crop_model = cropsim::run_simulation(w, soil, mgmt, model_opts).fresh_yield;
      obs.sample = datagen::encode_sample(w, soil, mgmt, truth * std::exp(eps));
      obs.sample.meta = {loc, year, code};
      obs.features = baselines::extract_lr_features(w, mgmt);
      obs.mgmt = mgmt;
      out.push_back(std::move(obs));
    }
  }
  return out;
}

void check_no_year_leakage(const std::vector<int>& training_years, const std::set<int>& evaluation_years) {
  if (training_years.empty()) {
    throw LeakageError("pretrained model records no training years; leakage cannot be ruled out");
  }
  std::vector<int> leaked;
  for (int y : training_years) {
    if (evaluation_years.count(y)) leaked.push_back(y);
  }
  if (!leaked.empty()) {
    std::string list;
    for (int y : leaked) list += (list.empty() ? "" : ", ") + std::to_string(y);
    throw LeakageError("year leakage: evaluation years present in pretraining data: " + list);
  }
}

const PseudoRealSummary& PseudoRealResults::summary(const std::string& model) const {
  for (const auto& s : summaries) {
    if (s.model == model) return s;
  }
  throw ValidationError("no summary for model " + model);
}

PseudoRealResults run_pseudo_real_experiment(std::span<const tn::Model> pretrained,
                                             std::span<const PseudoObservation> observations,
                                             const PseudoRealConfig& config, const ProgressFn& progress) {
  if (config.seeds.empty()) throw ValidationError("at least one seed is required");
  if (pretrained.empty() || (pretrained.size() != 1 && pretrained.size() != config.seeds.size())) {
    throw ValidationError("need one pretrained model, or one per seed");
  }
  config.finetune.validate();
  config.baseline.validate();

  std::set<int> eval_years;
  std::vector<datagen::Sample> samples;
  std::vector<double> observed;
  for (const auto& o : observations) {
    eval_years.insert(o.sample.meta.year);
    samples.push_back(o.sample);
    observed.push_back(o.sample.target);
  }
  for (const auto& m : pretrained) check_no_year_leakage(m.provenance.training_years, eval_years);

  const auto folds = loocv_splits_by_year(samples);
  const std::size_t n = samples.size();
  const std::size_t n_seeds = config.seeds.size();
  // Out-of-fold predictions [seed][sample]; deterministic models use slot 0.
  std::vector<double> crop(n), lr(n);
  std::vector<std::vector<double>> meta(n_seeds, std::vector<double>(n)), dd(n_seeds, std::vector<double>(n));

  PseudoRealResults results;
  auto fold_row = [&](const std::string& model, const Fold& f, std::uint64_t seed, const std::vector<double>& pred) {
    std::vector<double> p, o;
    for (auto i : f.test) {
      p.push_back(pred[i]);
      o.push_back(observed[i]);
    }
    results.rows.push_back({model, f.test_year, seed, f.test.size(), rmse(p, o), mean_bias(p, o)});
  };

  for (const auto& f : folds) {
    const auto train_set = datagen::take(samples, f.train);
    const auto test_set = datagen::take(samples, f.test);

    for (auto i : f.test) crop[i] = observations[i].crop_model;
    fold_row("crop_model", f, 0, crop);

    std::vector<baselines::LRFeatureRow> rows;
    std::vector<double> y;
    for (auto i : f.train) {
      rows.push_back(observations[i].features);
      y.push_back(observed[i]);
    }
    const auto lr_model = baselines::fit_ols(rows, y);
    for (auto i : f.test) lr[i] = lr_model.predict(observations[i].features);
    fold_row("linear_regression", f, 0, lr);

    for (std::size_t s = 0; s < n_seeds; ++s) {
      const auto seed = config.seeds[s];
      const tn::Model& base = pretrained[pretrained.size() == 1 ? 0 : s];

      auto ft_cfg = config.finetune;
      ft_cfg.seed = derive_seed(seed, {0xf01d, f.test_year});
      const auto ft = trainer::fine_tune(base, train_set, ft_cfg);
      const auto ft_pred = trainer::predict(base.spec, ft.params, ft.normalizer, test_set);
      for (std::size_t k = 0; k < f.test.size(); ++k) meta[s][f.test[k]] = ft_pred[k];
      fold_row("metamodel", f, seed, meta[s]);

      auto dd_cfg = config.baseline;
      dd_cfg.seed = ft_cfg.seed;
      const auto ddr = baselines::build_data_driven_baseline(base.spec, train_set, dd_cfg,
                                                             derive_seed(seed, {0xdd, f.test_year}));
      const auto dd_pred = trainer::predict(base.spec, ddr.params, ddr.normalizer, test_set);
      for (std::size_t k = 0; k < f.test.size(); ++k) dd[s][f.test[k]] = dd_pred[k];
      fold_row("data_driven", f, seed, dd[s]);

      if (progress) {
        progress("fold " + std::to_string(f.test_year) + " seed " + std::to_string(seed) + ": metamodel " +
                 std::to_string(ft.report.epochs_run) + " epochs, data-driven " +
                 std::to_string(ddr.report.epochs_run) + " epochs");
      }
    }
  }

  auto summarize = [&](const std::string& model, const std::vector<std::vector<double>>& per_seed) {
    PseudoRealSummary sum;
    sum.model = model;
    sum.n = n;
    std::vector<double> rm, rr, bb, avg(n, 0.0);
    for (const auto& pred : per_seed) {
      rm.push_back(rmse(pred, observed));
      bb.push_back(mean_bias(pred, observed));
      try {
        rr.push_back(pearson_r(pred, observed));
      } catch (const ValidationError&) {
      }
      for (std::size_t i = 0; i < n; ++i) avg[i] += pred[i] / static_cast<double>(per_seed.size());
    }
    sum.rmse = mean_std(rm);
    sum.bias = mean_std(bb);
    if (!rr.empty()) sum.r = mean_std(rr);
    for (std::size_t i = 0; i < n; ++i) sum.pairs.emplace_back(avg[i], observed[i]);
    results.summaries.push_back(std::move(sum));
  };
  summarize("crop_model", {crop});
  summarize("metamodel", meta);
  summarize("data_driven", dd);
  summarize("linear_regression", {lr});
  return results;
}

}  // namespace agrimeta::evalx
