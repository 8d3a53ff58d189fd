#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "agrimeta/baselines/linear_regression.hpp"
#include "agrimeta/cropsim/simulator.hpp"
#include "agrimeta/datagen/dataset.hpp"
#include "agrimeta/evalx/metrics.hpp"
#include "agrimeta/evalx/transfer_experiment.hpp"
#include "agrimeta/tensornet/model_io.hpp"
#include "agrimeta/trainer/trainer.hpp"

namespace agrimeta::evalx {

// Field-trial stand-in: observations come from a simulator whose parameters
// differ from the shipped ones, with multiplicative lognormal noise.
struct PseudoDataConfig {
  std::vector<int> years{1994, 1995, 1996, 1997, 1998, 1999, 2000, 2001, 2002, 2003};
  std::size_t records_per_year = 30;
  std::uint64_t seed = 0;
  double rue_factor = 0.85;
  double mineralization_factor = 1.30;
  double dry_matter_fraction = 0.24;
  double noise_sigma = 0.08;
  cropsim::CropParameters crop_model{};  // the simulator being evaluated

  cropsim::CropParameters truth() const;
};

struct PseudoObservation {
  datagen::Sample sample;     // target = observed fresh yield
  double crop_model = 0.0;    // direct prediction of the unperturbed simulator
  baselines::LRFeatureRow features;
  cropsim::ManagementPlan mgmt;
};

// Practice-like management: sowing DOY 105-125, two N dressings totalling
// 120-240 kg/ha, a fixed three-gift irrigation schedule on 40% of fields.
cropsim::ManagementPlan standardized_management(std::uint64_t rng_seed);

std::vector<PseudoObservation> generate_pseudo_observations(const datagen::WeatherStore& weather,
                                                            const datagen::SoilLibrary& soils,
                                                            const PseudoDataConfig& config);

// Throws LeakageError when any evaluation year appears among the training
// years, or when the training years are unknown.
void check_no_year_leakage(const std::vector<int>& training_years, const std::set<int>& evaluation_years);

struct PseudoRealConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  trainer::TrainConfig finetune;
  trainer::TrainConfig baseline;
};

inline const std::vector<std::string> kPseudoRealModels = {"crop_model", "metamodel", "data_driven",
                                                           "linear_regression"};

struct PseudoRealRow {
  std::string model;
  int fold_year = 0;
  std::uint64_t seed = 0;  // 0 for models without training randomness
  std::size_t n = 0;
  double rmse = 0.0;
  double mean_bias = 0.0;
};

struct PseudoRealSummary {
  std::string model;
  MeanStd rmse;   // over seeds, each computed on pooled out-of-fold predictions
  MeanStd r;
  MeanStd bias;
  std::size_t n = 0;
  std::vector<std::pair<double, double>> pairs;  // seed-averaged (prediction, observation)
};

struct PseudoRealResults {
  std::vector<PseudoRealRow> rows;
  std::vector<PseudoRealSummary> summaries;

  const PseudoRealSummary& summary(const std::string& model) const;
};

// Leave-one-year-out over the observations. `pretrained` holds one model per
// seed, or a single model shared by all seeds.
PseudoRealResults run_pseudo_real_experiment(std::span<const tensornet::Model> pretrained,
                                             std::span<const PseudoObservation> observations,
                                             const PseudoRealConfig& config, const ProgressFn& progress = {});

}  // namespace agrimeta::evalx
