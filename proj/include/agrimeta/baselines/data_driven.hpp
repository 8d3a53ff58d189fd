#pragma once

#include <cstdint>
#include <span>

#include "agrimeta/datagen/sample.hpp"
#include "agrimeta/tensornet/spec.hpp"
#include "agrimeta/trainer/trainer.hpp"

namespace agrimeta::baselines {

// Same architecture trained from a fresh initialization on the given data only.
// Equivalent to trainer::train(spec, init_parameters(spec, seed), dataset, config).
trainer::TrainResult build_data_driven_baseline(const tensornet::NetworkSpec& spec,
                                                std::span<const datagen::Sample> dataset,
                                                const trainer::TrainConfig& config, std::uint64_t seed);

}  // namespace agrimeta::baselines
