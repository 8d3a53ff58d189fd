#include "agrimeta/baselines/data_driven.hpp"

#include "agrimeta/tensornet/parameters.hpp"

namespace agrimeta::baselines {

trainer::TrainResult build_data_driven_baseline(const tensornet::NetworkSpec& spec,
                                                std::span<const datagen::Sample> dataset,
                                                const trainer::TrainConfig& config, std::uint64_t seed) {
  return trainer::train(spec, tensornet::init_parameters(spec, seed), dataset, config);
}

}  // namespace agrimeta::baselines
