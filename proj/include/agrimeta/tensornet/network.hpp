#pragma once

#include <memory>
#include <span>
#include <vector>

#include "agrimeta/datagen/sample.hpp"
#include "agrimeta/tensornet/parameters.hpp"
#include "agrimeta/tensornet/spec.hpp"

namespace agrimeta::tensornet {

// Views of one example's three input streams; `soil` is ignored when the
// spec excludes the soil stream.
struct NetInput {
  std::span<const double> temporal;
  std::span<const double> scalars;
  std::span<const double> soil;
};

NetInput input_of(const datagen::Sample& sample);

struct LossAndGradient {
  double loss = 0.0;              // mean squared error over the batch
  std::vector<double> gradient;   // same layout as Parameters::values()
};

// Compiled execution plan for a NetworkSpec. Immutable after construction,
// so one instance can serve concurrent forward/backward calls.
class Network {
 public:
  class Workspace;

  explicit Network(NetworkSpec spec);
  ~Network();
  Network(Network&&) noexcept;
  Network& operator=(Network&&) noexcept;
  Network(const Network&);
  Network& operator=(const Network&);

  const NetworkSpec& spec() const;
  std::size_t head_input_size() const;

  double forward(const Parameters& params, const NetInput& input) const;
  std::vector<double> forward_batch(const Parameters& params, std::span<const NetInput> inputs) const;

  // Batch MSE and gradient. Samples run in parallel (OpenMP); per-sample
  // gradients are reduced in index order, so results are independent of the
  // thread count. Frozen layers get their true gradient here; masking is the
  // caller's job.
  LossAndGradient backward(const Parameters& params, std::span<const NetInput> inputs,
                           std::span<const double> targets) const;

  // Single-sample building blocks used by backward().
  double forward(const Parameters& params, const NetInput& input, Workspace& ws) const;
  // Adds scale * d(err^2)/d(theta) into `gradient`; returns err^2.
  double accumulate_gradient(const Parameters& params, const NetInput& input, double target,
                             double scale, std::span<double> gradient, Workspace& ws) const;

  Workspace make_workspace() const;

 private:
  struct Plan;
  void check(const Parameters& params, const NetInput& input) const;
  std::unique_ptr<Plan> plan_;
};

class Network::Workspace {
 public:
  Workspace(Workspace&&) noexcept = default;
  Workspace& operator=(Workspace&&) noexcept = default;

 private:
  friend class Network;
  Workspace() = default;
  // [stream][layer] activations and gradients; stream 3 is the head.
  std::vector<std::vector<std::vector<double>>> act;
  std::vector<std::vector<std::vector<double>>> grad;
};

}  // namespace agrimeta::tensornet
