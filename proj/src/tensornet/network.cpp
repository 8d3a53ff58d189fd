#include "agrimeta/tensornet/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>

#include "agrimeta/error.hpp"
#include "agrimeta/tensornet/kernels.hpp"

namespace agrimeta::tensornet {

NetInput input_of(const datagen::Sample& sample) {
  return {sample.temporal, sample.scalars, sample.soil};
}

namespace {

constexpr std::size_t kTemporal = 0, kScalar = 1, kSoil = 2, kHead = 3;

struct StreamPlan {
  std::vector<LayerSpec> layers;
  std::vector<Shape> shapes;  // shapes[i] feeds layer i; shapes.back() is the output
  std::vector<int> block;     // parameter block per layer, -1 for pooling
};

}  // namespace

struct Network::Plan {
  NetworkSpec spec;
  std::array<StreamPlan, 4> streams;
  std::array<std::size_t, 3> concat_offset{};
  std::size_t head_in = 0;
  std::vector<ParamBlock> blocks;
  std::size_t param_total = 0;
};

Network::Network(NetworkSpec spec) : plan_(std::make_unique<Plan>()) {
  validate(spec);
  const Parameters layout(spec);
  plan_->blocks = layout.blocks();
  plan_->param_total = layout.size();
  int next_block = 0;
  const auto build = [&](StreamPlan& sp, Shape in, const std::vector<LayerSpec>& layers) {
    sp.layers = layers;
    sp.shapes.push_back(in);
    for (const auto& l : layers) {
      in = output_shape(in, l);
      sp.shapes.push_back(in);
      sp.block.push_back(l.has_parameters() ? next_block++ : -1);
    }
  };
  build(plan_->streams[kTemporal], spec.temporal_input, spec.temporal);
  build(plan_->streams[kScalar], spec.scalar_input, spec.scalar);
  if (spec.use_soil) build(plan_->streams[kSoil], spec.soil_input, spec.soil);
  std::size_t offset = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    plan_->concat_offset[s] = offset;
    if (s == kSoil && !spec.use_soil) continue;
    offset += plan_->streams[s].shapes.back().size();
  }
  plan_->head_in = offset;
  build(plan_->streams[kHead], Shape{offset, 1}, spec.head);
  plan_->spec = std::move(spec);
}

Network::~Network() = default;
Network::Network(Network&&) noexcept = default;
Network& Network::operator=(Network&&) noexcept = default;
Network::Network(const Network& other) : plan_(std::make_unique<Plan>(*other.plan_)) {}
Network& Network::operator=(const Network& other) {
  if (this != &other) plan_ = std::make_unique<Plan>(*other.plan_);
  return *this;
}

const NetworkSpec& Network::spec() const { return plan_->spec; }
std::size_t Network::head_input_size() const { return plan_->head_in; }

Network::Workspace Network::make_workspace() const {
  Workspace ws;
  ws.act.resize(4);
  ws.grad.resize(4);
  for (std::size_t s = 0; s < 4; ++s) {
    const auto& shapes = plan_->streams[s].shapes;
    for (const auto& shape : shapes) {
      ws.act[s].emplace_back(shape.size());
      ws.grad[s].emplace_back(shape.size());
    }
  }
  return ws;
}

void Network::check(const Parameters& params, const NetInput& input) const {
  const auto& spec = plan_->spec;
  if (params.size() != plan_->param_total || params.layer_count() != plan_->blocks.size()) {
    throw ValidationError("parameters do not match network spec");
  }
  if (input.temporal.size() != spec.temporal_input.size() ||
      input.scalars.size() != spec.scalar_input.size()) {
    throw ValidationError("input shape does not match network spec");
  }
  if (spec.use_soil && input.soil.size() != spec.soil_input.size()) {
    throw ValidationError("soil input missing or mis-shaped for a network with a soil stream");
  }
}

namespace {

void forward_stream(const StreamPlan& sp, const Parameters& params, std::span<const double> input,
                    std::vector<std::vector<double>>& act) {
  std::span<const double> cur = input;
  for (std::size_t i = 0; i < sp.layers.size(); ++i) {
    const auto& l = sp.layers[i];
    const Shape in = sp.shapes[i];
    std::span<double> out = act[i + 1];
    switch (l.kind) {
      case LayerKind::Conv1D: {
        const auto b = static_cast<std::size_t>(sp.block[i]);
        kernels::conv1d_forward(cur, in.channels, in.length, params.weight(b), params.bias(b),
                                l.units, l.kernel, out);
        break;
      }
      case LayerKind::AvgPool:
        kernels::avgpool_forward(cur, in.channels, in.length, l.kernel, out);
        break;
      case LayerKind::Dense: {
        const auto b = static_cast<std::size_t>(sp.block[i]);
        kernels::dense_forward(cur, in.size(), params.weight(b), params.bias(b), l.units, out);
        break;
      }
    }
    if (l.relu) kernels::relu_forward(out);
    cur = out;
  }
}

// Expects grad.back() = dL/d(stream output). When `want_input` is false the
// gradient with respect to the raw input is not formed.
void backward_stream(const StreamPlan& sp, const Parameters& params, std::span<const double> input,
                     std::vector<std::vector<double>>& act, std::vector<std::vector<double>>& grad,
                     std::span<double> gradient, bool want_input) {
  for (std::size_t i = sp.layers.size(); i-- > 0;) {
    const auto& l = sp.layers[i];
    const Shape in = sp.shapes[i];
    std::span<double> gout = grad[i + 1];
    if (l.relu) kernels::relu_backward(act[i + 1], gout);
    const std::span<const double> x = i == 0 ? input : std::span<const double>(act[i]);
    const std::span<double> gin = (i == 0 && !want_input) ? std::span<double>() : std::span<double>(grad[i]);
    switch (l.kind) {
      case LayerKind::Conv1D: {
        const auto& b = params.block(static_cast<std::size_t>(sp.block[i]));
        kernels::conv1d_backward(x, in.channels, in.length, params.weight(static_cast<std::size_t>(sp.block[i])),
                                 l.units, l.kernel, gout, gradient.subspan(b.weight_offset, b.weight_size()),
                                 gradient.subspan(b.bias_offset, b.bias_size()), gin);
        break;
      }
      case LayerKind::AvgPool:
        if (!gin.empty()) kernels::avgpool_backward(gout, in.channels, in.length, l.kernel, gin);
        break;
      case LayerKind::Dense: {
        const auto& b = params.block(static_cast<std::size_t>(sp.block[i]));
        kernels::dense_backward(x, in.size(), params.weight(static_cast<std::size_t>(sp.block[i])), l.units,
                                gout, gradient.subspan(b.weight_offset, b.weight_size()),
                                gradient.subspan(b.bias_offset, b.bias_size()), gin);
        break;
      }
    }
  }
}

std::span<const double> stream_result(const StreamPlan& sp, std::span<const double> input,
                                      const std::vector<std::vector<double>>& act) {
  return sp.layers.empty() ? input : std::span<const double>(act.back());
}

}  // namespace

double Network::forward(const Parameters& params, const NetInput& input, Workspace& ws) const {
  const auto& p = *plan_;
  const std::array<std::span<const double>, 3> inputs = {input.temporal, input.scalars, input.soil};
  auto& concat = ws.act[kHead][0];
  for (std::size_t s = 0; s < 3; ++s) {
    if (s == kSoil && !p.spec.use_soil) continue;
    forward_stream(p.streams[s], params, inputs[s], ws.act[s]);
    const auto out = stream_result(p.streams[s], inputs[s], ws.act[s]);
    std::copy(out.begin(), out.end(), concat.begin() + static_cast<std::ptrdiff_t>(p.concat_offset[s]));
  }
  forward_stream(p.streams[kHead], params, concat, ws.act[kHead]);
  const double pred = ws.act[kHead].back()[0];
  if (!std::isfinite(pred)) throw NumericalFault("non-finite network output");
  return pred;
}

double Network::accumulate_gradient(const Parameters& params, const NetInput& input, double target,
                                    double scale, std::span<double> gradient, Workspace& ws) const {
  const auto& p = *plan_;
  const double err = forward(params, input, ws) - target;
  ws.grad[kHead].back()[0] = 2.0 * err * scale;
  const auto& concat = ws.act[kHead][0];
  backward_stream(p.streams[kHead], params, concat, ws.act[kHead], ws.grad[kHead], gradient, true);
  const auto& gconcat = ws.grad[kHead][0];
  const std::array<std::span<const double>, 3> inputs = {input.temporal, input.scalars, input.soil};
  for (std::size_t s = 0; s < 3; ++s) {
    if (s == kSoil && !p.spec.use_soil) continue;
    const auto& sp = p.streams[s];
    if (sp.layers.empty()) continue;
    auto& gout = ws.grad[s].back();
    std::copy_n(gconcat.begin() + static_cast<std::ptrdiff_t>(p.concat_offset[s]), gout.size(), gout.begin());
    backward_stream(sp, params, inputs[s], ws.act[s], ws.grad[s], gradient, false);
  }
  return err * err;
}

double Network::forward(const Parameters& params, const NetInput& input) const {
  check(params, input);
  auto ws = make_workspace();
  return forward(params, input, ws);
}

std::vector<double> Network::forward_batch(const Parameters& params, std::span<const NetInput> inputs) const {
  for (const auto& x : inputs) check(params, x);
  std::vector<double> out(inputs.size());
  const auto n = static_cast<std::ptrdiff_t>(inputs.size());
  bool fault = false;
#pragma omp parallel
  {
    auto ws = make_workspace();
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        out[static_cast<std::size_t>(i)] = forward(params, inputs[static_cast<std::size_t>(i)], ws);
      } catch (const NumericalFault&) {
#pragma omp atomic write
        fault = true;
      }
    }
  }
  if (fault) throw NumericalFault("non-finite network output in batch");
  return out;
}

LossAndGradient Network::backward(const Parameters& params, std::span<const NetInput> inputs,
                                  std::span<const double> targets) const {
  if (inputs.empty() || inputs.size() != targets.size()) {
    throw ValidationError("backward needs a non-empty batch with one target per input");
  }
  for (const auto& x : inputs) check(params, x);
  const std::size_t batch = inputs.size();
  const std::size_t width = plan_->param_total;
  const double scale = 1.0 / static_cast<double>(batch);
  std::vector<double> slots(batch * width, 0.0);
  std::vector<double> losses(batch, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(batch);
  bool fault = false;
#pragma omp parallel
  {
    auto ws = make_workspace();
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      try {
        losses[k] = accumulate_gradient(params, inputs[k], targets[k], scale,
                                        std::span<double>(slots).subspan(k * width, width), ws);
      } catch (const NumericalFault&) {
#pragma omp atomic write
        fault = true;
      }
    }
  }
  if (fault) throw NumericalFault("non-finite network output in batch");

  LossAndGradient result;
  result.gradient.assign(width, 0.0);
  for (std::size_t k = 0; k < batch; ++k) {
    const double* slot = slots.data() + k * width;
    for (std::size_t j = 0; j < width; ++j) result.gradient[j] += slot[j];
    result.loss += losses[k];
  }
  result.loss *= scale;
  if (!std::isfinite(result.loss)) throw NumericalFault("non-finite loss");
  for (double g : result.gradient) {
    if (!std::isfinite(g)) throw NumericalFault("non-finite gradient");
  }
  return result;
}

}  // namespace agrimeta::tensornet
