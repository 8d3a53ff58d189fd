#include "agrimeta/tensornet/reference.hpp"

#include <vector>

#include "agrimeta/error.hpp"

namespace agrimeta::tensornet::reference {

Tensor conv1d(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  const std::size_t cin = input.dim(0), len = input.dim(1);
  const std::size_t cout = weights.dim(0), k = weights.dim(2);
  Tensor out({cout, len - k + 1});
  for (std::size_t c = 0; c < cout; ++c) {
    for (std::size_t i = 0; i + k <= len; ++i) {
      double sum = bias[c];
      for (std::size_t d = 0; d < cin; ++d) {
        for (std::size_t j = 0; j < k; ++j) sum += weights.at(c, d, j) * input.at(d, i + j);
      }
      out.at(c, i) = sum;
    }
  }
  return out;
}

Tensor avgpool(const Tensor& input, std::size_t window) {
  const std::size_t channels = input.dim(0), lout = input.dim(1) / window;
  Tensor out({channels, lout});
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t o = 0; o < lout; ++o) {
      double sum = 0.0;
      for (std::size_t r = 0; r < window; ++r) sum += input.at(c, o * window + r);
      out.at(c, o) = sum / static_cast<double>(window);
    }
  }
  return out;
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  const std::size_t m = weights.dim(0), n = weights.dim(1);
  Tensor out({m, 1});
  for (std::size_t r = 0; r < m; ++r) {
    double sum = bias[r];
    for (std::size_t i = 0; i < n; ++i) sum += weights.at(r, i) * input[i];
    out[r] = sum;
  }
  return out;
}

namespace {

struct LayerRef {
  LayerSpec spec;
  int block;  // -1 for pooling
};

// One stream evaluated layer by layer, keeping every intermediate tensor
// (post-activation) for the backward sweep.
struct Trace {
  std::vector<LayerRef> layers;
  std::vector<Tensor> values;  // values[0] = input, values[i+1] = output of layer i
};

Tensor weight_tensor(const Parameters& p, std::size_t b) {
  const auto& blk = p.block(b);
  const auto w = p.weight(b);
  std::vector<double> data(w.begin(), w.end());
  if (blk.kind == LayerKind::Conv1D) return Tensor({blk.out, blk.in, blk.kernel}, std::move(data));
  return Tensor({blk.out, blk.in}, std::move(data));
}

Tensor bias_tensor(const Parameters& p, std::size_t b) {
  const auto bias = p.bias(b);
  return Tensor({bias.size()}, std::vector<double>(bias.begin(), bias.end()));
}

Trace run_stream(const std::vector<LayerSpec>& layers, Shape shape, std::span<const double> input,
                 const Parameters& params, int& next_block) {
  Trace tr;
  tr.values.emplace_back(std::vector<std::size_t>{shape.channels, shape.length},
                         std::vector<double>(input.begin(), input.end()));
  for (const auto& l : layers) {
    const int b = l.has_parameters() ? next_block++ : -1;
    tr.layers.push_back({l, b});
    const Tensor& x = tr.values.back();
    Tensor y;
    if (l.kind == LayerKind::Conv1D) {
      y = conv1d(x, weight_tensor(params, static_cast<std::size_t>(b)), bias_tensor(params, static_cast<std::size_t>(b)));
    } else if (l.kind == LayerKind::AvgPool) {
      y = avgpool(x, l.kernel);
    } else {
      y = dense(x, weight_tensor(params, static_cast<std::size_t>(b)), bias_tensor(params, static_cast<std::size_t>(b)));
    }
    if (l.relu) {
      for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
    }
    tr.values.push_back(std::move(y));
  }
  return tr;
}

// Gradient of the loss w.r.t. every parameter of the stream, given
// dL/d(output). Returns dL/d(input).
Tensor back_stream(const Trace& tr, const Parameters& params, Tensor grad_out, std::vector<double>& gradient) {
  for (std::size_t i = tr.layers.size(); i-- > 0;) {
    const auto& l = tr.layers[i].spec;
    const Tensor& x = tr.values[i];
    const Tensor& y = tr.values[i + 1];
    if (l.relu) {
      for (std::size_t e = 0; e < grad_out.size(); ++e) {
        if (!(y[e] > 0.0)) grad_out[e] = 0.0;
      }
    }
    Tensor grad_in(x.shape());
    if (l.kind == LayerKind::Conv1D) {
      const auto blk = params.block(static_cast<std::size_t>(tr.layers[i].block));
      const Tensor w = weight_tensor(params, static_cast<std::size_t>(tr.layers[i].block));
      const std::size_t lout = y.dim(1);
      for (std::size_t c = 0; c < blk.out; ++c) {
        for (std::size_t t = 0; t < lout; ++t) {
          const double g = grad_out.at(c, t);
          gradient[blk.bias_offset + c] += g;
          for (std::size_t d = 0; d < blk.in; ++d) {
            for (std::size_t j = 0; j < blk.kernel; ++j) {
              gradient[blk.weight_offset + (c * blk.in + d) * blk.kernel + j] += g * x.at(d, t + j);
              grad_in.at(d, t + j) += g * w.at(c, d, j);
            }
          }
        }
      }
    } else if (l.kind == LayerKind::AvgPool) {
      const std::size_t lout = y.dim(1);
      for (std::size_t c = 0; c < y.dim(0); ++c) {
        for (std::size_t o = 0; o < lout; ++o) {
          for (std::size_t r = 0; r < l.kernel; ++r) {
            grad_in.at(c, o * l.kernel + r) = grad_out.at(c, o) / static_cast<double>(l.kernel);
          }
        }
      }
    } else {
      const auto blk = params.block(static_cast<std::size_t>(tr.layers[i].block));
      const Tensor w = weight_tensor(params, static_cast<std::size_t>(tr.layers[i].block));
      for (std::size_t r = 0; r < blk.out; ++r) {
        gradient[blk.bias_offset + r] += grad_out[r];
        for (std::size_t e = 0; e < blk.in; ++e) {
          gradient[blk.weight_offset + r * blk.in + e] += grad_out[r] * x[e];
          grad_in[e] += grad_out[r] * w.at(r, e);
        }
      }
    }
    grad_out = std::move(grad_in);
  }
  return grad_out;
}

struct FullTrace {
  std::vector<Trace> streams;
  Trace head;
  double prediction = 0.0;
};

FullTrace run(const NetworkSpec& spec, const Parameters& params, const NetInput& input) {
  if (input.temporal.size() != spec.temporal_input.size() || input.scalars.size() != spec.scalar_input.size() ||
      (spec.use_soil && input.soil.size() != spec.soil_input.size())) {
    throw ValidationError("reference: input shape mismatch");
  }
  FullTrace ft;
  int next_block = 0;
  ft.streams.push_back(run_stream(spec.temporal, spec.temporal_input, input.temporal, params, next_block));
  ft.streams.push_back(run_stream(spec.scalar, spec.scalar_input, input.scalars, params, next_block));
  if (spec.use_soil) ft.streams.push_back(run_stream(spec.soil, spec.soil_input, input.soil, params, next_block));
  std::vector<double> concat;
  for (const auto& s : ft.streams) {
    const auto v = s.values.back().data();
    concat.insert(concat.end(), v.begin(), v.end());
  }
  ft.head = run_stream(spec.head, Shape{concat.size(), 1}, concat, params, next_block);
  ft.prediction = ft.head.values.back()[0];
  return ft;
}

}  // namespace

double forward(const NetworkSpec& spec, const Parameters& params, const NetInput& input) {
  return run(spec, params, input).prediction;
}

LossAndGradient backward(const NetworkSpec& spec, const Parameters& params,
                         std::span<const NetInput> inputs, std::span<const double> targets) {
  LossAndGradient result;
  result.gradient.assign(params.size(), 0.0);
  const double n = static_cast<double>(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const FullTrace ft = run(spec, params, inputs[k]);
    const double err = ft.prediction - targets[k];
    result.loss += err * err / n;
    Tensor g({1, 1}, std::vector<double>{2.0 * err / n});
    const Tensor g_concat = back_stream(ft.head, params, g, result.gradient);
    std::size_t offset = 0;
    for (const auto& s : ft.streams) {
      const std::size_t width = s.values.back().size();
      const auto& out_shape = s.values.back().shape();
      std::vector<double> part(g_concat.data().begin() + static_cast<std::ptrdiff_t>(offset),
                               g_concat.data().begin() + static_cast<std::ptrdiff_t>(offset + width));
      back_stream(s, params, Tensor(out_shape, std::move(part)), result.gradient);
      offset += width;
    }
  }
  return result;
}

}  // namespace agrimeta::tensornet::reference
