#include <gtest/gtest.h>
#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>

#include "../support/oracle_net.hpp"
#include "agrimeta/error.hpp"
#include "agrimeta/tensornet/adam.hpp"
#include "agrimeta/tensornet/kernels.hpp"
#include "agrimeta/tensornet/model_io.hpp"
#include "agrimeta/tensornet/network.hpp"
#include "agrimeta/tensornet/reference.hpp"

using namespace agrimeta;
using namespace agrimeta::tensornet;
using agrimeta::testing::finite_difference_check;
using agrimeta::testing::OracleNet;
using agrimeta::testing::random_batch;
using agrimeta::testing::random_mini_spec;
using agrimeta::testing::random_parameters;
namespace fs = std::filesystem;

namespace {

Tensor vec(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({n}, std::move(v));
}

Tensor seq(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor({1, n}, std::move(v));
}

std::vector<double> as_vector(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

fs::path temp_path(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "agrimeta_tensornet_tests";
  fs::create_directories(dir);
  return dir / name;
}

Model random_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Model m;
  m.spec = metamodel_spec(true);
  m.params = random_parameters(m.spec, rng);
  m.params.freeze_all_but_last(2);
  for (std::size_t c = 0; c < datagen::kTemporalChannels; ++c) {
    m.normalizer.temporal_mean[c] = 0.1 * static_cast<double>(c);
    m.normalizer.temporal_std[c] = 1.0 + 0.5 * static_cast<double>(c);
  }
  m.normalizer.target_mean = 40.0;
  m.normalizer.target_std = 8.5;
  m.provenance = {12345, 0.2, {1990, 1991, 2005}};
  return m;
}

}  // namespace

TEST(Conv1d, DeltaKernelSelectsCentre) {
  const auto in = seq({1, 2, 3, 4});
  const Tensor w({1, 1, 3}, {0, 1, 0});
  const auto b = vec({0});
  EXPECT_EQ(as_vector(conv1d_forward(in, w, b)), (std::vector<double>{2, 3}));
  EXPECT_EQ(as_vector(reference::conv1d(in, w, b)), (std::vector<double>{2, 3}));
}

TEST(Conv1d, BoxKernel) {
  const auto in = seq({1, 2, 3, 4});
  const Tensor w({1, 1, 3}, {1, 1, 1});
  EXPECT_EQ(as_vector(conv1d_forward(in, w, vec({0}))), (std::vector<double>{6, 9}));
}

TEST(Conv1d, ZeroWeightsGiveBias) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Tensor in({3, 10});
  for (auto& v : in.data()) v = g(rng);
  const Tensor w({4, 3, 2}, 0.0);
  const auto out = conv1d_forward(in, w, vec({1.5, -2, 0, 7}));
  ASSERT_EQ(out.shape(), (std::vector<std::size_t>{4, 9}));
  for (std::size_t o = 0; o < 4; ++o) {
    for (std::size_t t = 0; t < 9; ++t) EXPECT_EQ(out.at(o, t), (std::vector<double>{1.5, -2, 0, 7})[o]);
  }
}

TEST(Conv1d, MultiChannelMatchesNaiveLoops) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Tensor in({3, 15}), w({5, 3, 4}), b({5});
  for (auto* t : {&in, &w, &b}) {
    for (auto& v : t->data()) v = g(rng);
  }
  const auto out = conv1d_forward(in, w, b);
  for (std::size_t o = 0; o < 5; ++o) {
    for (std::size_t t = 0; t < 12; ++t) {
      double s = b[o];
      for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t j = 0; j < 4; ++j) s += w.at(o, c, j) * in.at(c, t + j);
      }
      EXPECT_NEAR(out.at(o, t), s, 1e-12);
    }
  }
  EXPECT_THROW(conv1d_forward(seq({1, 2}), Tensor({1, 1, 3}, 1.0), vec({0})), ValidationError);
}

TEST(AvgPool, Examples) {
  EXPECT_EQ(as_vector(avgpool1d(seq({1, 3, 5, 7}), 2)), (std::vector<double>{2, 6}));
  EXPECT_EQ(as_vector(avgpool1d(seq({1, 3, 5}), 2)), (std::vector<double>{2}));
  EXPECT_EQ(as_vector(reference::avgpool(seq({1, 3, 5}), 2)), (std::vector<double>{2}));
  const auto c = avgpool1d(Tensor({2, 12}, 4.25), 5);
  for (double v : c.data()) EXPECT_EQ(v, 4.25);
}

TEST(Dense, Examples) {
  const Tensor eye({2, 2}, {1, 0, 0, 1});
  EXPECT_EQ(as_vector(dense_forward(vec({3, -4}), eye, vec({0, 0}))), (std::vector<double>{3, -4}));
  const Tensor w({2, 2}, {1, 2, 3, 4});
  EXPECT_EQ(as_vector(dense_forward(vec({1, 1}), w, vec({0, 1}))), (std::vector<double>{3, 8}));
  EXPECT_EQ(as_vector(reference::dense(vec({1, 1}), w, vec({0, 1}))), (std::vector<double>{3, 8}));
  EXPECT_EQ(as_vector(dense_forward(vec({0, 0}), w, vec({5, 6}))), (std::vector<double>{5, 6}));
}

TEST(Shapes, ShippedHeadInputSizes) {
  EXPECT_EQ(head_input_size(metamodel_spec(true)), 96u);
  EXPECT_EQ(head_input_size(metamodel_spec(false)), 76u);
  EXPECT_NO_THROW(validate(metamodel_spec(true)));
  EXPECT_FALSE(describe(metamodel_spec(true)).empty());
}

TEST(Shapes, InvalidSpecsRejected) {
  auto spec = metamodel_spec(true);
  spec.head.back().relu = true;
  EXPECT_THROW(validate(spec), ValidationError);
  spec = metamodel_spec(true);
  spec.temporal.push_back(LayerSpec::conv(3, 50));
  EXPECT_THROW(validate(spec), ValidationError);
  spec = metamodel_spec(true);
  spec.head.back().units = 2;
  EXPECT_THROW(validate(spec), ValidationError);
}

TEST(Initialization, SeededAndBounded) {
  const auto spec = metamodel_spec(true);
  EXPECT_TRUE(init_parameters(spec, 5) == init_parameters(spec, 5));
  const auto a = init_parameters(spec, 5);
  const auto b = init_parameters(spec, 6);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) differs |= a.values()[i] != b.values()[i];
  EXPECT_TRUE(differs);

  // Scalar stream's first layer is Dense(20 <- 3): fan_in + fan_out = 23.
  const std::size_t layer = 2;
  ASSERT_EQ(a.block(layer).in, 3u);
  ASSERT_EQ(a.block(layer).out, 20u);
  const double bound = std::sqrt(6.0 / 23.0);
  std::size_t sampled = 0;
  double max_abs = 0.0;
  for (std::uint64_t seed = 0; sampled < 10000; ++seed) {
    for (double w : init_parameters(spec, seed).weight(layer)) {
      EXPECT_LE(std::abs(w), bound);
      max_abs = std::max(max_abs, std::abs(w));
      ++sampled;
    }
  }
  EXPECT_GT(max_abs, 0.95 * bound);
  for (std::size_t l = 0; l < a.layer_count(); ++l) {
    for (double v : a.bias(l)) EXPECT_EQ(v, 0.0);
  }
}

TEST(Parameters, FreezeAllButLastTwo) {
  auto p = init_parameters(metamodel_spec(true), 1);
  p.freeze_all_but_last(2);
  const std::size_t n = p.layer_count();
  for (std::size_t l = 0; l < n; ++l) EXPECT_EQ(p.frozen(l), l + 2 < n) << l;
  EXPECT_EQ(p.block(n - 2).out, 5u);
  EXPECT_EQ(p.block(n - 1).out, 1u);
  std::vector<double> g(p.size(), 1.0);
  mask_frozen(p, g);
  for (std::size_t i = 0; i < p.block(n - 2).weight_offset; ++i) EXPECT_EQ(g[i], 0.0);
  EXPECT_EQ(g.back(), 1.0);
  p.unfreeze_all();
  for (std::size_t l = 0; l < n; ++l) EXPECT_FALSE(p.frozen(l));
}

TEST(Backward, PerfectPredictionGivesZeroLossAndHeadBiasGradient) {
  std::mt19937_64 rng(3);
  const auto spec = random_mini_spec(rng);
  const auto params = random_parameters(spec, rng);
  auto batch = random_batch(spec, 6, rng);
  const Network net(spec);
  batch.targets = net.forward_batch(params, batch.inputs);
  const auto lg = net.backward(params, batch.inputs, batch.targets);
  EXPECT_EQ(lg.loss, 0.0);
  EXPECT_EQ(lg.gradient.back(), 0.0);  // the output layer's bias is the last parameter
}

TEST(Backward, MetamodelMatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  const auto spec = metamodel_spec(true);
  const auto params = random_parameters(spec, rng);
  const auto batch = random_batch(spec, 4, rng);
  const auto lg = Network(spec).backward(params, batch.inputs, batch.targets);
  const auto r = finite_difference_check(spec, params, batch, lg.gradient);
  EXPECT_LT(r.max_rel_error, 1e-4);
  EXPECT_GT(r.checked, 9 * r.skipped);
}

TEST(Backward, RandomMiniSpecsMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const auto spec = random_mini_spec(rng);
    const auto params = random_parameters(spec, rng);
    const auto batch = random_batch(spec, 4, rng);
    const auto lg = Network(spec).backward(params, batch.inputs, batch.targets);
    const auto r = finite_difference_check(spec, params, batch, lg.gradient);
    EXPECT_LT(r.max_rel_error, 1e-4) << describe(spec);
    EXPECT_GT(r.checked, 0u);
  }
}

TEST(Backward, DuplicatedBatchLeavesLossAndGradientUnchanged) {
  std::mt19937_64 rng(6);
  const auto spec = random_mini_spec(rng);
  const auto params = random_parameters(spec, rng);
  const auto batch = random_batch(spec, 5, rng);
  auto inputs = batch.inputs;
  auto targets = batch.targets;
  inputs.insert(inputs.end(), batch.inputs.begin(), batch.inputs.end());
  targets.insert(targets.end(), batch.targets.begin(), batch.targets.end());
  const Network net(spec);
  const auto a = net.backward(params, batch.inputs, batch.targets);
  const auto b = net.backward(params, inputs, targets);
  EXPECT_NEAR(a.loss, b.loss, 1e-12 * std::abs(a.loss));
  for (std::size_t i = 0; i < a.gradient.size(); ++i) {
    EXPECT_NEAR(a.gradient[i], b.gradient[i], 1e-12 * (1.0 + std::abs(a.gradient[i])));
  }
}

TEST(Reference, MatchesProductionPath) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 8; ++k) {
    const auto spec = k == 0 ? metamodel_spec(true) : random_mini_spec(rng);
    const auto params = random_parameters(spec, rng);
    const auto batch = random_batch(spec, 5, rng);
    const Network net(spec);
    const auto oracle = OracleNet(spec, params).evaluate(batch.inputs, batch.targets);
    for (std::size_t i = 0; i < batch.inputs.size(); ++i) {
      const double prod = net.forward(params, batch.inputs[i]);
      const double ref = reference::forward(spec, params, batch.inputs[i]);
      EXPECT_NEAR(prod, ref, 1e-12 * (1.0 + std::abs(ref)));
      EXPECT_NEAR(prod, oracle.outputs[i], 1e-12 * (1.0 + std::abs(ref)));
    }
    const auto a = net.backward(params, batch.inputs, batch.targets);
    const auto b = reference::backward(spec, params, batch.inputs, batch.targets);
    EXPECT_NEAR(a.loss, b.loss, 1e-12 * (1.0 + b.loss));
    ASSERT_EQ(a.gradient.size(), b.gradient.size());
    for (std::size_t i = 0; i < a.gradient.size(); ++i) {
      EXPECT_NEAR(a.gradient[i], b.gradient[i], 1e-10 * (1.0 + std::abs(b.gradient[i])));
    }
  }
}

TEST(Parallel, ThreadCountDoesNotChangeResults) {
  std::mt19937_64 rng(8);
  const auto spec = metamodel_spec(true);
  const auto params = random_parameters(spec, rng);
  const auto batch = random_batch(spec, 32, rng);
  const Network net(spec);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto serial = net.backward(params, batch.inputs, batch.targets);
  omp_set_num_threads(4);
  const auto parallel = net.backward(params, batch.inputs, batch.targets);
  omp_set_num_threads(saved);
  EXPECT_EQ(serial.loss, parallel.loss);
  EXPECT_EQ(serial.gradient, parallel.gradient);
}

TEST(Network, RejectsMismatchedInputs) {
  std::mt19937_64 rng(9);
  const auto spec = metamodel_spec(true);
  const auto params = init_parameters(spec, 1);
  std::vector<double> short_temporal(10), scalars(3), soil(840);
  const Network net(spec);
  EXPECT_THROW(net.forward(params, NetInput{short_temporal, scalars, soil}), ValidationError);
  const auto other = init_parameters(metamodel_spec(false), 1);
  const auto batch = random_batch(spec, 1, rng);
  EXPECT_THROW(net.forward(other, batch.inputs[0]), ValidationError);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  auto p = init_parameters(metamodel_spec(false), 2);
  const auto before = p;
  auto state = AdamState::for_parameters(p);
  std::vector<double> g(p.size(), 0.0);
  adam_step(p, g, state);
  EXPECT_TRUE(p == before);
}

TEST(Adam, FirstStepMatchesReferenceFormula) {
  NetworkSpec spec;
  spec.temporal_input = {1, 1};
  spec.scalar_input = {1, 1};
  spec.use_soil = false;
  spec.head = {LayerSpec::dense(1, false)};
  Parameters p(spec);
  ASSERT_EQ(p.size(), 3u);
  for (auto& v : p.values()) v = 0.0;
  auto state = AdamState::for_parameters(p, 0.001);
  std::vector<double> g{1.0, 0.0, 0.0};
  adam_step(p, g, state);
  // m_hat = 1, v_hat = 1 after bias correction.
  const double expected = -0.001 * 1.0 / (1.0 + 1e-8);
  EXPECT_NEAR(p.values()[0], expected, 1e-15);
  EXPECT_NEAR(p.values()[0], -0.000999999990, 1e-12);
  EXPECT_EQ(p.values()[1], 0.0);

  // Second step against an independent replay of the update rule.
  double m = 0.1, v = 0.001, theta = p.values()[0];
  const double g2 = -0.5;
  m = 0.9 * m + 0.1 * g2;
  v = 0.999 * v + 0.001 * g2 * g2;
  theta -= 0.001 * (m / (1 - 0.81)) / (std::sqrt(v / (1 - 0.999 * 0.999)) + 1e-8);
  g = {g2, 0.0, 0.0};
  adam_step(p, g, state);
  EXPECT_NEAR(p.values()[0], theta, 1e-15);
}

TEST(Adam, FrozenLayersBitIdenticalAfterManySteps) {
  std::mt19937_64 rng(10);
  auto p = init_parameters(metamodel_spec(true), 3);
  p.freeze_all_but_last(2);
  const auto before = p;
  auto state = AdamState::for_parameters(p);
  std::normal_distribution<double> n;
  for (int step = 0; step < 100; ++step) {
    std::vector<double> g(p.size());
    for (auto& x : g) x = n(rng);
    adam_step(p, g, state);
  }
  const std::size_t layers = p.layer_count();
  for (std::size_t l = 0; l + 2 < layers; ++l) {
    std::span<const double> w0 = before.weight(l), w1 = p.weight(l);
    EXPECT_TRUE(std::equal(w0.begin(), w0.end(), w1.begin()));
    std::span<const double> b0 = before.bias(l), b1 = p.bias(l);
    EXPECT_TRUE(std::equal(b0.begin(), b0.end(), b1.begin()));
  }
  std::span<const double> last0 = before.weight(layers - 1), last1 = p.weight(layers - 1);
  EXPECT_FALSE(std::equal(last0.begin(), last0.end(), last1.begin()));
  std::vector<double> wrong(p.size() - 1);
  EXPECT_THROW(adam_step(p, wrong, state), ValidationError);
}

TEST(Determinism, FixedSeedAndOrderGiveIdenticalParameters) {
  const auto run = [] {
    std::mt19937_64 rng(11);
    const auto spec = random_mini_spec(rng);
    auto p = init_parameters(spec, 4);
    const auto batch = random_batch(spec, 8, rng);
    auto state = AdamState::for_parameters(p, 0.01);
    const Network net(spec);
    for (int i = 0; i < 25; ++i) adam_step(p, net.backward(p, batch.inputs, batch.targets).gradient, state);
    return p;
  };
  EXPECT_TRUE(run() == run());
}

TEST(ModelIo, RoundTripGivesBitIdenticalPredictions) {
  const auto m = random_model(12);
  const auto path = temp_path("model.agmm");
  save_model(path, m);
  const auto back = load_model(path);
  EXPECT_EQ(back.spec, m.spec);
  EXPECT_TRUE(back.params == m.params);
  EXPECT_EQ(back.normalizer, m.normalizer);
  EXPECT_EQ(back.provenance, m.provenance);
  std::mt19937_64 rng(13);
  const auto batch = random_batch(m.spec, 100, rng);
  const Network net(m.spec);
  for (const auto& in : batch.inputs) EXPECT_EQ(net.forward(m.params, in), net.forward(back.params, in));
  EXPECT_EQ(serialize_model(back), serialize_model(m));
}

TEST(ModelIo, NoSoilSpecRoundTrips) {
  auto m = random_model(14);
  std::mt19937_64 rng(1);
  m.spec = metamodel_spec(false);
  m.params = random_parameters(m.spec, rng);
  const auto back = deserialize_model(serialize_model(m));
  EXPECT_FALSE(back.spec.use_soil);
  EXPECT_TRUE(back.params == m.params);
}

TEST(ModelIo, TruncationIsDetected) {
  const auto bytes = serialize_model(random_model(15));
  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    std::vector<unsigned char> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(deserialize_model(part), FileIntegrityError) << cut;
  }
  const auto path = temp_path("truncated.agmm");
  std::ofstream(path, std::ios::binary).write(reinterpret_cast<const char*>(bytes.data()), 200);
  EXPECT_THROW(load_model(path), FileIntegrityError);
}

TEST(ModelIo, FlippedByteFailsChecksum) {
  auto bytes = serialize_model(random_model(16));
  bytes[bytes.size() / 2] ^= 0x40;
  try {
    deserialize_model(bytes);
    FAIL() << "expected an integrity error";
  } catch (const FileIntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos) << e.what();
  }
}

TEST(ModelIo, UnsupportedVersionIsExplicit) {
  auto bytes = serialize_model(random_model(17));
  bytes[4] = static_cast<unsigned char>(kModelVersion + 1);
  try {
    deserialize_model(bytes);
    FAIL() << "expected an integrity error";
  } catch (const FileIntegrityError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos) << e.what();
  }
  bytes = serialize_model(random_model(17));
  bytes[0] = 'Z';
  EXPECT_THROW(deserialize_model(bytes), FileIntegrityError);
  auto extra = serialize_model(random_model(17));
  extra.push_back(0);
  EXPECT_THROW(deserialize_model(extra), FileIntegrityError);
}
