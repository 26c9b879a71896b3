#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "snn/error.hpp"
#include "snn/stdp.hpp"
#include "snn/supervised.hpp"

using namespace snn;
namespace fx = snn::fixtures;

namespace {

SpikeField spikes_at(int neurons, TimeUnit duration, std::vector<std::pair<int, TimeUnit>> events) {
  SpikeField f(neurons, duration);
  for (auto [i, t] : events) f[i].set(t);
  return f;
}

}  // namespace

TEST(ResponseKernel, CausalExponential) {
  const ResponseKernel g{10.0};
  EXPECT_DOUBLE_EQ(g(0.0), 1.0);
  EXPECT_DOUBLE_EQ(g(-1.0), 0.0);
  EXPECT_NEAR(g(10.0), std::exp(-1.0), 1e-15);
  EXPECT_THROW(ResponseKernel{0.0}.validate(), ConfigError);
}

TEST(PotentialTrace, SingleSpike) {
  const ResponseKernel g{10.0};
  Matrix w(1, 1);
  w << 0.7;
  const Matrix p = potential_trace(w, spikes_at(1, 20, {{0, 5}}), g);
  for (TimeUnit t = 0; t <= 20; ++t) EXPECT_NEAR(p(0, t), t < 5 ? 0.0 : 0.7 * g(t - 5), 1e-12);
}

TEST(PotentialTrace, Superposition) {
  const ResponseKernel g{7.0};
  Matrix w(2, 2);
  w << 0.3, -1.1, 0.9, 0.4;
  const auto a = spikes_at(2, 30, {{0, 3}});
  const auto b = spikes_at(2, 30, {{1, 11}});
  const auto ab = spikes_at(2, 30, {{0, 3}, {1, 11}});
  EXPECT_TRUE(potential_trace(w, ab, g).isApprox(potential_trace(w, a, g) + potential_trace(w, b, g)));
  EXPECT_TRUE(potential_trace(Matrix::Zero(2, 2), ab, g).isZero());
}

TEST(PotentialTrace, MatchesDirectSummation) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 20; ++k) {
    const auto c = fx::random_gradient_case(rng);
    const Matrix p = potential_trace(c.weights, c.pre, ResponseKernel{10.0});
    EXPECT_LT((p - fx::reference_trace(c.weights, c.pre, 10.0)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(HuberLoss, Branches) {
  Matrix a(1, 1), y(1, 1);
  a << 0.5;
  y << 0.0;
  EXPECT_DOUBLE_EQ(huber_loss(a, y, 1.0), 0.125);
  a << 2.0;
  EXPECT_DOUBLE_EQ(huber_loss(a, y, 1.0), 1.5);
  EXPECT_DOUBLE_EQ(huber_loss(y, y, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(huber_derivative(0.5, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(huber_derivative(-3.0, 1.0), -1.0);
  EXPECT_THROW(huber_loss(Matrix::Zero(1, 2), Matrix::Zero(2, 1), 1.0), DimensionError);
}

TEST(GradWeights, ZeroAtTarget) {
  std::mt19937_64 rng(4);
  const auto c = fx::random_gradient_case(rng);
  const ResponseKernel g{10.0};
  const Matrix p = potential_trace(c.weights, c.pre, g);
  EXPECT_TRUE(grad_weights(c.weights, c.pre, p, g, 1.0).isZero());
}

TEST(GradWeights, ClosedFormOnLinearBranch) {
  // One spike at t0, target far below: d > delta everywhere after t0, so the
  // gradient is delta * sum_t g(t - t0).
  const ResponseKernel g{10.0};
  const TimeUnit T = 15, t0 = 4;
  Matrix w(1, 1);
  w << 50.0;
  const Matrix y = Matrix::Constant(1, T + 1, -100.0);
  const double delta = 1.0;
  // Before t0 the filtered input is zero, so only t >= t0 contributes.
  double expected = 0.0;
  for (TimeUnit t = t0; t <= T; ++t) expected += delta * g(t - t0);
  const Matrix grad = grad_weights(w, spikes_at(1, T, {{0, t0}}), y, g, delta);
  EXPECT_NEAR(grad(0, 0), expected, 1e-12);
}

TEST(GradWeights, MatchesFiniteDifferences) {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 25; ++k) {
    const auto c = fx::random_gradient_case(rng);
    EXPECT_LT(fx::gradient_check(c, 10.0, 1.0), 1e-5);
  }
}

TEST(Adam, ZeroGradientLeavesWeights) {
  SupervisedParams p;
  AdamState s(3, 2);
  Matrix w = Matrix::Random(3, 2);
  const Matrix before = w;
  adam_step(s, Matrix::Zero(3, 2), w, p);
  EXPECT_EQ(w, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  SupervisedParams p;
  AdamState s(2, 2);
  Matrix w = Matrix::Zero(2, 2);
  Matrix g(2, 2);
  g << 0.5, -2.0, 3.0, -0.01;
  const double lr = adam_step(s, g, w, p);
  EXPECT_DOUBLE_EQ(lr, 1e-3);
  for (Eigen::Index k = 0; k < 4; ++k) {
    // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
    const double gk = g.data()[k];
    EXPECT_NEAR(w.data()[k], -lr * gk / (std::abs(gk) + p.epsilon), 1e-15);
    EXPECT_NEAR(std::abs(w.data()[k]), lr, 1e-8);
  }
}

TEST(Adam, ScheduleSwitchesToMidRate) {
  SupervisedParams p;
  EXPECT_EQ(p.lr_switch_step(), 18000);
  EXPECT_DOUBLE_EQ(scheduled_lr(0, p), 1e-3);
  EXPECT_DOUBLE_EQ(scheduled_lr(17999, p), 1e-3);
  EXPECT_DOUBLE_EQ(scheduled_lr(18000, p), 1e-4);
  AdamState s(1, 1);
  s.step_count = 20000;
  Matrix w = Matrix::Zero(1, 1), g = Matrix::Ones(1, 1);
  s.first_moment.setZero();
  EXPECT_DOUBLE_EQ(adam_step(s, g, w, p), 1e-4);
}

TEST(Adam, RejectsNonFiniteGradient) {
  SupervisedParams p;
  AdamState s(1, 1);
  Matrix w = Matrix::Zero(1, 1), g(1, 1);
  g << std::nan("");
  EXPECT_THROW(adam_step(s, g, w, p), NumericError);
}

TEST(GuidanceCsv, RoundTripsExactly) {
  GuidanceBundle b;
  b.traces = Matrix::Random(3, 71) * 80.0;
  b.traces = b.traces.cast<float>().cast<double>();
  std::stringstream ss;
  write_guidance_csv(ss, b);
  EXPECT_EQ(read_guidance_csv(ss), b);
}

TEST(GuidanceCsv, ErrorsNameTheLine) {
  std::stringstream bad("class,t0,t1\n0,1,2\n1,3,oops\n");
  try {
    read_guidance_csv(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::stringstream ragged("0,1,2\n1,3\n");
  EXPECT_THROW(read_guidance_csv(ragged), DataError);
  std::stringstream order("1,1,2\n");
  EXPECT_THROW(read_guidance_csv(order), DataError);
}

TEST(TargetMatrix, OtherRowsAtRest) {
  GuidanceBundle b;
  b.traces = Matrix::Constant(3, 5, 7.0);
  const Matrix t = target_matrix(b, 1, -2.0);
  EXPECT_DOUBLE_EQ(t(1, 3), 7.0);
  EXPECT_DOUBLE_EQ(t(0, 3), -2.0);
  EXPECT_DOUBLE_EQ(t(2, 0), -2.0);
  EXPECT_THROW(target_matrix(b, 3, 0.0), DimensionError);
}

class FixturePipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    data_ = new Dataset(fx::fixture_data());
    unsup_ = new TrainResult(train_unsupervised_single(*data_, fx::guidance_config(), 10, 2));
  }
  static void TearDownTestSuite() {
    delete unsup_;
    delete data_;
  }
  static Dataset* data_;
  static TrainResult* unsup_;
};
Dataset* FixturePipeline::data_ = nullptr;
TrainResult* FixturePipeline::unsup_ = nullptr;

TEST_F(FixturePipeline, GuidanceNeuronsCrossThreshold) {
  const Model& m = unsup_->model;
  ASSERT_TRUE(m.class_map_bijective());
  const auto reps = select_representatives(m, *data_, 2);
  const auto bundle = extract_guidance(m, reps, 2);
  EXPECT_EQ(bundle.class_count(), 3);
  EXPECT_EQ(bundle.duration(), 70);
  EncoderSpec spec = m.config.encoder;
  spec.seed = 2;
  for (int k = 0; k < 3; ++k) {
    const SpikeField out = forward_unsupervised(m, encode_image(reps[static_cast<size_t>(k)], spec, k));
    EXPECT_GE(out[m.neuron_for_class(k)].count(), 1) << "class " << k;
  }
  EXPECT_EQ(extract_guidance(m, reps, 2), bundle);
}

TEST_F(FixturePipeline, GuidanceNeedsOneRepresentativePerClass) {
  const auto reps = select_representatives(unsup_->model, *data_, 2);
  EXPECT_THROW(extract_guidance(unsup_->model, {reps[0], reps[1]}, 2), DomainError);
}

TEST_F(FixturePipeline, SupervisedTrainingLearnsTheFixture) {
  const Model& m = unsup_->model;
  const auto bundle = extract_guidance(m, select_representatives(m, *data_, 2), 2);
  const auto sup = train_supervised(*data_, bundle, fx::fixture_config(), 25, 2);
  ASSERT_EQ(sup.history.size(), 25u);
  EXPECT_GE(sup.history.back().overall, 0.95);
  EXPECT_LE(sup.history[4].overall, sup.history[24].overall);
  EXPECT_EQ(sup.model.mode, ModelMode::kSupervised);
  EXPECT_EQ(sup.model.guidance, bundle.traces);
}

TEST_F(FixturePipeline, ZeroEpochsKeepsInitialisation) {
  const Model& m = unsup_->model;
  const auto bundle = extract_guidance(m, select_representatives(m, *data_, 2), 2);
  const auto a = train_supervised(*data_, bundle, fx::fixture_config(), 0, 8);
  const auto& w = a.model.layers[0].weights();
  EXPECT_LE(w.cwiseAbs().maxCoeff(), 0.01);
  EXPECT_EQ(a.model.layers, train_supervised(*data_, bundle, fx::fixture_config(), 0, 8).model.layers);
}

TEST(ClassifySupervised, ExactTraceHasZeroLoss) {
  const Dataset data = fx::fixture_data();
  Model m;
  m.mode = ModelMode::kSupervised;
  m.input_width = m.input_height = 32;
  m.class_names = data.classes;
  m.class_map = {0, 1, 2};
  m.config = fx::fixture_config();
  Matrix w = Matrix::Zero(1024, 3);
  w.col(1).setConstant(0.01);
  m.layers.emplace_back(w, -1.0, 1.0);
  const Image& img = data.samples.front().image;
  EncoderSpec spec = m.config.encoder;
  const Matrix p = potential_trace(w, encode_image(img, spec, 0), ResponseKernel{m.config.supervised.tau_s});
  m.guidance = Matrix::Zero(3, 71);
  m.guidance.row(1) = p.row(1);
  const auto d = classify_supervised(m, img);
  EXPECT_EQ(d.label, 1);
  EXPECT_DOUBLE_EQ(d.losses[1], 0.0);
}

TEST(ClassifySupervised, SymmetricModelTiesToClassZero) {
  const Dataset data = fx::fixture_data();
  Model m;
  m.mode = ModelMode::kSupervised;
  m.input_width = m.input_height = 32;
  m.class_names = data.classes;
  m.class_map = {0, 1, 2};
  m.config = fx::fixture_config();
  m.layers.emplace_back(Matrix::Constant(1024, 3, 0.02), -1.0, 1.0);
  m.guidance = Matrix::Constant(3, 71, 10.0);
  EXPECT_EQ(classify_supervised(m, data.samples[40].image).label, 0);
}
