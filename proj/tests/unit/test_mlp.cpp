#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "scenesense/error.hpp"
#include "scenesense/mlp.hpp"

namespace scenesense {
namespace {

TEST(TrainConfig, StepSchedule) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.learning_rate_at(0), 1e-4);
  EXPECT_DOUBLE_EQ(cfg.learning_rate_at(9), 1e-4);
  EXPECT_DOUBLE_EQ(cfg.learning_rate_at(10), 0.5e-4);
  EXPECT_DOUBLE_EQ(cfg.learning_rate_at(25), 0.25e-4);
}

TEST(TrainConfig, Defaults) {
  const TrainConfig cfg;
  EXPECT_EQ(cfg.epochs, 200u);
  EXPECT_EQ(cfg.batch_size, 512u);
  EXPECT_EQ(cfg.beta1, 0.9);
  EXPECT_EQ(cfg.beta2, 0.999);
  EXPECT_EQ(cfg.weight_decay, 1e-3);
  EXPECT_EQ(cfg.lr_step, 10u);
  EXPECT_EQ(cfg.lr_gamma, 0.5);
}

TEST(TrainConfig, ValidationAndJson) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  TrainConfig other;
  other.apply_json({{"epochs", 7}, {"hidden", {4, 5}}});
  EXPECT_EQ(other.epochs, 7u);
  EXPECT_EQ(other.hidden, (std::vector<std::size_t>{4, 5}));
  TrainConfig round;
  round.apply_json(other.to_json());
  EXPECT_EQ(round.to_json(), other.to_json());
}

TEST(MlpHead, InitializationBounds) {
  const auto head = MlpHead::initialized({16, 8, 3}, {"a", "b", "c"}, {"e", 16}, 4);
  const double b0 = 1.0 / std::sqrt(16.0);
  for (double w : head.layers()[0].weights) EXPECT_LE(std::abs(w), b0);
  const double b1 = 1.0 / std::sqrt(8.0);
  for (double w : head.layers()[1].biases) EXPECT_LE(std::abs(w), b1);
  EXPECT_EQ(head, MlpHead::initialized({16, 8, 3}, {"a", "b", "c"}, {"e", 16}, 4));
  EXPECT_NE(head, MlpHead::initialized({16, 8, 3}, {"a", "b", "c"}, {"e", 16}, 5));
}

TEST(MlpHead, ForwardPassByHand) {
  MlpHead head({2, 2, 2}, {"x", "y"}, {"e", 2});
  auto& l = head.mutable_layers();
  l[0].weights = {1, -1, 0.5, 0.5};
  l[0].biases = {0, -10};  // second hidden unit is dead
  l[1].weights = {2, 3, -1, 1};
  l[1].biases = {0.5, 0};
  const std::vector<double> x{3, 1};
  // hidden = relu([3-1, 1.5+0.5-10]) = [2, 0]; logits = [4.5, -2].
  EXPECT_EQ(head.logits(x), (std::vector<double>{4.5, -2.0}));
  const std::vector<std::size_t> y{1};
  const double loss = head.loss_and_gradients(x, y, nullptr);
  EXPECT_NEAR(loss, std::log(1.0 + std::exp(6.5)), 1e-12);
}

TEST(MlpHead, HiddenUnitPermutationSymmetry) {
  const auto head = MlpHead::initialized({5, 4, 3}, {"a", "b", "c"}, {"e", 5}, 8);
  MlpHead permuted = head;
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  auto& pl = permuted.mutable_layers();
  const auto& hl = head.layers();
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t i = 0; i < 5; ++i) pl[0].weights[j * 5 + i] = hl[0].weights[perm[j] * 5 + i];
    pl[0].biases[j] = hl[0].biases[perm[j]];
    for (std::size_t c = 0; c < 3; ++c) pl[1].weights[c * 4 + j] = hl[1].weights[c * 4 + perm[j]];
  }
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x(5);
    for (auto& v : x) v = normal(rng);
    const auto a = head.logits(x);
    const auto b = permuted.logits(x);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(a[c], b[c], 1e-12);
  }
}

TEST(MlpHead, JsonRoundTripIsExact) {
  const auto head = MlpHead::initialized({6, 5, 4}, {"a", "b", "c", "d"}, {"hash-3", 6}, 2);
  const auto back = MlpHead::from_json(nlohmann::json::parse(head.to_json().dump()));
  EXPECT_EQ(back, head);
}

TEST(MlpHead, MalformedJsonIsParseError) {
  auto doc = MlpHead::initialized({3, 2}, {"a", "b"}, {"e", 3}, 1).to_json();
  doc["weights"][0].erase(0);
  try {
    MlpHead::from_json(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
  }
}

TEST(MlpHead, LabelCountMustMatchOutput) { EXPECT_THROW(MlpHead({3, 2}, {"a", "b", "c"}, {"e", 3}), Error); }

// Replays the first Adam steps on a one-row dataset with a scalar loop.
TEST(Trainer, AdamStepsMatchScalarOracle) {
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.hidden = {3};
  cfg.learning_rate = 0.01;
  cfg.lr_step = 2;
  cfg.seed = 21;
  LabeledMatrix data{2, {0.3, -0.7}, {1}};
  const std::vector<std::string> labels{"a", "b"};
  const auto result = train_mlp(data, nullptr, labels, {"e", 2}, cfg);

  std::mt19937_64 rng(cfg.seed);
  auto oracle = MlpHead::initialized({2, 3, 2}, labels, {"e", 2}, rng());
  std::vector<std::vector<double>> m, v;
  for (const auto& l : oracle.layers()) {
    m.emplace_back(l.weights.size() + l.biases.size(), 0.0);
    v.emplace_back(l.weights.size() + l.biases.size(), 0.0);
  }
  for (std::size_t step = 1; step <= cfg.epochs; ++step) {
    std::vector<DenseLayer> grads;
    oracle.loss_and_gradients(data.inputs, data.labels, &grads);
    const double lr = cfg.learning_rate * std::pow(cfg.lr_gamma, static_cast<double>((step - 1) / cfg.lr_step));
    auto& layers = oracle.mutable_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      std::vector<double*> params;
      std::vector<double> g;
      for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
        params.push_back(&layers[l].weights[i]);
        g.push_back(grads[l].weights[i]);
      }
      for (std::size_t i = 0; i < layers[l].biases.size(); ++i) {
        params.push_back(&layers[l].biases[i]);
        g.push_back(grads[l].biases[i]);
      }
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double gi = g[i] + cfg.weight_decay * *params[i];
        m[l][i] = cfg.beta1 * m[l][i] + (1 - cfg.beta1) * gi;
        v[l][i] = cfg.beta2 * v[l][i] + (1 - cfg.beta2) * gi * gi;
        const double mhat = m[l][i] / (1 - std::pow(cfg.beta1, static_cast<double>(step)));
        const double vhat = v[l][i] / (1 - std::pow(cfg.beta2, static_cast<double>(step)));
        *params[i] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
      }
    }
  }
  for (std::size_t l = 0; l < oracle.layers().size(); ++l) {
    for (std::size_t i = 0; i < oracle.layers()[l].weights.size(); ++i)
      EXPECT_NEAR(result.head.layers()[l].weights[i], oracle.layers()[l].weights[i], 1e-14);
    for (std::size_t i = 0; i < oracle.layers()[l].biases.size(); ++i)
      EXPECT_NEAR(result.head.layers()[l].biases[i], oracle.layers()[l].biases[i], 1e-14);
  }
  ASSERT_EQ(result.curve.size(), 3u);
  EXPECT_DOUBLE_EQ(result.curve[2].learning_rate, 0.005);
}

TEST(Trainer, BestValidationSelection) {
  LabeledMatrix data{2, {1, 0, 0, 1, 1, 0.1, 0.1, 1}, {0, 1, 0, 1}};
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.learning_rate = 0.05;
  cfg.hidden = {4};
  cfg.select_best_validation = true;
  const auto result = train_mlp(data, &data, {"a", "b"}, {"e", 2}, cfg);
  ASSERT_GE(result.selected_epoch, 1u);
  double best = 0;
  for (const auto& e : result.curve) best = std::max(best, *e.val_accuracy);
  EXPECT_EQ(*result.curve[result.selected_epoch - 1].val_accuracy, best);
  EXPECT_NE(result.curve_csv().find("val_accuracy"), std::string::npos);
}

TEST(Trainer, DivergenceIsTrainingError) {
  LabeledMatrix data{1, {std::nan(""), 1.0}, {0, 1}};
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.hidden = {2};
  try {
    train_mlp(data, nullptr, {"a", "b"}, {"e", 1}, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kTraining);
  }
}

TEST(Trainer, RejectsMismatchedEmbedder) {
  LabeledMatrix data{2, {1, 0}, {0}};
  EXPECT_THROW(train_mlp(data, nullptr, {"a", "b"}, {"e", 3}, TrainConfig{}), Error);
}

}  // namespace
}  // namespace scenesense
