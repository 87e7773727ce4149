#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace scenesense {

/// Fully connected layer; weights are `out x in`, row-major.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct EmbedderInfo {
  std::string name;
  std::size_t dimension = 0;

  friend bool operator==(const EmbedderInfo&, const EmbedderInfo&) = default;
};

/// Row-major design matrix with integer class targets.
struct LabeledMatrix {
  std::size_t dim = 0;
  std::vector<double> inputs;
  std::vector<std::size_t> labels;

  std::size_t rows() const { return labels.size(); }
};

/// Shallow perceptron: ReLU on hidden layers, identity logits.
class MlpHead {
 public:
  MlpHead() = default;
  MlpHead(std::vector<std::size_t> dims, std::vector<std::string> label_order, EmbedderInfo embedder);

  /// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from a seeded
  /// 64-bit Mersenne Twister.
  static MlpHead initialized(std::vector<std::size_t> dims, std::vector<std::string> label_order,
                             EmbedderInfo embedder, std::uint64_t seed);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t num_classes() const { return dims_.back(); }
  const std::vector<std::string>& label_order() const { return label_order_; }
  const EmbedderInfo& embedder() const { return embedder_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  std::vector<double> logits(std::span<const double> input) const;
  /// Logits for every row of a row-major batch.
  std::vector<double> batch_logits(std::span<const double> inputs, std::size_t rows) const;

  /// Mean softmax cross-entropy over the batch. When `grads` is non-null it
  /// receives d(loss)/d(parameter) with the same layout as layers(). When
  /// `correct` is non-null it receives the number of argmax hits.
  double loss_and_gradients(std::span<const double> inputs, std::span<const std::size_t> labels,
                            std::vector<DenseLayer>* grads, std::size_t* correct = nullptr) const;

  bool all_finite() const;

  nlohmann::json to_json() const;
  static MlpHead from_json(const nlohmann::json& doc);

  friend bool operator==(const MlpHead&, const MlpHead&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<DenseLayer> layers_;
  std::vector<std::string> label_order_;
  EmbedderInfo embedder_;
};

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t batch_size = 512;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-3;  // L2 term added to the gradient
  std::size_t lr_step = 10;
  double lr_gamma = 0.5;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden{256};
  bool select_best_validation = false;

  /// StepLR: learning_rate * gamma^floor(epoch / lr_step), epoch 0-based.
  double learning_rate_at(std::size_t epoch) const;
  void validate() const;
  nlohmann::json to_json() const;
  void apply_json(const nlohmann::json& doc);
};

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double learning_rate = 0.0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
};

struct TrainResult {
  MlpHead head;
  std::vector<EpochStats> curve;
  double initial_loss = 0.0;  // full training-set loss at initialization
  std::size_t selected_epoch = 0;

  std::string curve_csv() const;
};

/// Mini-batch Adam on softmax cross-entropy. Deterministic given the inputs
/// and cfg.seed (initialization and per-epoch shuffles share one stream).
TrainResult train_mlp(const LabeledMatrix& train, const LabeledMatrix* validation,
                      std::vector<std::string> label_order, EmbedderInfo embedder, const TrainConfig& cfg);

}  // namespace scenesense
