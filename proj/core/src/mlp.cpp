#include "scenesense/mlp.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "scenesense/error.hpp"
#include "scenesense/io.hpp"

namespace scenesense {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstVectorMap = Eigen::Map<const Eigen::RowVectorXd>;

/// Uniform double in [0, 1) from the top 53 bits; identical on every
/// platform, unlike std::uniform_real_distribution.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, bound) by rejection.
std::size_t bounded(std::mt19937_64& rng, std::size_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

void shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[bounded(rng, i)]);
}

std::vector<DenseLayer> zero_like(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> out = layers;
  for (auto& l : out) {
    std::fill(l.weights.begin(), l.weights.end(), 0.0);
    std::fill(l.biases.begin(), l.biases.end(), 0.0);
  }
  return out;
}

}  // namespace

MlpHead::MlpHead(std::vector<std::size_t> dims, std::vector<std::string> label_order, EmbedderInfo embedder)
    : dims_(std::move(dims)), label_order_(std::move(label_order)), embedder_(std::move(embedder)) {
  if (dims_.size() < 2) fail(ErrorKind::kValidation, "MLP needs at least input and output sizes");
  for (auto d : dims_)
    if (d == 0) fail(ErrorKind::kValidation, "MLP layer sizes must be positive");
  if (label_order_.size() != dims_.back())
    fail(ErrorKind::kValidation, "MLP output size " + std::to_string(dims_.back()) + " does not match " +
                                     std::to_string(label_order_.size()) + " labels");
  if (embedder_.dimension != 0 && embedder_.dimension != dims_.front())
    fail(ErrorKind::kValidation, "MLP input size does not match the embedder dimension");
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    DenseLayer layer;
    layer.in = dims_[i];
    layer.out = dims_[i + 1];
    layer.weights.assign(layer.in * layer.out, 0.0);
    layer.biases.assign(layer.out, 0.0);
    layers_.push_back(std::move(layer));
  }
}

MlpHead MlpHead::initialized(std::vector<std::size_t> dims, std::vector<std::string> label_order,
                             EmbedderInfo embedder, std::uint64_t seed) {
  MlpHead head(std::move(dims), std::move(label_order), std::move(embedder));
  std::mt19937_64 rng(seed);
  for (auto& layer : head.layers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (auto& w : layer.weights) w = (2.0 * unit_uniform(rng) - 1.0) * bound;
    for (auto& b : layer.biases) b = (2.0 * unit_uniform(rng) - 1.0) * bound;
  }
  return head;
}

std::vector<double> MlpHead::logits(std::span<const double> input) const {
  return batch_logits(input, 1);
}

std::vector<double> MlpHead::batch_logits(std::span<const double> inputs, std::size_t rows) const {
  if (inputs.size() != rows * input_dim())
    fail(ErrorKind::kValidation, "input has dimension " + std::to_string(rows ? inputs.size() / rows : 0) +
                                     ", head expects " + std::to_string(input_dim()));
  RowMatrix act = ConstMatrixMap(inputs.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(input_dim()));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    ConstMatrixMap w(layer.weights.data(), static_cast<Eigen::Index>(layer.out), static_cast<Eigen::Index>(layer.in));
    ConstVectorMap b(layer.biases.data(), static_cast<Eigen::Index>(layer.out));
    RowMatrix z = act * w.transpose();
    z.rowwise() += b;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    act = std::move(z);
  }
  return std::vector<double>(act.data(), act.data() + act.size());
}

double MlpHead::loss_and_gradients(std::span<const double> inputs, std::span<const std::size_t> labels,
                                   std::vector<DenseLayer>* grads, std::size_t* correct) const {
  const std::size_t rows = labels.size();
  if (rows == 0) fail(ErrorKind::kValidation, "empty batch");
  if (inputs.size() != rows * input_dim()) fail(ErrorKind::kValidation, "batch input has the wrong dimension");
  const auto n = static_cast<Eigen::Index>(rows);

  // Forward, keeping every activation for the backward pass.
  std::vector<RowMatrix> acts;
  acts.reserve(layers_.size() + 1);
  acts.emplace_back(ConstMatrixMap(inputs.data(), n, static_cast<Eigen::Index>(input_dim())));
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    ConstMatrixMap w(layer.weights.data(), static_cast<Eigen::Index>(layer.out), static_cast<Eigen::Index>(layer.in));
    ConstVectorMap b(layer.biases.data(), static_cast<Eigen::Index>(layer.out));
    RowMatrix z = acts.back() * w.transpose();
    z.rowwise() += b;
    if (l + 1 < layers_.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }

  RowMatrix& logits = acts.back();
  RowMatrix delta(logits.rows(), logits.cols());
  double loss = 0.0;
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t y = labels[static_cast<std::size_t>(i)];
    if (y >= num_classes()) fail(ErrorKind::kValidation, "label index out of range");
    Eigen::Index best = 0;
    const double peak = logits.row(i).maxCoeff(&best);
    if (static_cast<std::size_t>(best) == y) ++hits;
    const Eigen::RowVectorXd e = (logits.row(i).array() - peak).exp().matrix();
    const double sum = e.sum();
    loss += std::log(sum) + peak - logits(i, static_cast<Eigen::Index>(y));
    delta.row(i) = e / sum;
    delta(i, static_cast<Eigen::Index>(y)) -= 1.0;
  }
  loss /= static_cast<double>(rows);
  if (correct) *correct = hits;
  if (!grads) return loss;

  delta /= static_cast<double>(rows);
  *grads = zero_like(layers_);
  for (std::size_t l = layers_.size(); l-- > 0;) {
    const auto& layer = layers_[l];
    auto& g = (*grads)[l];
    MatrixMap gw(g.weights.data(), static_cast<Eigen::Index>(layer.out), static_cast<Eigen::Index>(layer.in));
    Eigen::Map<Eigen::RowVectorXd> gb(g.biases.data(), static_cast<Eigen::Index>(layer.out));
    gw.noalias() = delta.transpose() * acts[l];
    gb = delta.colwise().sum();
    if (l == 0) break;
    ConstMatrixMap w(layer.weights.data(), static_cast<Eigen::Index>(layer.out), static_cast<Eigen::Index>(layer.in));
    RowMatrix upstream = delta * w;
    // ReLU derivative: the stored activation is positive exactly where the
    // pre-activation was.
    delta = (acts[l].array() > 0.0).select(upstream, 0.0);
  }
  return loss;
}

bool MlpHead::all_finite() const {
  for (const auto& l : layers_) {
    for (double w : l.weights)
      if (!std::isfinite(w)) return false;
    for (double b : l.biases)
      if (!std::isfinite(b)) return false;
  }
  return true;
}

nlohmann::json MlpHead::to_json() const {
  nlohmann::json doc;
  doc["dims"] = dims_;
  auto weights = nlohmann::json::array();
  auto biases = nlohmann::json::array();
  for (const auto& l : layers_) {
    weights.push_back(l.weights);
    biases.push_back(l.biases);
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  doc["embedder"] = {{"name", embedder_.name}, {"dimension", embedder_.dimension}};
  doc["label_order"] = label_order_;
  doc["activation"] = "relu";
  return doc;
}

MlpHead MlpHead::from_json(const nlohmann::json& doc) {
  try {
    EmbedderInfo info;
    if (doc.contains("embedder")) {
      info.name = doc.at("embedder").value("name", "");
      info.dimension = doc.at("embedder").value("dimension", std::size_t{0});
    }
    MlpHead head(doc.at("dims").get<std::vector<std::size_t>>(),
                 doc.at("label_order").get<std::vector<std::string>>(), info);
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() != head.layers_.size() || biases.size() != head.layers_.size())
      fail(ErrorKind::kParse, "head has the wrong number of layers");
    for (std::size_t l = 0; l < head.layers_.size(); ++l) {
      auto w = weights[l].get<std::vector<double>>();
      auto b = biases[l].get<std::vector<double>>();
      if (w.size() != head.layers_[l].weights.size() || b.size() != head.layers_[l].biases.size())
        fail(ErrorKind::kParse, "layer " + std::to_string(l) + " has the wrong parameter count");
      head.layers_[l].weights = std::move(w);
      head.layers_[l].biases = std::move(b);
    }
    if (!head.all_finite()) fail(ErrorKind::kValidation, "head parameters must be finite");
    return head;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("malformed head file: ") + e.what());
  }
}

double TrainConfig::learning_rate_at(std::size_t epoch) const {
  return learning_rate * std::pow(lr_gamma, static_cast<double>(epoch / lr_step));
}

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || lr_step == 0) fail(ErrorKind::kConfig, "epochs, batch_size, lr_step must be positive");
  if (!(learning_rate > 0) || !(lr_gamma > 0) || !(epsilon > 0) || weight_decay < 0)
    fail(ErrorKind::kConfig, "learning rate, gamma, epsilon must be positive; weight decay nonnegative");
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) fail(ErrorKind::kConfig, "Adam betas must lie in (0, 1)");
  for (auto h : hidden)
    if (h == 0) fail(ErrorKind::kConfig, "hidden layer sizes must be positive");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},         {"batch_size", batch_size}, {"learning_rate", learning_rate},
          {"adam_betas", {beta1, beta2}}, {"epsilon", epsilon},   {"weight_decay", weight_decay},
          {"lr_step", lr_step},       {"lr_gamma", lr_gamma},     {"seed", seed},
          {"hidden", hidden},         {"select_best_validation", select_best_validation}};
}

void TrainConfig::apply_json(const nlohmann::json& doc) {
  try {
    if (doc.contains("epochs")) epochs = doc.at("epochs").get<std::size_t>();
    if (doc.contains("batch_size")) batch_size = doc.at("batch_size").get<std::size_t>();
    if (doc.contains("learning_rate")) learning_rate = doc.at("learning_rate").get<double>();
    if (doc.contains("adam_betas")) {
      beta1 = doc.at("adam_betas").at(0).get<double>();
      beta2 = doc.at("adam_betas").at(1).get<double>();
    }
    if (doc.contains("epsilon")) epsilon = doc.at("epsilon").get<double>();
    if (doc.contains("weight_decay")) weight_decay = doc.at("weight_decay").get<double>();
    if (doc.contains("lr_step")) lr_step = doc.at("lr_step").get<std::size_t>();
    if (doc.contains("lr_gamma")) lr_gamma = doc.at("lr_gamma").get<double>();
    if (doc.contains("seed")) seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("hidden")) hidden = doc.at("hidden").get<std::vector<std::size_t>>();
    if (doc.contains("select_best_validation")) select_best_validation = doc.at("select_best_validation").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kConfig, std::string("bad training config: ") + e.what());
  }
}

std::string TrainResult::curve_csv() const {
  std::string out = csv_row({"epoch", "learning_rate", "train_loss", "train_accuracy", "val_loss", "val_accuracy"});
  for (const auto& e : curve) {
    out += csv_row({std::to_string(e.epoch), format_double(e.learning_rate), format_double(e.train_loss),
                    format_double(e.train_accuracy), e.val_loss ? format_double(*e.val_loss) : "",
                    e.val_accuracy ? format_double(*e.val_accuracy) : ""});
  }
  return out;
}

namespace {

struct AdamState {
  std::vector<DenseLayer> m;
  std::vector<DenseLayer> v;
  std::uint64_t step = 0;
};

void adam_update(std::vector<double>& params, const std::vector<double>& grad, std::vector<double>& m,
                 std::vector<double>& v, const TrainConfig& cfg, double lr, double bias1, double bias2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i] + cfg.weight_decay * params[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

std::pair<double, double> evaluate(const MlpHead& head, const LabeledMatrix& data) {
  std::size_t hits = 0;
  const double loss = head.loss_and_gradients(data.inputs, data.labels, nullptr, &hits);
  return {loss, static_cast<double>(hits) / static_cast<double>(data.rows())};
}

}  // namespace

TrainResult train_mlp(const LabeledMatrix& train, const LabeledMatrix* validation,
                      std::vector<std::string> label_order, EmbedderInfo embedder, const TrainConfig& cfg) {
  cfg.validate();
  if (train.rows() == 0) fail(ErrorKind::kValidation, "no training rows");
  if (train.inputs.size() != train.rows() * train.dim) fail(ErrorKind::kValidation, "training matrix is ragged");
  if (embedder.dimension != 0 && embedder.dimension != train.dim)
    fail(ErrorKind::kValidation, "training inputs have dimension " + std::to_string(train.dim) +
                                     ", embedder reports " + std::to_string(embedder.dimension));
  if (validation && validation->rows() > 0 && validation->dim != train.dim)
    fail(ErrorKind::kValidation, "validation inputs have a different dimension");

  std::vector<std::size_t> dims{train.dim};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(label_order.size());

  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  result.head = MlpHead::initialized(dims, std::move(label_order), std::move(embedder), rng());
  result.initial_loss = evaluate(result.head, train).first;

  AdamState adam{zero_like(result.head.layers()), zero_like(result.head.layers()), 0};
  std::vector<std::size_t> order(train.rows());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> batch_inputs;
  std::vector<std::size_t> batch_labels;
  std::vector<DenseLayer> grads;
  std::optional<MlpHead> best;
  double best_val = -1.0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.learning_rate_at(epoch);
    shuffle(order, rng);
    double loss_sum = 0.0;
    std::size_t hit_sum = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      batch_inputs.clear();
      batch_labels.clear();
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t row = order[i];
        batch_inputs.insert(batch_inputs.end(), train.inputs.begin() + static_cast<std::ptrdiff_t>(row * train.dim),
                            train.inputs.begin() + static_cast<std::ptrdiff_t>((row + 1) * train.dim));
        batch_labels.push_back(train.labels[row]);
      }
      std::size_t hits = 0;
      const double loss = result.head.loss_and_gradients(batch_inputs, batch_labels, &grads, &hits);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch + 1 << ", batch starting at row " << start
            << " (learning rate " << lr << ")";
        fail(ErrorKind::kTraining, msg.str());
      }
      loss_sum += loss * static_cast<double>(stop - start);
      hit_sum += hits;

      ++adam.step;
      const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.step));
      const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.step));
      auto& layers = result.head.mutable_layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        adam_update(layers[l].weights, grads[l].weights, adam.m[l].weights, adam.v[l].weights, cfg, lr, bias1, bias2);
        adam_update(layers[l].biases, grads[l].biases, adam.m[l].biases, adam.v[l].biases, cfg, lr, bias1, bias2);
      }
    }
    if (!result.head.all_finite())
      fail(ErrorKind::kTraining, "parameters became non-finite in epoch " + std::to_string(epoch + 1));

    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.learning_rate = lr;
    stats.train_loss = loss_sum / static_cast<double>(train.rows());
    stats.train_accuracy = static_cast<double>(hit_sum) / static_cast<double>(train.rows());
    if (validation && validation->rows() > 0) {
      const auto [vl, va] = evaluate(result.head, *validation);
      stats.val_loss = vl;
      stats.val_accuracy = va;
      if (cfg.select_best_validation && va > best_val) {
        best_val = va;
        best = result.head;
        result.selected_epoch = stats.epoch;
      }
    }
    result.curve.push_back(stats);
  }
  if (cfg.select_best_validation && best) {
    result.head = std::move(*best);
  } else {
    result.selected_epoch = cfg.epochs;
  }
  return result;
}

}  // namespace scenesense
