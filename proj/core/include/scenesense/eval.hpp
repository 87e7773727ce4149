#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenesense/classifiers.hpp"
#include "scenesense/cooccurrence.hpp"
#include "scenesense/label_space.hpp"
#include "scenesense/lm_backend.hpp"
#include "scenesense/mlp.hpp"
#include "scenesense/query.hpp"
#include "scenesense/scene_graph.hpp"

namespace scenesense {

enum class SplitUnit { kBuilding, kRoom };

struct SplitSpec {
  std::array<double, 3> ratios{0.5, 0.2, 0.3};  // train, validation, test
  SplitUnit unit = SplitUnit::kBuilding;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
};

struct RoomSplit {
  std::vector<RoomSample> train;
  std::vector<RoomSample> validation;
  std::vector<RoomSample> test;
  std::array<double, 3> realized{0.0, 0.0, 0.0};  // room-count fractions
  SplitSpec spec;

  nlohmann::json summary() const;
};

/// Shuffles atoms (buildings or rooms, in sorted id order) with a seeded
/// PRNG, then hands each atom to the partition furthest below its target
/// room count. Rooms of one building always land together.
RoomSplit split_rooms(std::span<const RoomSample> rooms, const SplitSpec& spec);

struct LabelTally {
  std::size_t correct = 0;
  std::size_t total = 0;
  std::optional<double> accuracy() const;
};

struct EvalFailure {
  std::string room_id;
  std::string message;
};

struct EvalReport {
  std::string method;
  std::string split;
  std::vector<std::string> labels;
  std::vector<LabelTally> per_label;                // recall per true label
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  std::vector<EvalFailure> failures;
  bool strict = false;
  nlohmann::json config = nlohmann::json::object();

  double overall_accuracy() const;
  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& doc);
  std::string confusion_csv() const;
  std::string per_label_csv() const;
};

using Classifier = std::function<ClassificationResult(const RoomSample&)>;

struct EvalOptions {
  std::string method;
  std::string split;
  /// Strict mode counts classifier failures as wrong answers instead of
  /// excluding them.
  bool strict = false;
  std::size_t workers = 1;
  nlohmann::json config = nlohmann::json::object();
};

/// Runs `classify` on every room (rooms need labels in `labels`).
EvalReport evaluate(const Classifier& classify, std::span<const RoomSample> rooms,
                    const std::vector<std::string>& labels, const EvalOptions& options);

/// Builds a report from predictions computed elsewhere; rooms without a
/// prediction count as failures.
EvalReport evaluate_predictions(std::span<const ClassificationResult> predictions, std::span<const RoomSample> rooms,
                                const std::vector<std::string>& labels, const EvalOptions& options);

/// A classifier that can be (re)trained on a room population.
class Pipeline {
 public:
  virtual ~Pipeline() = default;
  virtual std::string name() const = 0;
  /// `excluded_objects`: labels no training signal may mention.
  virtual void fit(std::span<const RoomSample> train, std::span<const RoomSample> validation,
                   const std::set<std::string>& excluded_objects) = 0;
  virtual ClassificationResult classify(const RoomSample& room) const = 0;
  /// Object labels the room's query names.
  virtual std::vector<std::string> query_objects(const RoomSample& room) const = 0;
};

class StatisticalPipeline final : public Pipeline {
 public:
  explicit StatisticalPipeline(LabelSpace space, double alpha = 1.0, CountingMode mode = CountingMode::kPresence);

  std::string name() const override { return "statistical"; }
  void fit(std::span<const RoomSample> train, std::span<const RoomSample> validation,
           const std::set<std::string>& excluded_objects) override;
  ClassificationResult classify(const RoomSample& room) const override;
  std::vector<std::string> query_objects(const RoomSample& room) const override;
  const CooccurrenceTable& table() const;

 private:
  LabelSpace space_;
  double alpha_;
  CountingMode mode_;
  std::optional<CooccurrenceTable> table_;
};

class ZeroShotPipeline final : public Pipeline {
 public:
  ZeroShotPipeline(std::shared_ptr<const LmScorer> scorer, InformativenessIndex index, SelectionConfig cfg,
                   LabelSpace space);

  std::string name() const override { return "zeroshot"; }
  void fit(std::span<const RoomSample>, std::span<const RoomSample>, const std::set<std::string>&) override {}
  ClassificationResult classify(const RoomSample& room) const override;
  std::vector<std::string> query_objects(const RoomSample& room) const override;

 private:
  std::shared_ptr<const LmScorer> scorer_;
  InformativenessIndex index_;
  SelectionConfig cfg_;
  LabelSpace space_;
};

/// Bootstrap rows from the training rooms feed an MLP head; inference runs
/// on the k-object query. Training and inference may select objects with
/// different indices (label-space transfer).
class EmbeddingPipeline final : public Pipeline {
 public:
  EmbeddingPipeline(std::shared_ptr<const TextEmbedder> embedder, InformativenessIndex train_index,
                    InformativenessIndex inference_index, SelectionConfig cfg, TrainConfig train_cfg,
                    std::vector<std::string> room_labels, BootstrapSchedule schedule = default_bootstrap_schedule());

  std::string name() const override { return "embedding"; }
  void fit(std::span<const RoomSample> train, std::span<const RoomSample> validation,
           const std::set<std::string>& excluded_objects) override;
  ClassificationResult classify(const RoomSample& room) const override;
  std::vector<std::string> query_objects(const RoomSample& room) const override;
  const MlpHead& head() const;
  const std::vector<BootstrapRow>& training_rows() const { return rows_; }

 private:
  std::shared_ptr<const TextEmbedder> embedder_;
  InformativenessIndex train_index_;
  InformativenessIndex inference_index_;
  SelectionConfig cfg_;
  TrainConfig train_cfg_;
  std::vector<std::string> room_labels_;
  BootstrapSchedule schedule_;
  std::vector<BootstrapRow> rows_;
  std::optional<MlpHead> head_;
};

struct HoldoutObjectResult {
  std::string label;
  LabelTally tally;
};

struct HoldoutReport {
  EvalReport overall;
  std::vector<HoldoutObjectResult> per_object;
  std::size_t training_rooms = 0;

  nlohmann::json to_json() const;
};

/// Rooms whose query names a held-out label form the evaluation population;
/// the pipeline trains on the remaining rooms (split train/validation by
/// `spec`, test share unused) without any signal mentioning those labels.
HoldoutReport holdout_experiment(std::span<const RoomSample> rooms, const std::vector<std::string>& room_labels,
                                 const std::set<std::string>& holdout, Pipeline& pipeline, const SplitSpec& spec,
                                 const EvalOptions& options);

/// Trains on rooms from one object-label space and evaluates every room of
/// another. Room vocabularies must match exactly.
EvalReport transfer_experiment(std::span<const RoomSample> train_rooms, const LabelSpace& train_space,
                               std::span<const RoomSample> test_rooms, const LabelSpace& test_space,
                               Pipeline& pipeline, const SplitSpec& spec, const EvalOptions& options);

}  // namespace scenesense
