#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenesense/cooccurrence.hpp"
#include "scenesense/label_space.hpp"
#include "scenesense/lm_backend.hpp"
#include "scenesense/mlp.hpp"
#include "scenesense/query.hpp"
#include "scenesense/scene_graph.hpp"

namespace scenesense {

enum class ClassifierMethod { kZeroShot, kStatistical, kEmbedding };

const char* to_string(ClassifierMethod method);
ClassifierMethod parse_method(std::string_view name);

struct ClassificationResult {
  std::string room_id;
  ClassifierMethod method = ClassifierMethod::kStatistical;
  std::vector<std::string> labels;  // room label order
  std::vector<double> scores;       // aligned with labels
  std::string predicted;
  bool tie = false;  // more than one label shares the top score
  std::vector<std::string> objects_used;

  double score_of(std::string_view label) const;
  /// Labels sorted by descending score (ties lexicographic).
  std::vector<std::string> ranking() const;
  nlohmann::json to_json() const;
};

/// Index of the maximum; among equal maxima the lexicographically smallest
/// label wins. `tie` reports whether more than one label hit the maximum.
std::size_t argmax_lexicographic(std::span<const double> scores, std::span<const std::string> labels,
                                 bool* tie = nullptr);

ClassificationResult classify_zero_shot(const RoomSample& room, const LmScorer& scorer,
                                        const InformativenessIndex& index, const SelectionConfig& cfg,
                                        const LabelSpace& space);

/// Naive Bayes in log space: score[r] = Σ ln p(r|o) over the room's object
/// labels (distinct labels under presence counting, every instance under
/// multiplicity). Terms are summed in lexicographic label order.
ClassificationResult classify_statistical(const RoomSample& room, const CooccurrenceTable& table,
                                          CountingMode mode = CountingMode::kPresence);

struct EmbeddingTraining {
  TrainResult result;
  std::size_t unique_texts = 0;
};

/// Embeds every distinct row text once, then trains the head.
EmbeddingTraining train_embedding_head(std::span<const BootstrapRow> rows, const TextEmbedder& embedder,
                                       const std::vector<std::string>& room_labels, const TrainConfig& cfg,
                                       std::span<const BootstrapRow> validation_rows = {});

ClassificationResult classify_embedding(const RoomSample& room, const TextEmbedder& embedder, const MlpHead& head,
                                        const InformativenessIndex& index, const SelectionConfig& cfg);

/// Embedding-path classification from an already-rendered query.
ClassificationResult classify_embedding_text(const std::string& room_id, const std::string& text,
                                             std::vector<std::string> objects_used, const TextEmbedder& embedder,
                                             const MlpHead& head);

}  // namespace scenesense
