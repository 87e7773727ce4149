#include "scenesense/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "scenesense/error.hpp"

namespace scenesense {

const char* to_string(ClassifierMethod method) {
  switch (method) {
    case ClassifierMethod::kZeroShot: return "zeroshot";
    case ClassifierMethod::kStatistical: return "statistical";
    case ClassifierMethod::kEmbedding: return "embedding";
  }
  return "unknown";
}

ClassifierMethod parse_method(std::string_view name) {
  if (name == "zeroshot" || name == "zero_shot") return ClassifierMethod::kZeroShot;
  if (name == "statistical") return ClassifierMethod::kStatistical;
  if (name == "embedding") return ClassifierMethod::kEmbedding;
  fail(ErrorKind::kConfig, "unknown method '" + std::string(name) + "' (zeroshot|statistical|embedding)");
}

double ClassificationResult::score_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return scores[i];
  return -std::numeric_limits<double>::infinity();
}

std::vector<std::string> ClassificationResult::ranking() const {
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return labels[a] < labels[b];
  });
  std::vector<std::string> out;
  for (auto i : order) out.push_back(labels[i]);
  return out;
}

nlohmann::json ClassificationResult::to_json() const {
  nlohmann::json scores_json = nlohmann::json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    // JSON has no infinities; -inf is written as null.
    scores_json[labels[i]] = std::isfinite(scores[i]) ? nlohmann::json(scores[i]) : nlohmann::json(nullptr);
  }
  return {{"room_id", room_id}, {"method", to_string(method)}, {"predicted", predicted},
          {"tie", tie},         {"scores", std::move(scores_json)}, {"objects_used", objects_used}};
}

std::size_t argmax_lexicographic(std::span<const double> scores, std::span<const std::string> labels, bool* tie) {
  if (scores.empty() || scores.size() != labels.size()) fail(ErrorKind::kInternal, "argmax over mismatched scores");
  std::size_t best = 0;
  std::size_t hits = 1;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) {
      best = i;
      hits = 1;
    } else if (scores[i] == scores[best]) {
      ++hits;
      if (labels[i] < labels[best]) best = i;
    }
  }
  if (tie) *tie = hits > 1;
  return best;
}

namespace {

void finish(ClassificationResult& result) {
  if (std::all_of(result.scores.begin(), result.scores.end(), [](double s) { return std::isnan(s); }))
    fail(ErrorKind::kDegenerate, "room '" + result.room_id + "' received only NaN scores");
  result.predicted = result.labels[argmax_lexicographic(result.scores, result.labels, &result.tie)];
}

}  // namespace

ClassificationResult classify_zero_shot(const RoomSample& room, const LmScorer& scorer,
                                        const InformativenessIndex& index, const SelectionConfig& cfg,
                                        const LabelSpace& space) {
  if (room.object_labels.empty()) fail(ErrorKind::kValidation, "room '" + room.room_id + "' has no objects");
  auto best = select_informative(room.object_labels, index, cfg);
  auto bundle = render_zero_shot(best, space);
  ClassificationResult result;
  result.room_id = room.room_id;
  result.method = ClassifierMethod::kZeroShot;
  result.labels = bundle.room_labels;
  result.scores = scorer.batch_score(bundle.texts);
  if (result.scores.size() != result.labels.size())
    fail(ErrorKind::kProtocol, "scorer returned the wrong number of scores");
  result.objects_used = std::move(best);
  finish(result);
  return result;
}

ClassificationResult classify_statistical(const RoomSample& room, const CooccurrenceTable& table, CountingMode mode) {
  if (room.object_labels.empty()) fail(ErrorKind::kValidation, "room '" + room.room_id + "' has no objects");
  std::vector<std::string> objects = room.object_labels;
  std::sort(objects.begin(), objects.end());
  if (mode == CountingMode::kPresence) objects.erase(std::unique(objects.begin(), objects.end()), objects.end());

  ClassificationResult result;
  result.room_id = room.room_id;
  result.method = ClassifierMethod::kStatistical;
  result.labels = table.room_labels();
  result.scores.assign(table.num_rooms(), 0.0);
  for (const auto& o : objects) {
    const auto dist = table.conditional(o);
    for (std::size_t r = 0; r < dist.size(); ++r) result.scores[r] += std::log(dist[r]);
  }
  if (std::all_of(result.scores.begin(), result.scores.end(), [](double s) { return std::isinf(s) && s < 0; }))
    fail(ErrorKind::kDegenerate, "room '" + room.room_id + "' has zero probability under every label");
  result.objects_used = std::move(objects);
  finish(result);
  return result;
}

EmbeddingTraining train_embedding_head(std::span<const BootstrapRow> rows, const TextEmbedder& embedder,
                                       const std::vector<std::string>& room_labels, const TrainConfig& cfg,
                                       std::span<const BootstrapRow> validation_rows) {
  if (rows.empty()) fail(ErrorKind::kValidation, "no training rows");
  std::map<std::string, std::size_t> label_index;
  for (std::size_t i = 0; i < room_labels.size(); ++i) label_index.emplace(room_labels[i], i);

  // Distinct texts in first-seen order across train then validation rows.
  std::map<std::string, std::size_t> text_index;
  std::vector<std::string> texts;
  auto intern = [&](const std::string& t) {
    auto [it, inserted] = text_index.emplace(t, texts.size());
    if (inserted) texts.push_back(t);
    return it->second;
  };
  for (const auto& r : rows) intern(r.text);
  for (const auto& r : validation_rows) intern(r.text);

  const auto embeddings = embedder.batch_embed(texts);
  if (embeddings.size() != texts.size()) fail(ErrorKind::kProtocol, "embedder returned the wrong number of vectors");
  const std::size_t dim = embeddings.front().size();
  for (const auto& e : embeddings)
    if (e.size() != dim) fail(ErrorKind::kValidation, "embeddings have inconsistent dimensions");

  auto build = [&](std::span<const BootstrapRow> src) {
    LabeledMatrix m;
    m.dim = dim;
    m.inputs.reserve(src.size() * dim);
    for (const auto& r : src) {
      auto it = label_index.find(r.label);
      if (it == label_index.end()) fail(ErrorKind::kValidation, "row label '" + r.label + "' is not a room label");
      const auto& e = embeddings[text_index.at(r.text)];
      m.inputs.insert(m.inputs.end(), e.begin(), e.end());
      m.labels.push_back(it->second);
    }
    return m;
  };
  const LabeledMatrix train = build(rows);
  const LabeledMatrix val = build(validation_rows);
  EmbeddingTraining out;
  out.unique_texts = texts.size();
  out.result = train_mlp(train, val.rows() ? &val : nullptr, room_labels, {embedder.name(), dim}, cfg);
  return out;
}

ClassificationResult classify_embedding_text(const std::string& room_id, const std::string& text,
                                             std::vector<std::string> objects_used, const TextEmbedder& embedder,
                                             const MlpHead& head) {
  const auto v = embedder.embed(text);
  if (v.size() != head.input_dim())
    fail(ErrorKind::kValidation, "embedding dimension " + std::to_string(v.size()) + " does not match head input " +
                                     std::to_string(head.input_dim()));
  ClassificationResult result;
  result.room_id = room_id;
  result.method = ClassifierMethod::kEmbedding;
  result.labels = head.label_order();
  result.scores = head.logits(v);
  result.objects_used = std::move(objects_used);
  finish(result);
  return result;
}

ClassificationResult classify_embedding(const RoomSample& room, const TextEmbedder& embedder, const MlpHead& head,
                                        const InformativenessIndex& index, const SelectionConfig& cfg) {
  if (room.object_labels.empty()) fail(ErrorKind::kValidation, "room '" + room.room_id + "' has no objects");
  auto best = select_informative(room.object_labels, index, cfg);
  auto bundle = render_embedding(best);
  return classify_embedding_text(room.room_id, bundle.texts.front(), std::move(best), embedder, head);
}

}  // namespace scenesense
