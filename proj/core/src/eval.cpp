#include "scenesense/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "scenesense/error.hpp"
#include "scenesense/io.hpp"

namespace scenesense {

void SplitSpec::validate() const {
  double sum = 0.0;
  for (double r : ratios) {
    if (!(r >= 0.0)) fail(ErrorKind::kConfig, "split ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorKind::kConfig, "split ratios must sum to 1");
}

nlohmann::json SplitSpec::to_json() const {
  return {{"ratios", ratios}, {"unit", unit == SplitUnit::kBuilding ? "building" : "room"}, {"seed", seed}};
}

nlohmann::json RoomSplit::summary() const {
  return {{"spec", spec.to_json()},
          {"rooms", {train.size(), validation.size(), test.size()}},
          {"realized_ratios", realized}};
}

RoomSplit split_rooms(std::span<const RoomSample> rooms, const SplitSpec& spec) {
  spec.validate();
  std::map<std::string, std::vector<std::size_t>> atoms;
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const auto& key = spec.unit == SplitUnit::kBuilding ? rooms[i].building_id : rooms[i].room_id;
    atoms[key].push_back(i);
  }
  if (spec.unit == SplitUnit::kBuilding && atoms.size() < 3)
    fail(ErrorKind::kValidation, "splitting by building needs at least 3 buildings, got " + std::to_string(atoms.size()));
  if (spec.unit == SplitUnit::kRoom && rooms.empty()) fail(ErrorKind::kValidation, "no rooms to split");

  std::vector<const std::vector<std::size_t>*> order;
  for (const auto& [key, members] : atoms) order.push_back(&members);
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % i;
    std::uint64_t x;
    do {
      x = rng();
    } while (x >= limit);
    std::swap(order[i - 1], order[x % i]);
  }

  const double total = static_cast<double>(rooms.size());
  std::array<double, 3> assigned{0.0, 0.0, 0.0};
  std::vector<int> partition(rooms.size(), 0);
  for (const auto* members : order) {
    int best = -1;
    double best_deficit = 0.0;
    for (int p = 0; p < 3; ++p) {
      if (spec.ratios[static_cast<std::size_t>(p)] <= 0.0) continue;
      const double deficit = spec.ratios[static_cast<std::size_t>(p)] * total - assigned[static_cast<std::size_t>(p)];
      if (best < 0 || deficit > best_deficit) {
        best = p;
        best_deficit = deficit;
      }
    }
    assigned[static_cast<std::size_t>(best)] += static_cast<double>(members->size());
    for (auto i : *members) partition[i] = best;
  }

  RoomSplit out;
  out.spec = spec;
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    switch (partition[i]) {
      case 0: out.train.push_back(rooms[i]); break;
      case 1: out.validation.push_back(rooms[i]); break;
      default: out.test.push_back(rooms[i]); break;
    }
  }
  if (total > 0)
    for (std::size_t p = 0; p < 3; ++p) out.realized[p] = assigned[p] / total;
  return out;
}

std::optional<double> LabelTally::accuracy() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(total);
}

double EvalReport::overall_accuracy() const {
  return evaluated == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(evaluated);
}

namespace {

nlohmann::json optional_number(std::optional<double> v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    per[labels[i]] = {{"correct", per_label[i].correct},
                      {"total", per_label[i].total},
                      {"accuracy", optional_number(per_label[i].accuracy())}};
  }
  auto fails = nlohmann::json::array();
  for (const auto& f : failures) fails.push_back({{"room_id", f.room_id}, {"message", f.message}});
  return {{"method", method},
          {"split", split},
          {"strict", strict},
          {"evaluated", evaluated},
          {"correct", correct},
          {"overall_accuracy", evaluated ? nlohmann::json(overall_accuracy()) : nlohmann::json(nullptr)},
          {"labels", labels},
          {"per_label", std::move(per)},
          {"confusion", confusion},
          {"failures", std::move(fails)},
          {"config", config}};
}

EvalReport EvalReport::from_json(const nlohmann::json& doc) {
  try {
    EvalReport r;
    r.method = doc.at("method").get<std::string>();
    r.split = doc.at("split").get<std::string>();
    r.strict = doc.value("strict", false);
    r.evaluated = doc.at("evaluated").get<std::size_t>();
    r.correct = doc.at("correct").get<std::size_t>();
    r.labels = doc.at("labels").get<std::vector<std::string>>();
    r.confusion = doc.at("confusion").get<std::vector<std::vector<std::size_t>>>();
    for (const auto& label : r.labels) {
      const auto& e = doc.at("per_label").at(label);
      r.per_label.push_back({e.at("correct").get<std::size_t>(), e.at("total").get<std::size_t>()});
    }
    for (const auto& f : doc.value("failures", nlohmann::json::array()))
      r.failures.push_back({f.at("room_id").get<std::string>(), f.at("message").get<std::string>()});
    r.config = doc.value("config", nlohmann::json::object());
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("malformed eval report: ") + e.what());
  }
}

std::string EvalReport::confusion_csv() const {
  std::vector<std::string> header{"true\\predicted"};
  header.insert(header.end(), labels.begin(), labels.end());
  std::string out = csv_row(header);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::vector<std::string> row{labels[i]};
    for (auto c : confusion[i]) row.push_back(std::to_string(c));
    out += csv_row(row);
  }
  return out;
}

std::string EvalReport::per_label_csv() const {
  std::string out = csv_row({"label", "correct", "total", "accuracy"});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto acc = per_label[i].accuracy();
    out += csv_row({labels[i], std::to_string(per_label[i].correct), std::to_string(per_label[i].total),
                    acc ? format_double(*acc) : ""});
  }
  return out;
}

namespace {

struct Outcome {
  std::optional<std::string> predicted;
  std::string error;
};

EvalReport tally(std::span<const RoomSample> rooms, std::span<const Outcome> outcomes,
                 const std::vector<std::string>& labels, const EvalOptions& options) {
  EvalReport report;
  report.method = options.method;
  report.split = options.split;
  report.strict = options.strict;
  report.config = options.config;
  report.labels = labels;
  report.per_label.assign(labels.size(), {});
  report.confusion.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], i);

  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const auto& room = rooms[i];
    const auto truth = room.label ? index.find(*room.label) : index.end();
    if (truth == index.end()) {
      report.failures.push_back({room.room_id, "room label is missing or outside the label set"});
      continue;
    }
    const auto& outcome = outcomes[i];
    const auto pred = outcome.predicted ? index.find(*outcome.predicted) : index.end();
    if (pred == index.end()) {
      report.failures.push_back(
          {room.room_id, outcome.predicted ? "predicted label '" + *outcome.predicted + "' is unknown" : outcome.error});
      if (options.strict) {
        ++report.evaluated;
        ++report.per_label[truth->second].total;
      }
      continue;
    }
    ++report.evaluated;
    ++report.per_label[truth->second].total;
    ++report.confusion[truth->second][pred->second];
    if (truth->second == pred->second) {
      ++report.correct;
      ++report.per_label[truth->second].correct;
    }
  }
  return report;
}

}  // namespace

EvalReport evaluate(const Classifier& classify, std::span<const RoomSample> rooms,
                    const std::vector<std::string>& labels, const EvalOptions& options) {
  std::vector<Outcome> outcomes(rooms.size());
  auto run = [&](std::size_t i) {
    try {
      outcomes[i].predicted = classify(rooms[i]).predicted;
    } catch (const std::exception& e) {
      outcomes[i].error = e.what();
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, rooms.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < rooms.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < rooms.size(); i = next++) run(i);
      });
    for (auto& t : pool) t.join();
  }
  return tally(rooms, outcomes, labels, options);
}

EvalReport evaluate_predictions(std::span<const ClassificationResult> predictions, std::span<const RoomSample> rooms,
                                const std::vector<std::string>& labels, const EvalOptions& options) {
  std::map<std::string, const ClassificationResult*> by_room;
  for (const auto& p : predictions) by_room[p.room_id] = &p;
  std::vector<Outcome> outcomes(rooms.size());
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    auto it = by_room.find(rooms[i].room_id);
    if (it == by_room.end()) {
      outcomes[i].error = "no prediction for room";
    } else {
      outcomes[i].predicted = it->second->predicted;
    }
  }
  return tally(rooms, outcomes, labels, options);
}

StatisticalPipeline::StatisticalPipeline(LabelSpace space, double alpha, CountingMode mode)
    : space_(std::move(space)), alpha_(alpha), mode_(mode) {}

void StatisticalPipeline::fit(std::span<const RoomSample> train, std::span<const RoomSample>,
                              const std::set<std::string>& excluded_objects) {
  std::vector<RoomSample> rooms(train.begin(), train.end());
  for (auto& room : rooms)
    std::erase_if(room.object_labels, [&](const std::string& l) { return excluded_objects.contains(l); });
  table_ = count_cooccurrences(rooms, space_, alpha_, mode_);
}

const CooccurrenceTable& StatisticalPipeline::table() const {
  if (!table_) fail(ErrorKind::kConfig, "statistical pipeline used before fit()");
  return *table_;
}

ClassificationResult StatisticalPipeline::classify(const RoomSample& room) const {
  return classify_statistical(room, table(), mode_);
}

std::vector<std::string> StatisticalPipeline::query_objects(const RoomSample& room) const {
  std::vector<std::string> out = room.object_labels;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

ZeroShotPipeline::ZeroShotPipeline(std::shared_ptr<const LmScorer> scorer, InformativenessIndex index,
                                   SelectionConfig cfg, LabelSpace space)
    : scorer_(std::move(scorer)), index_(std::move(index)), cfg_(cfg), space_(std::move(space)) {}

ClassificationResult ZeroShotPipeline::classify(const RoomSample& room) const {
  return classify_zero_shot(room, *scorer_, index_, cfg_, space_);
}

std::vector<std::string> ZeroShotPipeline::query_objects(const RoomSample& room) const {
  return select_informative(room.object_labels, index_, cfg_);
}

EmbeddingPipeline::EmbeddingPipeline(std::shared_ptr<const TextEmbedder> embedder, InformativenessIndex train_index,
                                     InformativenessIndex inference_index, SelectionConfig cfg, TrainConfig train_cfg,
                                     std::vector<std::string> room_labels, BootstrapSchedule schedule)
    : embedder_(std::move(embedder)),
      train_index_(std::move(train_index)),
      inference_index_(std::move(inference_index)),
      cfg_(cfg),
      train_cfg_(std::move(train_cfg)),
      room_labels_(std::move(room_labels)),
      schedule_(std::move(schedule)) {}

namespace {

bool mentions(const std::vector<std::string>& objects, const std::set<std::string>& excluded) {
  return std::any_of(objects.begin(), objects.end(), [&](const std::string& o) { return excluded.contains(o); });
}

}  // namespace

void EmbeddingPipeline::fit(std::span<const RoomSample> train, std::span<const RoomSample> validation,
                            const std::set<std::string>& excluded_objects) {
  rows_.clear();
  for (const auto& room : train) {
    if (room.object_labels.empty() || !room.label) continue;
    for (auto& row : bootstrap_queries(room, train_index_, schedule_, cfg_.tie_break))
      if (!mentions(row.objects, excluded_objects)) rows_.push_back(std::move(row));
  }
  if (rows_.empty()) fail(ErrorKind::kValidation, "no training rows left for the embedding head");
  std::vector<BootstrapRow> val_rows;
  for (const auto& room : validation) {
    if (room.object_labels.empty() || !room.label) continue;
    auto objects = select_informative(room.object_labels, train_index_, cfg_);
    if (mentions(objects, excluded_objects)) continue;
    auto text = render_embedding(objects).texts.front();
    val_rows.push_back({std::move(text), *room.label, room.room_id, std::move(objects)});
  }
  head_ = train_embedding_head(rows_, *embedder_, room_labels_, train_cfg_, val_rows).result.head;
}

const MlpHead& EmbeddingPipeline::head() const {
  if (!head_) fail(ErrorKind::kConfig, "embedding pipeline used before fit()");
  return *head_;
}

ClassificationResult EmbeddingPipeline::classify(const RoomSample& room) const {
  return classify_embedding(room, *embedder_, head(), inference_index_, cfg_);
}

std::vector<std::string> EmbeddingPipeline::query_objects(const RoomSample& room) const {
  return select_informative(room.object_labels, inference_index_, cfg_);
}

nlohmann::json HoldoutReport::to_json() const {
  auto per = nlohmann::json::array();
  for (const auto& p : per_object)
    per.push_back({{"label", p.label},
                   {"correct", p.tally.correct},
                   {"total", p.tally.total},
                   {"accuracy", optional_number(p.tally.accuracy())}});
  return {{"overall", overall.to_json()}, {"per_object", std::move(per)}, {"training_rooms", training_rooms}};
}

HoldoutReport holdout_experiment(std::span<const RoomSample> rooms, const std::vector<std::string>& room_labels,
                                 const std::set<std::string>& holdout, Pipeline& pipeline, const SplitSpec& spec,
                                 const EvalOptions& options) {
  if (holdout.empty()) fail(ErrorKind::kConfig, "holdout label set is empty");
  std::vector<RoomSample> held, rest;
  std::vector<std::vector<std::string>> held_queries;
  for (const auto& room : rooms) {
    if (room.object_labels.empty()) continue;
    auto objects = pipeline.query_objects(room);
    if (mentions(objects, holdout)) {
      held.push_back(room);
      held_queries.push_back(std::move(objects));
    } else {
      rest.push_back(room);
    }
  }
  if (held.empty()) fail(ErrorKind::kValidation, "no room's query mentions a holdout label");

  const RoomSplit split = split_rooms(rest, spec);
  pipeline.fit(split.train, split.validation, holdout);

  HoldoutReport report;
  report.training_rooms = split.train.size();
  EvalOptions opts = options;
  opts.split = options.split.empty() ? "holdout" : options.split;
  report.overall =
      evaluate([&](const RoomSample& r) { return pipeline.classify(r); }, held, room_labels, opts);
  // Per-object rows need per-room correctness; rerun the (deterministic)
  // classifier rather than threading it out of evaluate().
  for (const auto& label : holdout) {
    HoldoutObjectResult row{label, {}};
    for (std::size_t i = 0; i < held.size(); ++i) {
      if (std::find(held_queries[i].begin(), held_queries[i].end(), label) == held_queries[i].end()) continue;
      ++row.tally.total;
      try {
        if (pipeline.classify(held[i]).predicted == held[i].label) ++row.tally.correct;
      } catch (const std::exception&) {
      }
    }
    report.per_object.push_back(std::move(row));
  }
  return report;
}

EvalReport transfer_experiment(std::span<const RoomSample> train_rooms, const LabelSpace& train_space,
                               std::span<const RoomSample> test_rooms, const LabelSpace& test_space,
                               Pipeline& pipeline, const SplitSpec& spec, const EvalOptions& options) {
  if (train_space.room_labels() != test_space.room_labels())
    fail(ErrorKind::kValidation, "label spaces '" + train_space.name() + "' and '" + test_space.name() +
                                     "' do not share room labels");
  const RoomSplit split = split_rooms(train_rooms, spec);
  pipeline.fit(split.train, split.validation, {});
  EvalOptions opts = options;
  if (opts.split.empty()) opts.split = "transfer:" + train_space.name() + "->" + test_space.name();
  return evaluate([&](const RoomSample& r) { return pipeline.classify(r); }, test_rooms, test_space.room_labels(),
                  opts);
}

}  // namespace scenesense
