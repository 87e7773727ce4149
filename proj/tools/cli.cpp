#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scenesense/classifiers.hpp"
#include "scenesense/cooccurrence.hpp"
#include "scenesense/error.hpp"
#include "scenesense/eval.hpp"
#include "scenesense/http_backend.hpp"
#include "scenesense/io.hpp"
#include "scenesense/label_space.hpp"
#include "scenesense/lm_backend.hpp"
#include "scenesense/mlp.hpp"
#include "scenesense/preprocess.hpp"
#include "scenesense/query.hpp"
#include "scenesense/scene_graph.hpp"

namespace scenesense::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTableCsv = "cooccurrence.csv";
constexpr const char* kTableSidecar = "cooccurrence.json";
constexpr const char* kIndexCsv = "informativeness.csv";
constexpr const char* kHeadFile = "head.json";

/// Everything a command may need. Defaults < --config file < flags.
struct RunConfig {
  std::vector<std::string> graphs;
  std::string input;
  std::string label_space;
  std::string target_label_space;
  std::string out;
  std::string report_out;
  std::string artifacts;
  std::string head;
  std::string rows;
  std::string val_rows;
  std::string predictions;
  std::string report;
  std::string per_room_dir;

  std::string method;
  std::string mode = "gt";
  std::string counting = "presence";
  std::string backend;
  std::string endpoint;
  std::string model;
  std::string mock_table;
  std::size_t embed_dim = 256;
  std::uint64_t embed_seed = 0;

  std::size_t k = 3;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::string schedule = "1:2,2:3,3:4";
  std::string fit_on = "all";

  bool no_positions = false;
  bool no_room_size = false;
  std::size_t max_objects = 100;
  int decimals = 3;

  std::vector<double> split{0.5, 0.2, 0.3};
  bool split_given = false;
  std::string split_unit = "building";
  bool full_dataset = false;
  std::string holdout;
  std::vector<std::string> transfer_graphs;
  std::string transfer_label_space;
  std::string transfer_artifacts;
  bool strict = false;
  std::size_t workers = 1;

  TrainConfig train;
  HttpBackendConfig http;
};

/// Applies `doc[key]` to `target` unless the flag was given explicitly.
template <typename T>
void overlay(const json& doc, const char* key, T& target, const CLI::App& app, const char* flag) {
  if (!doc.contains(key)) return;
  if (auto* opt = app.get_option_no_throw(flag); opt && opt->count() > 0) return;
  try {
    target = doc.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("config key '") + key + "': " + e.what());
  }
}

void apply_config_file(const fs::path& path, RunConfig& rc, const CLI::App& sub) {
  const json doc = read_json_file(path);
  if (!doc.is_object()) fail(ErrorKind::kConfig, "config file must hold a JSON object");
  overlay(doc, "graphs", rc.graphs, sub, "--graphs");
  overlay(doc, "input", rc.input, sub, "--input");
  overlay(doc, "label_space", rc.label_space, sub, "--label-space");
  overlay(doc, "target_label_space", rc.target_label_space, sub, "--target-space");
  overlay(doc, "artifacts", rc.artifacts, sub, "--artifacts");
  overlay(doc, "head", rc.head, sub, "--head");
  overlay(doc, "method", rc.method, sub, "--method");
  overlay(doc, "mode", rc.mode, sub, "--mode");
  overlay(doc, "counting", rc.counting, sub, "--counting");
  overlay(doc, "backend", rc.backend, sub, "--backend");
  overlay(doc, "endpoint", rc.endpoint, sub, "--endpoint");
  overlay(doc, "model", rc.model, sub, "--model");
  overlay(doc, "mock_table", rc.mock_table, sub, "--mock-table");
  overlay(doc, "embed_dim", rc.embed_dim, sub, "--embed-dim");
  overlay(doc, "embed_seed", rc.embed_seed, sub, "--embed-seed");
  overlay(doc, "k", rc.k, sub, "--k");
  overlay(doc, "alpha", rc.alpha, sub, "--alpha");
  overlay(doc, "seed", rc.seed, sub, "--seed");
  overlay(doc, "schedule", rc.schedule, sub, "--schedule");
  overlay(doc, "fit_on", rc.fit_on, sub, "--fit-on");
  overlay(doc, "no_positions", rc.no_positions, sub, "--no-positions");
  overlay(doc, "no_room_size", rc.no_room_size, sub, "--no-room-size");
  overlay(doc, "max_objects", rc.max_objects, sub, "--max-objects");
  overlay(doc, "decimals", rc.decimals, sub, "--decimals");
  if (doc.contains("split")) rc.split_given = true;
  overlay(doc, "split", rc.split, sub, "--split");
  overlay(doc, "split_unit", rc.split_unit, sub, "--split-unit");
  overlay(doc, "full_dataset", rc.full_dataset, sub, "--full-dataset");
  overlay(doc, "holdout", rc.holdout, sub, "--holdout");
  overlay(doc, "transfer_graphs", rc.transfer_graphs, sub, "--transfer-graphs");
  overlay(doc, "transfer_label_space", rc.transfer_label_space, sub, "--transfer-label-space");
  overlay(doc, "transfer_artifacts", rc.transfer_artifacts, sub, "--transfer-artifacts");
  overlay(doc, "strict", rc.strict, sub, "--strict");
  overlay(doc, "workers", rc.workers, sub, "--workers");
  if (doc.contains("train")) {
    TrainConfig from_file = rc.train;
    from_file.apply_json(doc.at("train"));
    auto keep = [&](const char* flag) {
      auto* opt = sub.get_option_no_throw(flag);
      return opt && opt->count() > 0;
    };
    if (!keep("--epochs")) rc.train.epochs = from_file.epochs;
    if (!keep("--batch-size")) rc.train.batch_size = from_file.batch_size;
    if (!keep("--lr")) rc.train.learning_rate = from_file.learning_rate;
    if (!keep("--hidden")) rc.train.hidden = from_file.hidden;
    if (!keep("--best-val")) rc.train.select_best_validation = from_file.select_best_validation;
    rc.train.beta1 = from_file.beta1;
    rc.train.beta2 = from_file.beta2;
    rc.train.epsilon = from_file.epsilon;
    rc.train.weight_decay = from_file.weight_decay;
    rc.train.lr_step = from_file.lr_step;
    rc.train.lr_gamma = from_file.lr_gamma;
  }
  if (doc.contains("http")) rc.http.apply_json(doc.at("http"));
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse:
    case ErrorKind::kValidation:
    case ErrorKind::kConfig:
    case ErrorKind::kDegenerate: return kInputError;
    case ErrorKind::kIo: return kIoError;
    case ErrorKind::kBackend:
    case ErrorKind::kAuth:
    case ErrorKind::kProtocol: return kBackendError;
    case ErrorKind::kTraining:
    case ErrorKind::kInternal: return kInternalError;
  }
  return kInternalError;
}

void require(const std::string& value, const char* what) {
  if (value.empty()) fail(ErrorKind::kConfig, std::string("missing required ") + what);
}

void require_file(const fs::path& path, const std::string& what) {
  std::error_code ec;
  if (!fs::exists(path, ec)) fail(ErrorKind::kConfig, "missing " + what + ": " + path.string() + " (input not found)");
}

CountingMode counting_mode(const std::string& s) {
  if (s == "presence") return CountingMode::kPresence;
  if (s == "multiplicity") return CountingMode::kMultiplicity;
  fail(ErrorKind::kConfig, "counting must be presence|multiplicity");
}

SplitSpec split_spec(const RunConfig& rc, std::vector<double> ratios) {
  if (ratios.size() != 3) fail(ErrorKind::kConfig, "--split needs three ratios (train,val,test)");
  SplitSpec spec;
  spec.ratios = {ratios[0], ratios[1], ratios[2]};
  if (rc.split_unit == "building") {
    spec.unit = SplitUnit::kBuilding;
  } else if (rc.split_unit == "room") {
    spec.unit = SplitUnit::kRoom;
  } else {
    fail(ErrorKind::kConfig, "--split-unit must be building|room");
  }
  spec.seed = rc.seed;
  spec.validate();
  return spec;
}

BootstrapSchedule parse_schedule(const std::string& text) {
  BootstrapSchedule out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) fail(ErrorKind::kConfig, "schedule entries look like k:n, got '" + item + "'");
    try {
      out.emplace_back(std::stoul(item.substr(0, colon)), std::stoul(item.substr(colon + 1)));
    } catch (const std::exception&) {
      fail(ErrorKind::kConfig, "bad schedule entry '" + item + "'");
    }
  }
  if (out.empty()) fail(ErrorKind::kConfig, "empty bootstrap schedule");
  return out;
}

std::set<std::string> parse_label_set(const std::string& text) {
  std::set<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    if (first != std::string::npos) out.insert(item.substr(first, last - first + 1));
  }
  return out;
}

struct Corpus {
  LabelSpace space;
  std::vector<SceneGraph> graphs;
  std::vector<RoomSample> rooms;

  std::vector<RoomSample> labeled() const {
    std::vector<RoomSample> out;
    for (const auto& r : rooms)
      if (r.label && !r.object_labels.empty()) out.push_back(r);
    return out;
  }
};

Corpus load_corpus(const std::vector<std::string>& paths, const std::string& space_path) {
  require(space_path, "--label-space");
  if (paths.empty()) fail(ErrorKind::kConfig, "missing required --graphs");
  Corpus corpus{load_label_space(space_path), {}, {}};
  std::set<std::string> ids;
  for (const auto& p : paths) {
    auto loaded = load_scene_graph(p, corpus.space);
    for (auto& sample : room_samples(loaded.graph)) {
      if (!ids.insert(sample.room_id).second)
        fail(ErrorKind::kValidation, "room id '" + sample.room_id + "' appears in more than one graph");
      corpus.rooms.push_back(std::move(sample));
    }
    corpus.graphs.push_back(std::move(loaded.graph));
  }
  return corpus;
}

std::vector<std::string> basenames(const std::vector<std::string>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(fs::path(p).filename().string());
  return out;
}

std::shared_ptr<const LmScorer> make_scorer(const RunConfig& rc) {
  if (rc.backend.empty()) fail(ErrorKind::kConfig, "this command needs --backend mock|http");
  if (rc.backend == "mock") {
    if (rc.mock_table.empty()) return std::make_shared<TableScorer>();
    const json doc = read_json_file(rc.mock_table);
    std::map<std::string, double> entries;
    try {
      if (doc.contains("entries")) entries = doc.at("entries").get<std::map<std::string, double>>();
      return std::make_shared<TableScorer>(std::move(entries), doc.value("default_score", 0.0));
    } catch (const json::exception& e) {
      fail(ErrorKind::kParse, std::string("malformed mock table: ") + e.what());
    }
  }
  if (rc.backend == "http") {
    HttpBackendConfig cfg = rc.http;
    require(cfg.endpoint, "--endpoint for the http backend");
    require(cfg.model, "--model for the http backend");
    return std::make_shared<HttpScorer>(std::move(cfg));
  }
  fail(ErrorKind::kConfig, "--backend must be mock|http");
}

std::shared_ptr<const TextEmbedder> make_embedder(const RunConfig& rc) {
  if (rc.backend.empty()) fail(ErrorKind::kConfig, "this command needs --backend mock|http");
  if (rc.backend == "mock") return hash_embedder(rc.embed_dim, rc.embed_seed);
  if (rc.backend == "http") {
    HttpBackendConfig cfg = rc.http;
    require(cfg.endpoint, "--endpoint for the http backend");
    require(cfg.model, "--model for the http backend");
    return std::make_shared<HttpEmbedder>(std::move(cfg));
  }
  fail(ErrorKind::kConfig, "--backend must be mock|http");
}

CooccurrenceTable load_table(const std::string& dir) {
  require(dir, "--artifacts");
  const fs::path csv = fs::path(dir) / kTableCsv;
  const fs::path side = fs::path(dir) / kTableSidecar;
  require_file(csv, "co-occurrence table artifact");
  require_file(side, "co-occurrence sidecar artifact");
  return CooccurrenceTable::load(csv, side);
}

InformativenessIndex load_index(const std::string& dir, const LabelSpace& space) {
  require(dir, "--artifacts");
  const fs::path csv = fs::path(dir) / kIndexCsv;
  require_file(csv, "informativeness index artifact");
  return InformativenessIndex::from_csv(read_text_file(csv), space.num_rooms());
}

MlpHead load_head(const RunConfig& rc) {
  const fs::path path = !rc.head.empty() ? fs::path(rc.head)
                                         : (rc.artifacts.empty() ? fs::path() : fs::path(rc.artifacts) / kHeadFile);
  if (path.empty()) fail(ErrorKind::kConfig, "missing trained head artifact (pass --head or --artifacts)");
  require_file(path, "trained head artifact");
  return MlpHead::from_json(read_json_file(path));
}

void check_embedder_matches(const TextEmbedder& embedder, const MlpHead& head) {
  if (embedder.dimension() != 0 && embedder.dimension() != head.input_dim())
    fail(ErrorKind::kConfig, "embedder dimension " + std::to_string(embedder.dimension()) +
                                 " does not match the head input " + std::to_string(head.input_dim()));
}

json base_snapshot(const RunConfig& rc, const std::string& command) {
  json snap{{"command", command}, {"k", rc.k}, {"seed", rc.seed}, {"graphs", basenames(rc.graphs)}};
  if (!rc.method.empty()) snap["method"] = rc.method;
  if (!rc.backend.empty()) {
    snap["backend"] = rc.backend;
    if (rc.backend == "http") snap["model"] = rc.http.model;
    if (rc.backend == "mock") snap["embed"] = {{"dimension", rc.embed_dim}, {"seed", rc.embed_seed}};
  }
  return snap;
}

// ---------------------------------------------------------------- commands

int cmd_preprocess(const RunConfig& rc, std::ostream& out) {
  require(rc.input, "--input");
  require(rc.label_space, "--label-space");
  require(rc.out, "--out");
  const LabelSpace space = load_label_space(rc.label_space);
  std::optional<LabelSpace> target;
  if (!rc.target_label_space.empty()) target = load_label_space(rc.target_label_space);
  const auto loaded = load_scene_graph(rc.input, space);
  const auto result = preprocess(loaded, space, target ? &*target : nullptr);
  const fs::path report_path = rc.report_out.empty() ? fs::path(rc.out + ".report.txt") : fs::path(rc.report_out);
  const std::string text = result.report.to_text();
  write_json_file(rc.out, to_json(result.graph));
  write_file_atomic(report_path, text);
  out << text;
  return kOk;
}

int cmd_cooccur(const RunConfig& rc, std::ostream& out) {
  require(rc.out, "--out");
  const Corpus corpus = load_corpus(rc.graphs, rc.label_space);
  std::optional<CooccurrenceTable> table;
  if (rc.mode == "gt") {
    auto rooms = corpus.labeled();
    if (rc.fit_on == "train") {
      rooms = split_rooms(rooms, split_spec(rc, rc.split)).train;
    } else if (rc.fit_on != "all") {
      fail(ErrorKind::kConfig, "--fit-on must be all|train");
    }
    table = count_cooccurrences(rooms, corpus.space, rc.alpha, counting_mode(rc.counting));
  } else if (rc.mode == "proxy") {
    if (rc.backend.empty()) fail(ErrorKind::kConfig, "proxy mode needs a scoring backend (--backend)");
    table = build_proxy_table(*make_scorer(rc), corpus.space);
  } else {
    fail(ErrorKind::kConfig, "--mode must be gt|proxy");
  }
  const auto index = build_index(*table);
  const fs::path dir(rc.out);
  table->save(dir / kTableCsv, dir / kTableSidecar);
  write_file_atomic(dir / kIndexCsv, index.to_csv());
  out << "wrote " << (dir / kTableCsv).string() << ", " << (dir / kIndexCsv).string() << "\n";
  return kOk;
}

int cmd_classify(const RunConfig& rc, std::ostream& out) {
  require(rc.out, "--out");
  require(rc.method, "--method");
  const auto method = parse_method(rc.method);
  const Corpus corpus = load_corpus(rc.graphs, rc.label_space);
  const SelectionConfig sel{rc.k, TieBreak::kLexicographic};

  Classifier classify;
  std::shared_ptr<const LmScorer> scorer;
  std::shared_ptr<const TextEmbedder> embedder;
  std::shared_ptr<const CooccurrenceTable> table;
  std::shared_ptr<const InformativenessIndex> index;
  std::shared_ptr<const MlpHead> head;
  switch (method) {
    case ClassifierMethod::kStatistical: {
      table = std::make_shared<CooccurrenceTable>(load_table(rc.artifacts));
      const auto mode = counting_mode(rc.counting);
      classify = [table, mode](const RoomSample& r) { return classify_statistical(r, *table, mode); };
      break;
    }
    case ClassifierMethod::kZeroShot: {
      index = std::make_shared<InformativenessIndex>(load_index(rc.artifacts, corpus.space));
      scorer = make_scorer(rc);
      classify = [&, sel](const RoomSample& r) { return classify_zero_shot(r, *scorer, *index, sel, corpus.space); };
      break;
    }
    case ClassifierMethod::kEmbedding: {
      head = std::make_shared<MlpHead>(load_head(rc));
      index = std::make_shared<InformativenessIndex>(load_index(rc.artifacts, corpus.space));
      embedder = make_embedder(rc);
      check_embedder_matches(*embedder, *head);
      classify = [&, sel](const RoomSample& r) { return classify_embedding(r, *embedder, *head, *index, sel); };
      break;
    }
  }
  std::vector<json> rows;
  for (const auto& room : corpus.rooms) {
    if (room.object_labels.empty()) continue;
    rows.push_back(classify(room).to_json());
  }
  write_jsonl_file(rc.out, rows);
  out << "classified " << rows.size() << " rooms -> " << rc.out << "\n";
  return kOk;
}

int cmd_bootstrap(const RunConfig& rc, std::ostream& out) {
  require(rc.out, "--out");
  const Corpus corpus = load_corpus(rc.graphs, rc.label_space);
  const auto index = load_index(rc.artifacts, corpus.space);
  const auto schedule = parse_schedule(rc.schedule);
  std::vector<json> rows;
  for (const auto& room : corpus.labeled()) {
    for (const auto& row : bootstrap_queries(room, index, schedule))
      rows.push_back({{"text", row.text}, {"label", row.label}, {"room_id", row.room_id}});
  }
  write_jsonl_file(rc.out, rows);
  out << "wrote " << rows.size() << " rows -> " << rc.out << "\n";
  return kOk;
}

std::vector<BootstrapRow> read_rows(const std::string& path) {
  std::vector<BootstrapRow> rows;
  for (const auto& j : read_jsonl_file(path)) {
    try {
      rows.push_back({j.at("text").get<std::string>(), j.at("label").get<std::string>(),
                      j.value("room_id", std::string()), {}});
    } catch (const json::exception& e) {
      fail(ErrorKind::kParse, path + ": row needs string 'text' and 'label': " + e.what());
    }
  }
  return rows;
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  require(rc.rows, "--rows");
  require(rc.label_space, "--label-space");
  require(rc.out, "--out");
  const LabelSpace space = load_label_space(rc.label_space);
  const auto rows = read_rows(rc.rows);
  std::vector<BootstrapRow> val;
  if (!rc.val_rows.empty()) val = read_rows(rc.val_rows);
  const auto embedder = make_embedder(rc);
  const auto trained = train_embedding_head(rows, *embedder, space.room_labels(), rc.train, val);
  const auto& result = trained.result;
  write_json_file(rc.out, result.head.to_json());
  write_file_atomic(rc.out + ".curve.csv", result.curve_csv());
  const auto& last = result.curve.back();
  out << "trained on " << rows.size() << " rows (" << trained.unique_texts << " distinct texts); initial loss "
      << result.initial_loss << ", final train loss " << last.train_loss << ", train accuracy "
      << last.train_accuracy << "\n";
  return kOk;
}

int cmd_export_structured(const RunConfig& rc, std::ostream& out) {
  require(rc.out, "--out");
  const Corpus corpus = load_corpus(rc.graphs, rc.label_space);
  StructuredStringConfig cfg;
  cfg.include_positions = !rc.no_positions;
  cfg.include_room_size = !rc.no_room_size;
  cfg.max_objects = rc.max_objects;
  cfg.decimals = rc.decimals;
  std::vector<json> rows;
  std::size_t skipped = 0;
  for (const auto& graph : corpus.graphs) {
    for (const auto& room : graph.rooms()) {
      const auto objects = graph.objects_in(room);
      const auto text = render_structured(room, objects, cfg);
      if (!text) ++skipped;
      rows.push_back({{"text", text.value_or("")},
                      {"label", room.label ? json(*room.label) : json(nullptr)},
                      {"room_id", room.id},
                      {"skipped", !text.has_value()}});
      if (text && !rc.per_room_dir.empty()) write_file_atomic(fs::path(rc.per_room_dir) / (room.id + ".txt"), *text);
    }
  }
  write_jsonl_file(rc.out, rows);
  out << "exported " << rows.size() - skipped << " rooms (" << skipped << " skipped) -> " << rc.out << "\n";
  return kOk;
}

ClassificationResult prediction_from_json(const json& j) {
  ClassificationResult r;
  try {
    r.room_id = j.at("room_id").get<std::string>();
    r.predicted = j.at("predicted").get<std::string>();
    r.method = parse_method(j.value("method", std::string("statistical")));
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("prediction row needs 'room_id' and 'predicted': ") + e.what());
  }
  return r;
}

void write_report(const RunConfig& rc, const EvalReport& report, const json& doc, std::ostream& out) {
  write_json_file(rc.out, doc);
  const fs::path out_path(rc.out);
  write_file_atomic(out_path.parent_path() / (out_path.stem().string() + ".confusion.csv"), report.confusion_csv());
  out << report.method << " on " << report.split << ": " << report.correct << "/" << report.evaluated << " = "
      << format_fixed(100.0 * report.overall_accuracy(), 1) << "%";
  if (!report.failures.empty()) out << " (" << report.failures.size() << " failures excluded)";
  out << "\n";
}

std::unique_ptr<Pipeline> make_pipeline(const RunConfig& rc, const Corpus& corpus, const LabelSpace* inference_space,
                                        const std::string& inference_artifacts) {
  const auto method = parse_method(rc.method);
  const SelectionConfig sel{rc.k, TieBreak::kLexicographic};
  switch (method) {
    case ClassifierMethod::kStatistical:
      return std::make_unique<StatisticalPipeline>(corpus.space, rc.alpha, counting_mode(rc.counting));
    case ClassifierMethod::kZeroShot:
      return std::make_unique<ZeroShotPipeline>(make_scorer(rc), load_index(rc.artifacts, corpus.space), sel,
                                                corpus.space);
    case ClassifierMethod::kEmbedding: {
      auto train_index = load_index(rc.artifacts, corpus.space);
      auto infer_index = inference_space ? load_index(inference_artifacts, *inference_space) : train_index;
      return std::make_unique<EmbeddingPipeline>(make_embedder(rc), std::move(train_index), std::move(infer_index),
                                                 sel, rc.train, corpus.space.room_labels(),
                                                 parse_schedule(rc.schedule));
    }
  }
  fail(ErrorKind::kInternal, "unhandled method");
}

int cmd_eval(const RunConfig& rc, std::ostream& out) {
  require(rc.out, "--out");
  const Corpus corpus = load_corpus(rc.graphs, rc.label_space);
  const auto& labels = corpus.space.room_labels();
  json snap = base_snapshot(rc, "eval");
  snap["full_dataset"] = rc.full_dataset;
  snap["alpha"] = rc.alpha;
  snap["counting"] = rc.counting;
  EvalOptions opts;
  opts.strict = rc.strict;
  opts.workers = rc.workers;

  if (!rc.predictions.empty()) {
    std::vector<ClassificationResult> preds;
    for (const auto& j : read_jsonl_file(rc.predictions)) preds.push_back(prediction_from_json(j));
    opts.method = preds.empty() ? std::string("unknown") : to_string(preds.front().method);
    snap["predictions"] = fs::path(rc.predictions).filename().string();
    auto rooms = corpus.labeled();
    if (!rc.full_dataset) {
      const auto spec = split_spec(rc, rc.split);
      snap["split"] = spec.to_json();
      rooms = split_rooms(rooms, spec).test;
    }
    opts.split = rc.full_dataset ? "full" : "test";
    opts.config = snap;
    const auto report = evaluate_predictions(preds, rooms, labels, opts);
    write_report(rc, report, report.to_json(), out);
    return kOk;
  }

  require(rc.method, "--method (or --predictions)");
  opts.method = rc.method;
  if (parse_method(rc.method) == ClassifierMethod::kEmbedding) snap["train"] = rc.train.to_json();

  if (!rc.holdout.empty()) {
    const auto holdout = parse_label_set(rc.holdout);
    for (const auto& h : holdout)
      if (!corpus.space.has_object(h))
        fail(ErrorKind::kConfig, "holdout label '" + h + "' is not an object label of " + corpus.space.name());
    auto pipeline = make_pipeline(rc, corpus, nullptr, {});
    const auto spec = split_spec(rc, rc.split);
    snap["holdout"] = holdout;
    snap["split"] = spec.to_json();
    opts.config = snap;
    const auto report = holdout_experiment(corpus.labeled(), labels, holdout, *pipeline, spec, opts);
    write_report(rc, report.overall, report.to_json(), out);
    for (const auto& row : report.per_object) {
      out << "  " << row.label << ": " << row.tally.correct << "/" << row.tally.total << "\n";
    }
    return kOk;
  }

  if (!rc.transfer_graphs.empty()) {
    const Corpus test = load_corpus(rc.transfer_graphs, rc.transfer_label_space);
    auto pipeline = make_pipeline(rc, corpus, &test.space, rc.transfer_artifacts);
    // The transfer protocol trains on a 40/60 train/validation split unless
    // --split says otherwise.
    snap["transfer_graphs"] = basenames(rc.transfer_graphs);
    const auto spec = split_spec(rc, rc.split_given ? rc.split : std::vector<double>{0.4, 0.6, 0.0});
    snap["split"] = spec.to_json();
    opts.config = snap;
    const auto report = transfer_experiment(corpus.labeled(), corpus.space, test.labeled(), test.space, *pipeline,
                                            spec, opts);
    write_report(rc, report, report.to_json(), out);
    return kOk;
  }

  const auto method = parse_method(rc.method);
  auto rooms = corpus.labeled();
  RoomSplit split;
  if (!rc.full_dataset || method == ClassifierMethod::kEmbedding ||
      (method == ClassifierMethod::kStatistical && rc.artifacts.empty())) {
    const auto spec = split_spec(rc, rc.split);
    split = split_rooms(rooms, spec);
    snap["split"] = spec.to_json();
    snap["realized_ratios"] = split.realized;
  }

  Classifier classify;
  std::unique_ptr<Pipeline> pipeline;
  std::shared_ptr<const CooccurrenceTable> table;
  std::shared_ptr<const MlpHead> head;
  std::shared_ptr<const TextEmbedder> embedder;
  std::shared_ptr<const InformativenessIndex> index;
  const SelectionConfig sel{rc.k, TieBreak::kLexicographic};
  if (method == ClassifierMethod::kStatistical && !rc.artifacts.empty()) {
    table = std::make_shared<CooccurrenceTable>(load_table(rc.artifacts));
    const auto mode = counting_mode(rc.counting);
    classify = [table, mode](const RoomSample& r) { return classify_statistical(r, *table, mode); };
  } else if (method == ClassifierMethod::kEmbedding && (!rc.head.empty())) {
    head = std::make_shared<MlpHead>(load_head(rc));
    embedder = make_embedder(rc);
    check_embedder_matches(*embedder, *head);
    index = std::make_shared<InformativenessIndex>(load_index(rc.artifacts, corpus.space));
    classify = [&, sel](const RoomSample& r) { return classify_embedding(r, *embedder, *head, *index, sel); };
  } else {
    pipeline = make_pipeline(rc, corpus, nullptr, {});
    pipeline->fit(split.train, split.validation, {});
    classify = [&](const RoomSample& r) { return pipeline->classify(r); };
  }
  const bool full = rc.full_dataset;
  opts.split = full ? "full" : "test";
  opts.config = snap;
  const auto report = evaluate(classify, full ? std::span<const RoomSample>(rooms) : std::span<const RoomSample>(split.test),
                               labels, opts);
  write_report(rc, report, report.to_json(), out);
  return kOk;
}

int cmd_report(const RunConfig& rc, std::ostream& out) {
  require(rc.report, "--report");
  require(rc.out, "--out");
  json doc = read_json_file(rc.report);
  if (doc.contains("overall")) doc = doc.at("overall");
  const auto report = EvalReport::from_json(doc);
  write_file_atomic(rc.out, report.per_label_csv());
  out << "wrote per-label accuracies for " << report.labels.size() << " labels -> " << rc.out << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  std::string config_path;
  std::vector<double> split_flag;

  CLI::App app{"Room classification over 3D scene graphs from object-room statistics", "scenesense"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file; flags override it");
    sub->add_option("--seed", rc.seed, "Seed for splits and training");
    sub->add_option("--label-space", rc.label_space, "Label space JSON");
    sub->add_option("--out", rc.out, "Output path");
  };
  auto graphs = [&](CLI::App* sub) { sub->add_option("--graphs", rc.graphs, "Scene-graph JSON files"); };
  auto backend = [&](CLI::App* sub) {
    sub->add_option("--backend", rc.backend, "mock|http");
    sub->add_option("--endpoint", rc.endpoint, "http backend base URL");
    sub->add_option("--model", rc.model, "Model name sent to the http backend");
    sub->add_option("--mock-table", rc.mock_table, "JSON {entries:{text:score}, default_score} for the mock scorer");
    sub->add_option("--embed-dim", rc.embed_dim, "Mock hash-embedder dimension");
    sub->add_option("--embed-seed", rc.embed_seed, "Mock hash-embedder seed");
  };
  auto selection = [&](CLI::App* sub) { sub->add_option("--k", rc.k, "Objects per query"); };
  auto training = [&](CLI::App* sub) {
    sub->add_option("--epochs", rc.train.epochs);
    sub->add_option("--batch-size", rc.train.batch_size);
    sub->add_option("--lr", rc.train.learning_rate);
    sub->add_option("--hidden", rc.train.hidden, "Hidden layer sizes");
    sub->add_flag("--best-val", rc.train.select_best_validation, "Keep the best-validation epoch");
  };
  auto splitting = [&](CLI::App* sub) {
    sub->add_option("--split", split_flag, "train,val,test ratios")->delimiter(',')->expected(3);
    sub->add_option("--split-unit", rc.split_unit, "building|room");
  };

  auto* pre = app.add_subcommand("preprocess", "Filter, reassign, and remap a raw scene graph");
  common(pre);
  pre->add_option("--input", rc.input, "Raw scene-graph JSON");
  pre->add_option("--target-space", rc.target_label_space, "Remap object labels into this label space");
  pre->add_option("--report-out", rc.report_out, "Report path (default <out>.report.txt)");

  auto* co = app.add_subcommand("cooccur", "Build the co-occurrence table and informativeness index");
  common(co);
  graphs(co);
  backend(co);
  splitting(co);
  co->add_option("--mode", rc.mode, "gt|proxy");
  co->add_option("--alpha", rc.alpha, "Laplace pseudo-count");
  co->add_option("--counting", rc.counting, "presence|multiplicity");
  co->add_option("--fit-on", rc.fit_on, "all|train (train uses --split)");

  auto* cl = app.add_subcommand("classify", "Classify every room");
  common(cl);
  graphs(cl);
  backend(cl);
  selection(cl);
  cl->add_option("--method", rc.method, "zeroshot|statistical|embedding");
  cl->add_option("--artifacts", rc.artifacts, "Directory with cooccur/train outputs");
  cl->add_option("--head", rc.head, "Trained head JSON");
  cl->add_option("--counting", rc.counting, "presence|multiplicity");

  auto* bs = app.add_subcommand("bootstrap", "Generate permutation training rows");
  common(bs);
  graphs(bs);
  bs->add_option("--artifacts", rc.artifacts, "Directory with informativeness.csv");
  bs->add_option("--schedule", rc.schedule, "k:n pairs, e.g. 1:2,2:3,3:4");

  auto* tr = app.add_subcommand("train", "Train the embedding head");
  common(tr);
  backend(tr);
  training(tr);
  tr->add_option("--rows", rc.rows, "Bootstrap rows JSON-lines");
  tr->add_option("--val-rows", rc.val_rows, "Validation rows JSON-lines");

  auto* ex = app.add_subcommand("export-structured", "Export structured room strings");
  common(ex);
  graphs(ex);
  ex->add_flag("--no-positions", rc.no_positions, "Omit object coordinates");
  ex->add_flag("--no-room-size", rc.no_room_size, "Omit the room-size block");
  ex->add_option("--max-objects", rc.max_objects, "Skip rooms with more objects");
  ex->add_option("--decimals", rc.decimals, "Rounding precision");
  ex->add_option("--per-room-dir", rc.per_room_dir, "Also write one <room_id>.txt per room");

  auto* ev = app.add_subcommand("eval", "Evaluate a method (test split, full dataset, holdout, transfer)");
  common(ev);
  graphs(ev);
  backend(ev);
  selection(ev);
  training(ev);
  splitting(ev);
  ev->add_option("--method", rc.method, "zeroshot|statistical|embedding");
  ev->add_option("--artifacts", rc.artifacts, "Directory with cooccur/train outputs");
  ev->add_option("--head", rc.head, "Trained head JSON (embedding; otherwise trained on the split)");
  ev->add_option("--predictions", rc.predictions, "Score an existing predictions JSON-lines file");
  ev->add_option("--alpha", rc.alpha, "Laplace pseudo-count when fitting the statistical baseline");
  ev->add_option("--counting", rc.counting, "presence|multiplicity");
  ev->add_option("--schedule", rc.schedule, "Bootstrap k:n pairs");
  ev->add_flag("--full-dataset", rc.full_dataset, "Evaluate every room instead of the test split");
  ev->add_option("--holdout", rc.holdout, "Comma-separated object labels to hold out");
  ev->add_option("--transfer-graphs", rc.transfer_graphs, "Test graphs in another object-label space");
  ev->add_option("--transfer-label-space", rc.transfer_label_space, "Label space of --transfer-graphs");
  ev->add_option("--transfer-artifacts", rc.transfer_artifacts, "Informativeness index for the transfer space");
  ev->add_flag("--strict", rc.strict, "Count classifier failures as wrong answers");
  ev->add_option("--workers", rc.workers, "Parallel classification workers");

  auto* rp = app.add_subcommand("report", "Per-label accuracy CSV from an eval report");
  common(rp);
  rp->add_option("--report", rc.report, "Eval report JSON");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "scenesense: " << e.what() << "\n";
    return kInputError;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!config_path.empty()) apply_config_file(config_path, rc, *sub);
    if (!split_flag.empty()) {
      rc.split = split_flag;
      rc.split_given = true;
    }
    rc.train.seed = rc.seed;
    rc.http.endpoint = rc.endpoint.empty() ? rc.http.endpoint : rc.endpoint;
    rc.http.model = rc.model.empty() ? rc.http.model : rc.model;
    if (rc.http.api_key.empty()) rc.http.api_key = HttpBackendConfig::api_key_from_env();

    const std::string name = sub->get_name();
    if (name == "preprocess") return cmd_preprocess(rc, out);
    if (name == "cooccur") return cmd_cooccur(rc, out);
    if (name == "classify") return cmd_classify(rc, out);
    if (name == "bootstrap") return cmd_bootstrap(rc, out);
    if (name == "train") return cmd_train(rc, out);
    if (name == "export-structured") return cmd_export_structured(rc, out);
    if (name == "eval") return cmd_eval(rc, out);
    if (name == "report") return cmd_report(rc, out);
    err << "scenesense: unknown subcommand " << name << "\n";
    return kInputError;
  } catch (const Error& e) {
    err << "scenesense: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "scenesense: internal error: " << e.what() << "\n";
    return kInternalError;
  }
}

}  // namespace scenesense::cli
