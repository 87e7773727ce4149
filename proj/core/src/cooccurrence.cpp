#include "scenesense/cooccurrence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "scenesense/error.hpp"
#include "scenesense/io.hpp"
#include "scenesense/query.hpp"

namespace scenesense {

const char* to_string(CooccurrenceSource source) {
  return source == CooccurrenceSource::kGroundTruth ? "ground_truth" : "proxy";
}

const char* to_string(CountingMode mode) {
  return mode == CountingMode::kPresence ? "presence" : "multiplicity";
}

namespace {

Distribution uniform(std::size_t n) { return Distribution(n, 1.0 / static_cast<double>(n)); }

double parse_number(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::kParse, std::string("bad ") + what + " value '" + s + "'");
  }
}

}  // namespace

CooccurrenceTable CooccurrenceTable::ground_truth(std::vector<std::string> object_labels,
                                                  std::vector<std::string> room_labels,
                                                  std::vector<std::uint64_t> counts, double alpha,
                                                  std::string label_space, CountingMode mode) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail(ErrorKind::kValidation, "smoothing alpha must be >= 0");
  if (room_labels.empty()) fail(ErrorKind::kValidation, "co-occurrence table needs room labels");
  if (counts.size() != object_labels.size() * room_labels.size())
    fail(ErrorKind::kValidation, "count matrix has the wrong shape");
  CooccurrenceTable t;
  t.source_ = CooccurrenceSource::kGroundTruth;
  t.counting_ = mode;
  t.alpha_ = alpha;
  t.label_space_ = std::move(label_space);
  t.object_labels_ = std::move(object_labels);
  t.room_labels_ = std::move(room_labels);
  t.counts_ = std::move(counts);
  t.index_labels();
  return t;
}

CooccurrenceTable CooccurrenceTable::proxy(std::vector<std::string> object_labels,
                                           std::vector<std::string> room_labels,
                                           std::vector<double> probabilities, std::string label_space) {
  if (room_labels.empty()) fail(ErrorKind::kValidation, "co-occurrence table needs room labels");
  const std::size_t r = room_labels.size();
  if (probabilities.size() != object_labels.size() * r)
    fail(ErrorKind::kValidation, "probability matrix has the wrong shape");
  for (std::size_t o = 0; o < object_labels.size(); ++o) {
    double sum = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      const double p = probabilities[o * r + j];
      if (!(p >= 0.0)) fail(ErrorKind::kValidation, "proxy row '" + object_labels[o] + "' has a negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      fail(ErrorKind::kValidation, "proxy row '" + object_labels[o] + "' does not sum to 1");
  }
  CooccurrenceTable t;
  t.source_ = CooccurrenceSource::kProxy;
  t.alpha_ = 0.0;
  t.label_space_ = std::move(label_space);
  t.object_labels_ = std::move(object_labels);
  t.room_labels_ = std::move(room_labels);
  t.probabilities_ = std::move(probabilities);
  t.index_labels();
  return t;
}

void CooccurrenceTable::index_labels() {
  object_lookup_.clear();
  room_lookup_.clear();
  for (std::size_t i = 0; i < object_labels_.size(); ++i)
    if (!object_lookup_.emplace(object_labels_[i], i).second)
      fail(ErrorKind::kValidation, "duplicate object label '" + object_labels_[i] + "' in table");
  for (std::size_t i = 0; i < room_labels_.size(); ++i)
    if (!room_lookup_.emplace(room_labels_[i], i).second)
      fail(ErrorKind::kValidation, "duplicate room label '" + room_labels_[i] + "' in table");
}

std::uint64_t CooccurrenceTable::count(std::size_t object, std::size_t room) const {
  return count_row(object)[room];
}

std::span<const std::uint64_t> CooccurrenceTable::count_row(std::size_t object) const {
  if (source_ != CooccurrenceSource::kGroundTruth)
    fail(ErrorKind::kConfig, "proxy co-occurrence tables carry no counts");
  return std::span<const std::uint64_t>(counts_).subspan(object * num_rooms(), num_rooms());
}

std::ptrdiff_t CooccurrenceTable::object_index(std::string_view object) const {
  auto it = object_lookup_.find(object);
  return it == object_lookup_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

std::ptrdiff_t CooccurrenceTable::room_index(std::string_view room) const {
  auto it = room_lookup_.find(room);
  return it == room_lookup_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
}

Distribution CooccurrenceTable::conditional_row(std::size_t object) const {
  if (source_ == CooccurrenceSource::kGroundTruth) return smooth_counts(count_row(object), alpha_);
  auto first = probabilities_.begin() + static_cast<std::ptrdiff_t>(object * num_rooms());
  return Distribution(first, first + static_cast<std::ptrdiff_t>(num_rooms()));
}

Distribution CooccurrenceTable::conditional(std::string_view object) const {
  const auto idx = object_index(object);
  if (idx < 0) return uniform(num_rooms());
  return conditional_row(static_cast<std::size_t>(idx));
}

std::string CooccurrenceTable::to_csv() const {
  std::vector<std::string> header{"object"};
  header.insert(header.end(), room_labels_.begin(), room_labels_.end());
  std::string out = csv_row(header);
  for (std::size_t o = 0; o < num_objects(); ++o) {
    std::vector<std::string> row{object_labels_[o]};
    for (std::size_t r = 0; r < num_rooms(); ++r) {
      row.push_back(source_ == CooccurrenceSource::kGroundTruth
                        ? std::to_string(counts_[o * num_rooms() + r])
                        : format_double(probabilities_[o * num_rooms() + r]));
    }
    out += csv_row(row);
  }
  return out;
}

nlohmann::json CooccurrenceTable::sidecar() const {
  return {{"source", to_string(source_)},
          {"alpha", alpha_},
          {"label_space", label_space_},
          {"counting", to_string(counting_)}};
}

CooccurrenceTable CooccurrenceTable::from_csv(std::string_view csv, const nlohmann::json& sidecar) {
  const auto rows = parse_csv(csv);
  if (rows.empty() || rows.front().size() < 2) fail(ErrorKind::kParse, "co-occurrence CSV has no header");
  std::vector<std::string> rooms(rows.front().begin() + 1, rows.front().end());
  std::vector<std::string> objects;
  std::vector<double> values;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != rooms.size() + 1)
      fail(ErrorKind::kParse, "co-occurrence CSV row " + std::to_string(i + 1) + " has the wrong width");
    objects.push_back(rows[i][0]);
    for (std::size_t j = 1; j < rows[i].size(); ++j) values.push_back(parse_number(rows[i][j], "table"));
  }
  const std::string source = sidecar.value("source", "ground_truth");
  const std::string space = sidecar.value("label_space", "");
  if (source == "proxy") return proxy(std::move(objects), std::move(rooms), std::move(values), space);
  if (source != "ground_truth") fail(ErrorKind::kParse, "unknown co-occurrence source '" + source + "'");
  std::vector<std::uint64_t> counts;
  counts.reserve(values.size());
  for (double v : values) {
    if (v < 0 || v != std::floor(v)) fail(ErrorKind::kParse, "ground-truth counts must be nonnegative integers");
    counts.push_back(static_cast<std::uint64_t>(v));
  }
  const CountingMode mode =
      sidecar.value("counting", "presence") == "multiplicity" ? CountingMode::kMultiplicity : CountingMode::kPresence;
  return ground_truth(std::move(objects), std::move(rooms), std::move(counts), sidecar.value("alpha", 1.0), space,
                      mode);
}

void CooccurrenceTable::save(const std::filesystem::path& csv_path,
                             const std::filesystem::path& sidecar_path) const {
  write_file_atomic(csv_path, to_csv());
  write_json_file(sidecar_path, sidecar());
}

CooccurrenceTable CooccurrenceTable::load(const std::filesystem::path& csv_path,
                                          const std::filesystem::path& sidecar_path) {
  return from_csv(read_text_file(csv_path), read_json_file(sidecar_path));
}

CooccurrenceTable count_cooccurrences(std::span<const RoomSample> rooms, const LabelSpace& space, double alpha,
                                      CountingMode mode) {
  if (rooms.empty()) fail(ErrorKind::kValidation, "no training rooms");
  const std::size_t nr = space.num_rooms();
  std::vector<std::uint64_t> counts(space.num_objects() * nr, 0);
  for (const auto& room : rooms) {
    if (!room.label) fail(ErrorKind::kValidation, "training room '" + room.room_id + "' has no label");
    const auto r = space.room_index(*room.label);
    if (!r) fail(ErrorKind::kValidation, "training room '" + room.room_id + "' has label outside room_labels");
    std::set<std::size_t> seen;
    for (const auto& label : room.object_labels) {
      const auto o = space.object_index(label);
      if (!o) continue;
      if (mode == CountingMode::kPresence && !seen.insert(*o).second) continue;
      ++counts[*o * nr + *r];
    }
  }
  return CooccurrenceTable::ground_truth(space.object_labels(), space.room_labels(), std::move(counts), alpha,
                                         space.name(), mode);
}

Distribution smooth_counts(std::span<const std::uint64_t> counts, double alpha) {
  const std::size_t n = counts.size();
  double total = 0.0;
  for (auto c : counts) total += static_cast<double>(c);
  const double denom = total + alpha * static_cast<double>(n);
  if (denom <= 0.0) return uniform(n);
  Distribution out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = (static_cast<double>(counts[i]) + alpha) / denom;
  return out;
}

Distribution softmax(std::span<const double> scores) {
  if (scores.empty()) return {};
  const double peak = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(peak)) fail(ErrorKind::kDegenerate, "softmax over non-finite scores");
  Distribution out(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - peak);
    sum += out[i];
  }
  for (auto& p : out) p /= sum;
  return out;
}

Distribution conditional_proxy(const LmScorer& scorer, std::string_view object, const LabelSpace& space) {
  const std::string obj(object);
  std::vector<std::string> queries;
  queries.reserve(space.num_rooms());
  for (const auto& room : space.room_labels()) queries.push_back(zero_shot_sentence({&obj, 1}, room));
  const auto scores = scorer.batch_score(queries);
  if (scores.size() != queries.size())
    fail(ErrorKind::kProtocol, "scorer returned " + std::to_string(scores.size()) + " scores for " +
                                   std::to_string(queries.size()) + " queries");
  return softmax(scores);
}

CooccurrenceTable build_proxy_table(const LmScorer& scorer, const LabelSpace& space) {
  std::vector<double> probabilities;
  probabilities.reserve(space.num_objects() * space.num_rooms());
  for (const auto& object : space.object_labels()) {
    const auto row = conditional_proxy(scorer, object, space);
    probabilities.insert(probabilities.end(), row.begin(), row.end());
  }
  return CooccurrenceTable::proxy(space.object_labels(), space.room_labels(), std::move(probabilities), space.name());
}

double entropy(std::span<const double> distribution) {
  double sum = 0.0;
  double h = 0.0;
  for (double p : distribution) {
    if (!(p >= 0.0)) fail(ErrorKind::kValidation, "distribution has a negative or NaN entry");
    sum += p;
    if (p > 0.0) h -= p * std::log(p);
  }
  if (std::abs(sum - 1.0) > 1e-6) fail(ErrorKind::kValidation, "distribution does not sum to 1");
  return h < 0.0 ? 0.0 : h;
}

InformativenessIndex::InformativenessIndex(std::map<std::string, double> entropies, std::size_t num_rooms)
    : entropies_(entropies.begin(), entropies.end()), num_rooms_(num_rooms) {}

double InformativenessIndex::entropy_of(std::string_view object) const {
  auto it = entropies_.find(object);
  if (it != entropies_.end()) return it->second;
  return num_rooms_ > 0 ? std::log(static_cast<double>(num_rooms_)) : std::numeric_limits<double>::infinity();
}

bool InformativenessIndex::contains(std::string_view object) const { return entropies_.contains(object); }

std::string InformativenessIndex::to_csv() const {
  std::string out = csv_row({"object_label", "entropy"});
  for (const auto& [label, h] : entropies_) out += csv_row({label, format_double(h)});
  return out;
}

InformativenessIndex InformativenessIndex::from_csv(std::string_view csv, std::size_t num_rooms) {
  const auto rows = parse_csv(csv);
  std::map<std::string, double> entries;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() != 2) fail(ErrorKind::kParse, "informativeness CSV row " + std::to_string(i + 1) + " needs 2 fields");
    entries[rows[i][0]] = parse_number(rows[i][1], "entropy");
  }
  return InformativenessIndex(std::move(entries), num_rooms);
}

InformativenessIndex build_index(const CooccurrenceTable& table) {
  std::map<std::string, double> entries;
  for (std::size_t o = 0; o < table.num_objects(); ++o)
    entries[table.object_labels()[o]] = entropy(table.conditional_row(o));
  return InformativenessIndex(std::move(entries), table.num_rooms());
}

std::vector<std::string> select_informative(std::span<const std::string> present_labels,
                                            const InformativenessIndex& index, const SelectionConfig& cfg) {
  if (cfg.k < 1) fail(ErrorKind::kValidation, "selection k must be at least 1");
  if (present_labels.empty()) fail(ErrorKind::kValidation, "cannot select objects from an empty room");
  std::vector<std::string> distinct;
  std::set<std::string_view> seen;
  for (const auto& label : present_labels)
    if (seen.insert(label).second) distinct.push_back(label);
  std::vector<double> h(distinct.size());
  std::vector<std::size_t> order(distinct.size());
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    h[i] = index.entropy_of(distinct[i]);
    order[i] = i;
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (h[a] != h[b]) return h[a] < h[b];
    if (cfg.tie_break == TieBreak::kLexicographic) return distinct[a] < distinct[b];
    return false;
  });
  std::vector<std::string> out;
  const std::size_t take = std::min(cfg.k, distinct.size());
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(distinct[order[i]]);
  return out;
}

}  // namespace scenesense
