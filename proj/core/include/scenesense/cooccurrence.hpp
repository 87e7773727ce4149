#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scenesense/label_space.hpp"
#include "scenesense/lm_backend.hpp"
#include "scenesense/scene_graph.hpp"

namespace scenesense {

enum class CooccurrenceSource { kGroundTruth, kProxy };

/// Presence counts a room once per object label; multiplicity counts every
/// instance.
enum class CountingMode { kPresence, kMultiplicity };

const char* to_string(CooccurrenceSource source);
const char* to_string(CountingMode mode);

using Distribution = std::vector<double>;

/// Object -> room conditional table p(r|o). Ground-truth tables store counts
/// and smooth on read; proxy tables store normalized rows directly.
class CooccurrenceTable {
 public:
  static CooccurrenceTable ground_truth(std::vector<std::string> object_labels,
                                        std::vector<std::string> room_labels,
                                        std::vector<std::uint64_t> counts, double alpha,
                                        std::string label_space = {},
                                        CountingMode mode = CountingMode::kPresence);
  static CooccurrenceTable proxy(std::vector<std::string> object_labels,
                                 std::vector<std::string> room_labels,
                                 std::vector<double> probabilities, std::string label_space = {});

  CooccurrenceSource source() const { return source_; }
  CountingMode counting() const { return counting_; }
  double alpha() const { return alpha_; }
  const std::string& label_space() const { return label_space_; }
  const std::vector<std::string>& object_labels() const { return object_labels_; }
  const std::vector<std::string>& room_labels() const { return room_labels_; }
  std::size_t num_objects() const { return object_labels_.size(); }
  std::size_t num_rooms() const { return room_labels_.size(); }

  /// Ground-truth only.
  std::uint64_t count(std::size_t object, std::size_t room) const;
  std::span<const std::uint64_t> count_row(std::size_t object) const;

  /// Full distribution over room_labels(); unseen objects get the uniform
  /// distribution, as do all-zero rows when alpha is 0.
  Distribution conditional(std::string_view object) const;
  Distribution conditional_row(std::size_t object) const;
  std::ptrdiff_t object_index(std::string_view object) const;
  std::ptrdiff_t room_index(std::string_view room) const;

  /// CSV body (header: "object", then room labels) and the JSON sidecar.
  std::string to_csv() const;
  nlohmann::json sidecar() const;
  static CooccurrenceTable from_csv(std::string_view csv, const nlohmann::json& sidecar);

  void save(const std::filesystem::path& csv_path, const std::filesystem::path& sidecar_path) const;
  static CooccurrenceTable load(const std::filesystem::path& csv_path,
                                const std::filesystem::path& sidecar_path);

 private:
  CooccurrenceTable() = default;
  void index_labels();

  CooccurrenceSource source_ = CooccurrenceSource::kGroundTruth;
  CountingMode counting_ = CountingMode::kPresence;
  double alpha_ = 1.0;
  std::string label_space_;
  std::vector<std::string> object_labels_;
  std::vector<std::string> room_labels_;
  std::vector<std::uint64_t> counts_;
  std::vector<double> probabilities_;
  std::map<std::string, std::size_t, std::less<>> object_lookup_;
  std::map<std::string, std::size_t, std::less<>> room_lookup_;
};

/// Tallies labeled rooms. Object labels outside the space are ignored.
CooccurrenceTable count_cooccurrences(std::span<const RoomSample> rooms, const LabelSpace& space,
                                      double alpha = 1.0, CountingMode mode = CountingMode::kPresence);

/// (counts + alpha) / (row total + alpha * |rooms|); uniform for a zero
/// denominator.
Distribution smooth_counts(std::span<const std::uint64_t> counts, double alpha);

/// Numerically stable softmax.
Distribution softmax(std::span<const double> scores);

/// Proxy row for one object: softmax over rooms of the scorer's score for
/// "A room containing o is called a(n) r."
Distribution conditional_proxy(const LmScorer& scorer, std::string_view object, const LabelSpace& space);

CooccurrenceTable build_proxy_table(const LmScorer& scorer, const LabelSpace& space);

/// Shannon entropy in nats with 0 log 0 = 0. Rejects negative entries and
/// vectors whose mass is off by more than 1e-6.
double entropy(std::span<const double> distribution);

/// Per-object entropy of p(r|o). Lower is more informative.
class InformativenessIndex {
 public:
  InformativenessIndex() = default;
  InformativenessIndex(std::map<std::string, double> entropies, std::size_t num_rooms);

  /// ln|rooms| for objects the index has never seen.
  double entropy_of(std::string_view object) const;
  bool contains(std::string_view object) const;
  const std::map<std::string, double, std::less<>>& entries() const { return entropies_; }
  std::size_t num_rooms() const { return num_rooms_; }

  std::string to_csv() const;
  static InformativenessIndex from_csv(std::string_view csv, std::size_t num_rooms);

 private:
  std::map<std::string, double, std::less<>> entropies_;
  std::size_t num_rooms_ = 0;
};

InformativenessIndex build_index(const CooccurrenceTable& table);

enum class TieBreak { kLexicographic, kStableInputOrder };

struct SelectionConfig {
  std::size_t k = 3;
  TieBreak tie_break = TieBreak::kLexicographic;
};

/// The min(k, distinct) present labels of lowest entropy, ascending.
std::vector<std::string> select_informative(std::span<const std::string> present_labels,
                                            const InformativenessIndex& index,
                                            const SelectionConfig& cfg);

}  // namespace scenesense
