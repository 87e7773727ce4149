#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace scenesense {

/// Object and room vocabularies for one labelling scheme (e.g. mpcat40).
///
/// `label_map` points from this space's object labels into another space;
/// each entry is an ordered candidate list because raw data sometimes maps
/// one label to several targets. `aliases` rewrites raw labels (typically
/// misspellings) before anything else looks at them.
class LabelSpace {
 public:
  LabelSpace() = default;
  LabelSpace(std::string name, std::vector<std::string> object_labels,
             std::vector<std::string> room_labels,
             std::set<std::string> rejected_object_labels = {});

  const std::string& name() const { return name_; }
  const std::vector<std::string>& object_labels() const { return object_labels_; }
  const std::vector<std::string>& room_labels() const { return room_labels_; }
  const std::set<std::string>& rejected_object_labels() const { return rejected_; }
  const std::map<std::string, std::string>& aliases() const { return aliases_; }
  const std::map<std::string, std::vector<std::string>>& label_map() const { return label_map_; }
  /// Room labels that may appear in raw data but are never classified
  /// ("none" plus outdoor regions by default).
  const std::set<std::string>& excluded_room_labels() const { return excluded_rooms_; }

  std::size_t num_rooms() const { return room_labels_.size(); }
  std::size_t num_objects() const { return object_labels_.size(); }

  bool has_object(std::string_view label) const;
  bool has_room(std::string_view label) const;
  bool is_rejected(std::string_view label) const;
  bool is_excluded_room(std::string_view label) const;
  std::optional<std::size_t> room_index(std::string_view label) const;
  std::optional<std::size_t> object_index(std::string_view label) const;

  /// Applies the alias table; labels without an alias pass through.
  std::string canonical(std::string_view raw) const;

  void set_aliases(std::map<std::string, std::string> aliases);
  void set_label_map(std::map<std::string, std::vector<std::string>> label_map);
  void set_excluded_room_labels(std::set<std::string> labels);

  /// Throws Error(kValidation) when an invariant is broken.
  void validate() const;

  nlohmann::json to_json() const;
  static LabelSpace from_json(const nlohmann::json& doc);

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  void reindex();

  std::string name_;
  std::vector<std::string> object_labels_;
  std::vector<std::string> room_labels_;
  std::set<std::string> rejected_;
  std::map<std::string, std::string> aliases_;
  std::map<std::string, std::vector<std::string>> label_map_;
  std::set<std::string> excluded_rooms_{"none", "yard", "balcony", "porch"};
  std::map<std::string, std::size_t, std::less<>> room_lookup_;
  std::map<std::string, std::size_t, std::less<>> object_lookup_;
};

/// Labels treated as "unlabeled" in raw data.
bool is_unlabeled(std::string_view label);

LabelSpace load_label_space(const std::filesystem::path& path);

}  // namespace scenesense
