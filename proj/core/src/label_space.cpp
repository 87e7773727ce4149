#include "scenesense/label_space.hpp"

#include <unordered_set>

#include "scenesense/error.hpp"
#include "scenesense/io.hpp"

namespace scenesense {

namespace {

std::vector<std::string> string_list(const nlohmann::json& doc, const char* key) {
  std::vector<std::string> out;
  if (!doc.contains(key)) return out;
  const auto& arr = doc.at(key);
  if (!arr.is_array()) fail(ErrorKind::kParse, std::string("label space field '") + key + "' must be an array");
  for (const auto& v : arr) {
    if (!v.is_string()) fail(ErrorKind::kParse, std::string("label space field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

bool is_unlabeled(std::string_view label) { return label.empty() || label == "none"; }

LabelSpace::LabelSpace(std::string name, std::vector<std::string> object_labels,
                       std::vector<std::string> room_labels,
                       std::set<std::string> rejected_object_labels)
    : name_(std::move(name)),
      object_labels_(std::move(object_labels)),
      room_labels_(std::move(room_labels)),
      rejected_(std::move(rejected_object_labels)) {
  reindex();
}

void LabelSpace::reindex() {
  room_lookup_.clear();
  object_lookup_.clear();
  for (std::size_t i = 0; i < room_labels_.size(); ++i) room_lookup_.emplace(room_labels_[i], i);
  for (std::size_t i = 0; i < object_labels_.size(); ++i) object_lookup_.emplace(object_labels_[i], i);
}

bool LabelSpace::has_object(std::string_view label) const { return object_lookup_.contains(label); }
bool LabelSpace::has_room(std::string_view label) const { return room_lookup_.contains(label); }

bool LabelSpace::is_rejected(std::string_view label) const {
  return is_unlabeled(label) || rejected_.contains(std::string(label));
}

bool LabelSpace::is_excluded_room(std::string_view label) const {
  return excluded_rooms_.contains(std::string(label));
}

std::optional<std::size_t> LabelSpace::room_index(std::string_view label) const {
  auto it = room_lookup_.find(label);
  if (it == room_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> LabelSpace::object_index(std::string_view label) const {
  auto it = object_lookup_.find(label);
  if (it == object_lookup_.end()) return std::nullopt;
  return it->second;
}

std::string LabelSpace::canonical(std::string_view raw) const {
  auto it = aliases_.find(std::string(raw));
  return it == aliases_.end() ? std::string(raw) : it->second;
}

void LabelSpace::set_aliases(std::map<std::string, std::string> aliases) { aliases_ = std::move(aliases); }

void LabelSpace::set_label_map(std::map<std::string, std::vector<std::string>> label_map) {
  label_map_ = std::move(label_map);
}

void LabelSpace::set_excluded_room_labels(std::set<std::string> labels) {
  excluded_rooms_ = std::move(labels);
}

void LabelSpace::validate() const {
  auto check_list = [this](const std::vector<std::string>& labels, const char* what) {
    if (labels.empty()) fail(ErrorKind::kValidation, "label space '" + name_ + "' has no " + what);
    std::unordered_set<std::string> seen;
    for (const auto& l : labels) {
      if (!seen.insert(l).second)
        fail(ErrorKind::kValidation, "duplicate " + std::string(what) + " '" + l + "' in label space '" + name_ + "'");
      if (is_rejected(l))
        fail(ErrorKind::kValidation, "rejected label '" + l + "' listed among " + what);
    }
  };
  check_list(object_labels_, "object labels");
  check_list(room_labels_, "room labels");
  for (const auto& [key, targets] : label_map_) {
    if (!has_object(key))
      fail(ErrorKind::kValidation, "label_map key '" + key + "' is not an object label of '" + name_ + "'");
    if (targets.empty()) fail(ErrorKind::kValidation, "label_map entry '" + key + "' is empty");
  }
}

nlohmann::json LabelSpace::to_json() const {
  nlohmann::json doc;
  doc["name"] = name_;
  doc["object_labels"] = object_labels_;
  doc["room_labels"] = room_labels_;
  doc["rejected_object_labels"] = rejected_;
  doc["aliases"] = aliases_;
  doc["label_map"] = label_map_;
  doc["excluded_rooms"] = excluded_rooms_;
  return doc;
}

LabelSpace LabelSpace::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) fail(ErrorKind::kParse, "label space document must be a JSON object");
  if (!doc.contains("name") || !doc.at("name").is_string())
    fail(ErrorKind::kParse, "label space requires a string 'name'");
  auto rejected = string_list(doc, doc.contains("rejected_object_labels") ? "rejected_object_labels" : "rejected");
  LabelSpace space(doc.at("name").get<std::string>(), string_list(doc, "object_labels"),
                   string_list(doc, "room_labels"),
                   std::set<std::string>(rejected.begin(), rejected.end()));
  if (doc.contains("aliases")) {
    const auto& a = doc.at("aliases");
    if (!a.is_object()) fail(ErrorKind::kParse, "label space 'aliases' must be an object");
    std::map<std::string, std::string> aliases;
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!it.value().is_string()) fail(ErrorKind::kParse, "alias '" + it.key() + "' must map to a string");
      aliases.emplace(it.key(), it.value().get<std::string>());
    }
    space.set_aliases(std::move(aliases));
  }
  if (doc.contains("label_map")) {
    const auto& m = doc.at("label_map");
    if (!m.is_object()) fail(ErrorKind::kParse, "label space 'label_map' must be an object");
    std::map<std::string, std::vector<std::string>> label_map;
    for (auto it = m.begin(); it != m.end(); ++it) {
      std::vector<std::string> targets;
      if (it.value().is_string()) {
        targets.push_back(it.value().get<std::string>());
      } else if (it.value().is_array()) {
        for (const auto& t : it.value()) {
          if (!t.is_string()) fail(ErrorKind::kParse, "label_map '" + it.key() + "' must hold strings");
          targets.push_back(t.get<std::string>());
        }
      } else {
        fail(ErrorKind::kParse, "label_map '" + it.key() + "' must be a string or an array");
      }
      label_map.emplace(it.key(), std::move(targets));
    }
    space.set_label_map(std::move(label_map));
  }
  if (doc.contains("excluded_rooms")) {
    auto excluded = string_list(doc, "excluded_rooms");
    space.set_excluded_room_labels({excluded.begin(), excluded.end()});
  }
  space.validate();
  return space;
}

LabelSpace load_label_space(const std::filesystem::path& path) {
  return LabelSpace::from_json(read_json_file(path));
}

}  // namespace scenesense
