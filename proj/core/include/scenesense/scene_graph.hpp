#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenesense/geometry.hpp"
#include "scenesense/label_space.hpp"

namespace scenesense {

struct ObjectNode {
  std::string id;
  std::string label;
  std::string room_id;
  Vec3 position{0.0, 0.0, 0.0};
  Aabb bbox;

  friend bool operator==(const ObjectNode&, const ObjectNode&) = default;
};

struct RoomNode {
  std::string id;
  std::optional<std::string> label;  // absent at inference time
  std::string building_id;
  Aabb bbox;
  std::vector<std::string> object_ids;  // derived from ObjectNode::room_id

  friend bool operator==(const RoomNode&, const RoomNode&) = default;
};

/// Rooms, objects, and their containment edges. Objects are the source of
/// truth for containment; `RoomNode::object_ids` is rebuilt from them and
/// keeps object insertion order.
class SceneGraph {
 public:
  SceneGraph() = default;
  SceneGraph(std::string label_space, std::vector<RoomNode> rooms, std::vector<ObjectNode> objects);

  const std::string& label_space() const { return label_space_; }
  const std::vector<RoomNode>& rooms() const { return rooms_; }
  const std::vector<ObjectNode>& objects() const { return objects_; }
  std::vector<std::string> buildings() const;

  const RoomNode* find_room(const std::string& id) const;
  const ObjectNode* find_object(const std::string& id) const;
  std::vector<const ObjectNode*> objects_in(const RoomNode& room) const;

  /// Id uniqueness, dangling references, and box sanity.
  void validate() const;

  friend bool operator==(const SceneGraph&, const SceneGraph&) = default;

 private:
  void relink();

  std::string label_space_;
  std::vector<RoomNode> rooms_;
  std::vector<ObjectNode> objects_;
  std::map<std::string, std::size_t> room_index_;
  std::map<std::string, std::size_t> object_index_;
};

/// The view of a room the classifiers work with: labels only, in scene
/// insertion order (duplicates kept).
struct RoomSample {
  std::string room_id;
  std::string building_id;
  std::optional<std::string> label;
  std::vector<std::string> object_labels;

  friend bool operator==(const RoomSample&, const RoomSample&) = default;
};

std::vector<RoomSample> room_samples(const SceneGraph& graph);

struct LoadReport {
  struct Flag {
    std::string object_id;
    std::string label;
  };
  std::vector<Flag> unknown_object_labels;
  std::size_t aliased_labels = 0;
};

struct LoadedGraph {
  SceneGraph graph;
  LoadReport report;
};

LoadedGraph parse_scene_graph(const nlohmann::json& doc, const LabelSpace& space);
LoadedGraph load_scene_graph(const std::filesystem::path& path, const LabelSpace& space);
nlohmann::json to_json(const SceneGraph& graph);

}  // namespace scenesense
