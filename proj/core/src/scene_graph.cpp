#include "scenesense/scene_graph.hpp"

#include <set>

#include "scenesense/error.hpp"
#include "scenesense/io.hpp"

namespace scenesense {

SceneGraph::SceneGraph(std::string label_space, std::vector<RoomNode> rooms,
                       std::vector<ObjectNode> objects)
    : label_space_(std::move(label_space)), rooms_(std::move(rooms)), objects_(std::move(objects)) {
  relink();
}

void SceneGraph::relink() {
  room_index_.clear();
  object_index_.clear();
  for (std::size_t i = 0; i < rooms_.size(); ++i) {
    if (!room_index_.emplace(rooms_[i].id, i).second)
      fail(ErrorKind::kValidation, "duplicate room id '" + rooms_[i].id + "'");
    rooms_[i].object_ids.clear();
  }
  for (std::size_t i = 0; i < objects_.size(); ++i) {
    const auto& obj = objects_[i];
    if (!object_index_.emplace(obj.id, i).second)
      fail(ErrorKind::kValidation, "duplicate object id '" + obj.id + "'");
    auto it = room_index_.find(obj.room_id);
    if (it == room_index_.end())
      fail(ErrorKind::kValidation, "object '" + obj.id + "' references unknown room '" + obj.room_id + "'");
    rooms_[it->second].object_ids.push_back(obj.id);
  }
}

std::vector<std::string> SceneGraph::buildings() const {
  std::set<std::string> ids;
  for (const auto& r : rooms_) ids.insert(r.building_id);
  return {ids.begin(), ids.end()};
}

const RoomNode* SceneGraph::find_room(const std::string& id) const {
  auto it = room_index_.find(id);
  return it == room_index_.end() ? nullptr : &rooms_[it->second];
}

const ObjectNode* SceneGraph::find_object(const std::string& id) const {
  auto it = object_index_.find(id);
  return it == object_index_.end() ? nullptr : &objects_[it->second];
}

std::vector<const ObjectNode*> SceneGraph::objects_in(const RoomNode& room) const {
  std::vector<const ObjectNode*> out;
  out.reserve(room.object_ids.size());
  for (const auto& id : room.object_ids) out.push_back(find_object(id));
  return out;
}

void SceneGraph::validate() const {
  for (const auto& r : rooms_) {
    if (!r.bbox.well_formed()) fail(ErrorKind::kValidation, "room '" + r.id + "' has bbox_min > bbox_max");
  }
  for (const auto& o : objects_) {
    if (!o.bbox.well_formed()) fail(ErrorKind::kValidation, "object '" + o.id + "' has bbox_min > bbox_max");
    if (!o.bbox.contains(o.position))
      fail(ErrorKind::kValidation, "object '" + o.id + "' position lies outside its bounding box");
  }
}

std::vector<RoomSample> room_samples(const SceneGraph& graph) {
  std::vector<RoomSample> out;
  out.reserve(graph.rooms().size());
  for (const auto& room : graph.rooms()) {
    RoomSample s{room.id, room.building_id, room.label, {}};
    for (const auto* obj : graph.objects_in(room)) s.object_labels.push_back(obj->label);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::string where(const char* kind, std::size_t index, const char* field) {
  return std::string(kind) + "[" + std::to_string(index) + "]." + field;
}

std::string read_id(const nlohmann::json& node, const char* kind, std::size_t index, const char* field) {
  if (!node.contains(field)) fail(ErrorKind::kParse, where(kind, index, field) + " is missing");
  const auto& v = node.at(field);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  fail(ErrorKind::kParse, where(kind, index, field) + " must be a string or integer");
}

Vec3 read_vec3(const nlohmann::json& node, const char* kind, std::size_t index, const char* field) {
  if (!node.contains(field)) fail(ErrorKind::kParse, where(kind, index, field) + " is missing");
  const auto& v = node.at(field);
  if (!v.is_array() || v.size() != 3) fail(ErrorKind::kParse, where(kind, index, field) + " must be [x, y, z]");
  Vec3 out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) fail(ErrorKind::kParse, where(kind, index, field) + " must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v[0], v[1], v[2]}); }

}  // namespace

LoadedGraph parse_scene_graph(const nlohmann::json& doc, const LabelSpace& space) {
  if (!doc.is_object()) fail(ErrorKind::kParse, "scene graph document must be a JSON object");
  for (const char* key : {"rooms", "objects"}) {
    if (!doc.contains(key) || !doc.at(key).is_array())
      fail(ErrorKind::kParse, std::string("scene graph requires array '") + key + "'");
  }
  std::string space_name = space.name();
  if (doc.contains("label_space")) {
    if (!doc.at("label_space").is_string()) fail(ErrorKind::kParse, "'label_space' must be a string");
    space_name = doc.at("label_space").get<std::string>();
    if (space_name != space.name())
      fail(ErrorKind::kValidation,
           "document label space '" + space_name + "' does not match '" + space.name() + "'");
  }

  LoadReport report;
  std::vector<RoomNode> rooms;
  const auto& jrooms = doc.at("rooms");
  for (std::size_t i = 0; i < jrooms.size(); ++i) {
    const auto& jr = jrooms[i];
    if (!jr.is_object()) fail(ErrorKind::kParse, "rooms[" + std::to_string(i) + "] must be an object");
    RoomNode room;
    room.id = read_id(jr, "rooms", i, "id");
    room.building_id = jr.contains("building") ? read_id(jr, "rooms", i, "building") : std::string("0");
    if (jr.contains("label") && !jr.at("label").is_null()) {
      if (!jr.at("label").is_string()) fail(ErrorKind::kParse, where("rooms", i, "label") + " must be a string");
      std::string label = jr.at("label").get<std::string>();
      if (!space.has_room(label) && !space.is_excluded_room(label))
        fail(ErrorKind::kValidation, "room '" + room.id + "' has label '" + label + "' not in room_labels");
      room.label = std::move(label);
    }
    room.bbox = {read_vec3(jr, "rooms", i, "bbox_min"), read_vec3(jr, "rooms", i, "bbox_max")};
    rooms.push_back(std::move(room));
  }

  std::vector<ObjectNode> objects;
  const auto& jobjs = doc.at("objects");
  for (std::size_t i = 0; i < jobjs.size(); ++i) {
    const auto& jo = jobjs[i];
    if (!jo.is_object()) fail(ErrorKind::kParse, "objects[" + std::to_string(i) + "] must be an object");
    ObjectNode obj;
    obj.id = read_id(jo, "objects", i, "id");
    std::string raw;
    if (jo.contains("label") && !jo.at("label").is_null()) {
      if (!jo.at("label").is_string()) fail(ErrorKind::kParse, where("objects", i, "label") + " must be a string");
      raw = jo.at("label").get<std::string>();
    }
    obj.label = space.canonical(raw);
    if (obj.label != raw) ++report.aliased_labels;
    if (!space.has_object(obj.label)) report.unknown_object_labels.push_back({obj.id, obj.label});
    obj.room_id = read_id(jo, "objects", i, "room_id");
    obj.position = read_vec3(jo, "objects", i, "position");
    if (jo.contains("bbox_min") || jo.contains("bbox_max")) {
      obj.bbox = {read_vec3(jo, "objects", i, "bbox_min"), read_vec3(jo, "objects", i, "bbox_max")};
    } else {
      obj.bbox = {obj.position, obj.position};
    }
    objects.push_back(std::move(obj));
  }

  LoadedGraph out{SceneGraph(space_name, std::move(rooms), std::move(objects)), std::move(report)};
  out.graph.validate();
  return out;
}

LoadedGraph load_scene_graph(const std::filesystem::path& path, const LabelSpace& space) {
  try {
    return parse_scene_graph(read_json_file(path), space);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kParse || e.kind() == ErrorKind::kValidation)
      throw Error(e.kind(), path.string() + ": " + std::string(e.what()));
    throw;
  }
}

nlohmann::json to_json(const SceneGraph& graph) {
  nlohmann::json doc;
  doc["label_space"] = graph.label_space();
  auto rooms = nlohmann::json::array();
  for (const auto& r : graph.rooms()) {
    nlohmann::json jr;
    jr["id"] = r.id;
    jr["label"] = r.label ? nlohmann::json(*r.label) : nlohmann::json(nullptr);
    jr["building"] = r.building_id;
    jr["bbox_min"] = vec_json(r.bbox.min);
    jr["bbox_max"] = vec_json(r.bbox.max);
    rooms.push_back(std::move(jr));
  }
  auto objects = nlohmann::json::array();
  for (const auto& o : graph.objects()) {
    nlohmann::json jo;
    jo["id"] = o.id;
    jo["label"] = o.label;
    jo["room_id"] = o.room_id;
    jo["position"] = vec_json(o.position);
    jo["bbox_min"] = vec_json(o.bbox.min);
    jo["bbox_max"] = vec_json(o.bbox.max);
    objects.push_back(std::move(jo));
  }
  doc["rooms"] = std::move(rooms);
  doc["objects"] = std::move(objects);
  return doc;
}

}  // namespace scenesense
