#include <gtest/gtest.h>

#include "scenesense/error.hpp"
#include "scenesense/scene_graph.hpp"
#include "support.hpp"

namespace scenesense {
namespace {

using nlohmann::json;

LabelSpace space() { return testing::toy_space(); }

json one_room_doc() {
  return {{"rooms", {{{"id", "r1"}, {"building", 0}, {"label", "bathroom"}, {"bbox_min", {0, 0, 0}},
                      {"bbox_max", {2, 2, 2}}}}},
          {"objects", {{{"id", 7}, {"label", "toilet"}, {"room_id", "r1"}, {"position", {1, 1, 0.5}}}}}};
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kInternal;
}

TEST(SceneGraph, MinimalDocument) {
  const auto loaded = parse_scene_graph(one_room_doc(), space());
  EXPECT_EQ(loaded.graph.rooms().size(), 1u);
  EXPECT_EQ(loaded.graph.objects().size(), 1u);
  const auto& obj = loaded.graph.objects().front();
  EXPECT_EQ(obj.id, "7");  // integer ids are stringified
  EXPECT_EQ(obj.bbox.min, obj.position);
  EXPECT_EQ(loaded.graph.rooms().front().object_ids, std::vector<std::string>{"7"});
  EXPECT_EQ(loaded.graph.rooms().front().building_id, "0");
}

TEST(SceneGraph, DanglingRoomReferenceIsValidationError) {
  auto doc = one_room_doc();
  doc["objects"][0]["room_id"] = "nowhere";
  EXPECT_EQ(kind_of([&] { parse_scene_graph(doc, space()); }), ErrorKind::kValidation);
}

TEST(SceneGraph, DuplicateIdsAreValidationErrors) {
  auto doc = one_room_doc();
  doc["rooms"].push_back(doc["rooms"][0]);
  EXPECT_EQ(kind_of([&] { parse_scene_graph(doc, space()); }), ErrorKind::kValidation);
}

TEST(SceneGraph, InvertedBoxIsValidationError) {
  auto doc = one_room_doc();
  doc["rooms"][0]["bbox_min"] = {3, 0, 0};
  EXPECT_EQ(kind_of([&] { parse_scene_graph(doc, space()); }), ErrorKind::kValidation);
}

TEST(SceneGraph, UnknownRoomLabelIsRejected) {
  auto doc = one_room_doc();
  doc["rooms"][0]["label"] = "ballroom";
  EXPECT_EQ(kind_of([&] { parse_scene_graph(doc, space()); }), ErrorKind::kValidation);
}

TEST(SceneGraph, MalformedFieldsAreParseErrors) {
  auto doc = one_room_doc();
  doc["objects"][0]["position"] = {1, 2};
  EXPECT_EQ(kind_of([&] { parse_scene_graph(doc, space()); }), ErrorKind::kParse);
  EXPECT_EQ(kind_of([&] { parse_scene_graph(json{{"rooms", json::array()}}, space()); }), ErrorKind::kParse);
}

TEST(SceneGraph, LabelSpaceMismatch) {
  auto doc = one_room_doc();
  doc["label_space"] = "mpcat40";
  EXPECT_EQ(kind_of([&] { parse_scene_graph(doc, space()); }), ErrorKind::kValidation);
}

TEST(SceneGraph, AliasesAndUnknownLabelsAreReported) {
  auto doc = one_room_doc();
  doc["objects"].push_back({{"id", "8"}, {"label", "television"}, {"room_id", "r1"}, {"position", {1, 1, 1}}});
  doc["objects"].push_back({{"id", "9"}, {"label", "piano"}, {"room_id", "r1"}, {"position", {1, 1, 1}}});
  const auto loaded = parse_scene_graph(doc, space());
  EXPECT_EQ(loaded.report.aliased_labels, 1u);
  EXPECT_EQ(loaded.graph.find_object("8")->label, "tv");
  ASSERT_EQ(loaded.report.unknown_object_labels.size(), 1u);
  EXPECT_EQ(loaded.report.unknown_object_labels[0].label, "piano");
}

TEST(SceneGraph, RoundTripsThroughJson) {
  const auto loaded = load_scene_graph(testing::data_dir() / "toy_graph.json", space());
  const auto again = parse_scene_graph(to_json(loaded.graph), space());
  EXPECT_EQ(again.graph, loaded.graph);
}

TEST(SceneGraph, RoomSamplesCarryLabelsInOrder) {
  const auto loaded = load_scene_graph(testing::data_dir() / "toy_graph.json", space());
  const auto samples = room_samples(loaded.graph);
  ASSERT_EQ(samples.size(), loaded.graph.rooms().size());
  EXPECT_EQ(samples[0].room_id, "r00");
  EXPECT_EQ(samples[0].label, "bathroom");
  EXPECT_EQ(samples[0].object_labels, (std::vector<std::string>{"toilet", "sink", "towel", "wall"}));
  EXPECT_FALSE(samples[20].label.has_value());
  EXPECT_EQ(loaded.graph.buildings(), (std::vector<std::string>{"b0", "b1", "b2", "b3"}));
}

TEST(SceneGraph, MissingFileIsConfigError) {
  EXPECT_EQ(kind_of([&] { load_scene_graph("/nonexistent/graph.json", space()); }), ErrorKind::kConfig);
}

TEST(Aabb, ContainmentIsClosed) {
  const Aabb box{{0, 0, 0}, {1, 2, 3}};
  EXPECT_TRUE(box.contains({0, 0, 0}));
  EXPECT_TRUE(box.contains({1, 2, 3}));
  EXPECT_FALSE(box.contains({1.0000001, 0, 0}));
  EXPECT_EQ(box.center(), (Vec3{0.5, 1, 1.5}));
  EXPECT_EQ(box.extents(), (Vec3{1, 2, 3}));
}

}  // namespace
}  // namespace scenesense
