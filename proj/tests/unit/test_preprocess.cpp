#include <gtest/gtest.h>

#include <algorithm>

#include "scenesense/preprocess.hpp"
#include "support.hpp"

namespace scenesense {
namespace {

RoomNode room(const std::string& id, const char* label, Vec3 lo, Vec3 hi) {
  RoomNode r;
  r.id = id;
  if (label) r.label = label;
  r.building_id = "b";
  r.bbox = {lo, hi};
  return r;
}

ObjectNode object(const std::string& id, const std::string& label, const std::string& room_id, Vec3 pos) {
  return {id, label, room_id, pos, {pos, pos}};
}

LabelSpace mpcat() { return testing::standard_space(); }

std::vector<std::string> labels_in(const SceneGraph& g, const std::string& room_id) {
  std::vector<std::string> out;
  for (const auto* o : g.objects_in(*g.find_room(room_id))) out.push_back(o->label);
  return out;
}

TEST(Filter, RejectedObjectsAreDropped) {
  SceneGraph g("mpcat40", {room("a", "bathroom", {0, 0, 0}, {2, 2, 2})},
               {object("1", "wall", "a", {1, 1, 1}), object("2", "toilet", "a", {1, 1, 1})});
  const auto out = filter_objects(g, mpcat());
  EXPECT_EQ(labels_in(out.graph, "a"), std::vector<std::string>{"toilet"});
  EXPECT_EQ(out.report.removed_objects, 1u);
  EXPECT_EQ(out.report.removed_objects_by_label.at("wall"), 1u);
}

TEST(Filter, EmptiedRoomIsRemoved) {
  SceneGraph g("mpcat40", {room("a", "bathroom", {0, 0, 0}, {2, 2, 2})},
               {object("1", "wall", "a", {1, 1, 1}), object("2", "ceiling", "a", {1, 1, 1})});
  const auto out = filter_objects(g, mpcat());
  EXPECT_TRUE(out.graph.rooms().empty());
  EXPECT_EQ(out.report.removed_empty_rooms, std::vector<std::string>{"a"});
}

TEST(Filter, OutdoorRegionsAreRemoved) {
  SceneGraph g("mpcat40", {room("y", "yard", {0, 0, 0}, {2, 2, 2}), room("k", "kitchen", {3, 0, 0}, {5, 2, 2})},
               {object("1", "plant", "y", {1, 1, 1}), object("2", "appliances", "k", {4, 1, 1})});
  const auto out = filter_objects(g, mpcat());
  ASSERT_EQ(out.graph.rooms().size(), 1u);
  EXPECT_EQ(out.graph.rooms()[0].id, "k");
  EXPECT_EQ(out.graph.objects().size(), 1u);
  EXPECT_EQ(out.report.removed_excluded_rooms, std::vector<std::string>{"y"});
}

TEST(Filter, EmptyGraphStaysEmpty) {
  const auto out = filter_objects(SceneGraph("mpcat40", {}, {}), mpcat());
  EXPECT_TRUE(out.graph.rooms().empty());
  EXPECT_TRUE(out.graph.objects().empty());
}

TEST(Reassign, MovesObjectToContainingRoom) {
  SceneGraph g("mpcat40",
               {room("far", "office", {5, 5, 5}, {9, 9, 9}), room("near", "office", {-1, -1, -1}, {1, 1, 1})},
               {object("o", "chair", "far", {0, 0, 0}), object("p", "chair", "far", {6, 6, 6})});
  const auto out = reassign_objects(g);
  EXPECT_EQ(out.graph.find_object("o")->room_id, "near");
  EXPECT_EQ(out.graph.find_object("p")->room_id, "far");
  ASSERT_EQ(out.report.reassigned.size(), 1u);
  EXPECT_EQ(out.report.reassigned[0].from_room, "far");
  EXPECT_EQ(out.report.reassigned[0].to_room, "near");
}

TEST(Reassign, UncontainedObjectsAreFlaggedAgainstBruteForce) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> coord(-3.0, 9.0);
  SceneGraph base("mpcat40", {room("a", "office", {0, 0, 0}, {2, 2, 2}), room("b", "office", {4, 4, 4}, {6, 6, 6})},
                  {});
  std::vector<ObjectNode> objs;
  for (int i = 0; i < 200; ++i) {
    objs.push_back(object("o" + std::to_string(i), "chair", i % 2 ? "a" : "b", {coord(rng), coord(rng), coord(rng)}));
  }
  const SceneGraph g("mpcat40", base.rooms(), objs);
  const auto out = reassign_objects(g);
  std::vector<std::string> expected;
  for (const auto& o : objs) {
    const bool inside_any = std::any_of(g.rooms().begin(), g.rooms().end(),
                                        [&](const RoomNode& r) { return r.bbox.contains(o.position); });
    if (!inside_any) expected.push_back(o.id);
    const auto& moved = *out.graph.find_object(o.id);
    if (inside_any) {
      EXPECT_TRUE(out.graph.find_room(moved.room_id)->bbox.contains(o.position)) << o.id;
    } else {
      EXPECT_EQ(moved.room_id, o.room_id) << o.id;
    }
  }
  EXPECT_EQ(out.report.uncontained, expected);
}

TEST(Remap, FirstNonRejectedCandidateWins) {
  LabelSpace nyu("nyuclass", {"washing machine", "stairs", "bed", "toy"}, testing::standard_room_labels(),
                 {"wall", "floor", "ceiling"});
  nyu.set_label_map({{"washing machine", {"appliances"}},
                     {"stairs", {"miscellaneous", "stairs"}},
                     {"bed", {"bed"}},
                     {"toy", {"object"}}});
  SceneGraph g("nyuclass", {room("a", "laundry room", {0, 0, 0}, {3, 3, 3})},
               {object("1", "washing machine", "a", {1, 1, 1}), object("2", "stairs", "a", {1, 1, 1}),
                object("3", "bed", "a", {1, 1, 1}), object("4", "toy", "a", {1, 1, 1})});
  const auto out = remap_label_space(g, nyu, mpcat());
  EXPECT_EQ(out.graph.label_space(), "mpcat40");
  EXPECT_EQ(out.graph.find_object("1")->label, "appliances");
  EXPECT_EQ(out.graph.find_object("2")->label, "stairs");
  EXPECT_EQ(out.graph.find_object("3")->label, "bed");
  EXPECT_EQ(out.report.rejected_targets.at("toy"), 1u);
}

TEST(Preprocess, ToyFixtureReport) {
  const auto space = testing::toy_space();
  const auto loaded = load_scene_graph(testing::data_dir() / "toy_graph.json", space);
  const auto out = preprocess(loaded, space);
  const auto& r = out.report;
  EXPECT_EQ(r.rooms_in, 22u);
  EXPECT_EQ(r.objects_in, 60u);
  EXPECT_EQ(r.filter.removed_objects_by_label.at("wall"), 1u);
  EXPECT_EQ(r.filter.removed_objects_by_label.at("floor"), 1u);
  EXPECT_EQ(r.filter.removed_excluded_rooms, std::vector<std::string>{"r21"});
  ASSERT_EQ(r.reassign.reassigned.size(), 1u);
  EXPECT_EQ(r.reassign.reassigned[0].object_id, "o902");
  EXPECT_EQ(r.reassign.reassigned[0].to_room, "r02");
  EXPECT_TRUE(r.reassign.uncontained.empty());
  EXPECT_EQ(r.rooms_out, 21u);
  EXPECT_EQ(r.objects_out, 57u);
  EXPECT_NE(r.to_text().find("o902: r01 -> r02"), std::string::npos);
}

}  // namespace
}  // namespace scenesense
