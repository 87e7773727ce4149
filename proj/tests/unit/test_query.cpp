#include <gtest/gtest.h>

#include "scenesense/query.hpp"
#include "support.hpp"

namespace scenesense {
namespace {

using Labels = std::vector<std::string>;

TEST(Templates, ListJoining) {
  EXPECT_EQ(join_labels(Labels{"bed"}), "bed");
  EXPECT_EQ(join_labels(Labels{"bed", "dresser"}), "bed and dresser");
  EXPECT_EQ(join_labels(Labels{"stove", "sink", "refrigerator"}), "stove, sink, and refrigerator");
}

TEST(Templates, Articles) {
  EXPECT_EQ(indefinite_article("office"), "an");
  EXPECT_EQ(indefinite_article("Utility room"), "an");
  EXPECT_EQ(indefinite_article("bathroom"), "a");
}

TEST(Templates, ZeroShot) {
  EXPECT_EQ(zero_shot_sentence(Labels{"toilet"}, "office"), "A room containing toilet is called an office.");
  EXPECT_EQ(zero_shot_sentence(Labels{"toilet", "sink", "mirror"}, "bathroom"),
            "A room containing toilet, sink, and mirror is called a bathroom.");
}

TEST(Templates, ZeroShotBundleHasOneStringPerRoomLabel) {
  const auto space = testing::standard_space();
  const auto bundle = render_zero_shot(Labels{"bed", "lamp"}, space);
  ASSERT_EQ(bundle.texts.size(), 23u);
  EXPECT_EQ(bundle.room_labels, space.room_labels());
  const std::string prefix = "A room containing bed and lamp is called ";
  for (std::size_t i = 0; i < 23; ++i) {
    EXPECT_EQ(bundle.texts[i].substr(0, prefix.size()), prefix);
    EXPECT_EQ(bundle.texts[i], zero_shot_sentence(Labels{"bed", "lamp"}, space.room_labels()[i]));
  }
}

TEST(Templates, Embedding) {
  EXPECT_EQ(render_embedding(Labels{"bed"}).texts.front(), "This room contains bed.");
  EXPECT_EQ(render_embedding(Labels{"bed", "dresser"}).texts.front(), "This room contains bed and dresser.");
  EXPECT_EQ(render_embedding(Labels{"stove", "sink", "refrigerator"}).texts.front(),
            "This room contains stove, sink, and refrigerator.");
}

RoomNode box_room() {
  RoomNode r;
  r.id = "r";
  r.bbox = {{0, 0, 0}, {4, 3, 2.5}};
  return r;
}

TEST(Structured, SingleObjectExample) {
  const ObjectNode bed{"1", "bed", "r", {1, 1, 1}, {}};
  const std::vector<const ObjectNode*> objs{&bed};
  EXPECT_EQ(*render_structured(box_room(), objs, {}),
            "Room Size:\nx 4.000\ny 3.000\nz 2.500\n\nObject Locations:\nbed\nx -1.000\ny -0.500\nz -0.250\n");
}

TEST(Structured, RoundingHalfAwayFromZeroWithoutNegativeZero) {
  const ObjectNode o{"1", "lamp", "r", {2.0625, 1.4375, 1.2496}, {}};
  const std::vector<const ObjectNode*> objs{&o};
  StructuredStringConfig cfg;
  cfg.include_room_size = false;
  EXPECT_EQ(*render_structured(box_room(), objs, cfg), "Object Locations:\nlamp\nx 0.063\ny -0.063\nz 0.000\n");
}

TEST(Structured, LineCountsPerFlag) {
  std::vector<ObjectNode> store;
  for (int i = 0; i < 5; ++i) store.push_back({std::to_string(i), "chair", "r", {1.0 + 0.1 * i, 1, 1}, {}});
  std::vector<const ObjectNode*> objs;
  for (const auto& o : store) objs.push_back(&o);
  for (bool size : {true, false}) {
    for (bool pos : {true, false}) {
      StructuredStringConfig cfg;
      cfg.include_room_size = size;
      cfg.include_positions = pos;
      const auto text = *render_structured(box_room(), objs, cfg);
      std::size_t coord_lines = 0;
      std::size_t start = 0;
      while (start < text.size()) {
        const auto end = text.find('\n', start);
        const auto line = text.substr(start, end - start);
        if (line.size() > 2 && (line[0] == 'x' || line[0] == 'y' || line[0] == 'z') && line[1] == ' ') ++coord_lines;
        start = end + 1;
      }
      EXPECT_EQ(coord_lines, (size ? 3u : 0u) + (pos ? 15u : 0u));
      EXPECT_EQ(text.find("Room Size:") != std::string::npos, size);
    }
  }
}

TEST(Structured, ObjectCutoff) {
  std::vector<ObjectNode> store(101, ObjectNode{"x", "chair", "r", {1, 1, 1}, {}});
  std::vector<const ObjectNode*> objs;
  for (const auto& o : store) objs.push_back(&o);
  EXPECT_FALSE(render_structured(box_room(), objs, {}).has_value());
  objs.pop_back();
  EXPECT_TRUE(render_structured(box_room(), objs, {}).has_value());
}

TEST(Permutations, LexicographicOrder) {
  const auto p = ordered_permutations(3, 2);
  const std::vector<std::vector<std::size_t>> want{{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}};
  EXPECT_EQ(p, want);
  EXPECT_EQ(ordered_permutations(4, 3).size(), 24u);
  EXPECT_EQ(ordered_permutations(2, 3).size(), 0u);
}

InformativenessIndex abc_index() { return InformativenessIndex({{"a", 0.1}, {"b", 0.2}, {"c", 0.3}, {"d", 0.4}}, 23); }

TEST(Bootstrap, FourLabelRoomFullSchedule) {
  const RoomSample room{"r", "b", "kitchen", {"d", "c", "b", "a", "a"}};
  const auto rows = bootstrap_queries(room, abc_index(), default_bootstrap_schedule());
  EXPECT_EQ(rows.size(), 32u);
  EXPECT_EQ(rows[0].text, "This room contains a.");
  EXPECT_EQ(rows[1].text, "This room contains b.");
  EXPECT_EQ(rows[2].text, "This room contains a and b.");
  EXPECT_EQ(rows.back().text, "This room contains d, c, and b.");
  for (const auto& r : rows) EXPECT_EQ(r.label, "kitchen");
}

TEST(Bootstrap, SinglePairSchedule) {
  const RoomSample room{"r", "b", "kitchen", {"a", "b", "c", "d"}};
  EXPECT_EQ(bootstrap_queries(room, abc_index(), {{2, 3}}).size(), 6u);
}

TEST(Bootstrap, OneLabelRoomCapsEveryPair) {
  const RoomSample room{"r", "b", "kitchen", {"a", "a"}};
  const auto rows = bootstrap_queries(room, abc_index(), default_bootstrap_schedule());
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) EXPECT_EQ(r.text, "This room contains a.");
}

TEST(Bootstrap, EmptyRoomIsAnError) {
  const RoomSample room{"r", "b", "kitchen", {}};
  EXPECT_ANY_THROW(bootstrap_queries(room, abc_index(), default_bootstrap_schedule()));
}

}  // namespace
}  // namespace scenesense
