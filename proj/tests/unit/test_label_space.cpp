#include <gtest/gtest.h>

#include "scenesense/error.hpp"
#include "scenesense/label_space.hpp"
#include "support.hpp"

namespace scenesense {
namespace {

nlohmann::json minimal_doc() {
  return {{"name", "mini"},
          {"object_labels", {"toilet", "sink", "bed"}},
          {"room_labels", {"bathroom", "bedroom"}},
          {"rejected_object_labels", {"wall", "floor"}}};
}

TEST(LabelSpace, LookupsFollowDeclaredOrder) {
  const auto space = LabelSpace::from_json(minimal_doc());
  EXPECT_EQ(space.name(), "mini");
  EXPECT_EQ(space.num_objects(), 3u);
  EXPECT_EQ(space.room_index("bedroom"), 1u);
  EXPECT_EQ(space.object_index("sink"), 1u);
  EXPECT_FALSE(space.room_index("kitchen").has_value());
  EXPECT_TRUE(space.has_object("bed"));
  EXPECT_FALSE(space.has_object("wall"));
}

TEST(LabelSpace, UnlabeledSentinelsAreRejected) {
  const auto space = LabelSpace::from_json(minimal_doc());
  EXPECT_TRUE(space.is_rejected("wall"));
  EXPECT_TRUE(space.is_rejected(""));
  EXPECT_TRUE(space.is_rejected("none"));
  EXPECT_FALSE(space.is_rejected("toilet"));
}

TEST(LabelSpace, DefaultExcludedRooms) {
  const auto space = LabelSpace::from_json(minimal_doc());
  for (const char* l : {"none", "yard", "balcony", "porch"}) EXPECT_TRUE(space.is_excluded_room(l)) << l;
  EXPECT_FALSE(space.is_excluded_room("bathroom"));
}

TEST(LabelSpace, AliasesCanonicalize) {
  auto doc = minimal_doc();
  doc["aliases"] = {{"toliet", "toilet"}};
  const auto space = LabelSpace::from_json(doc);
  EXPECT_EQ(space.canonical("toliet"), "toilet");
  EXPECT_EQ(space.canonical("sink"), "sink");
}

TEST(LabelSpace, LabelMapAcceptsStringOrList) {
  auto doc = minimal_doc();
  doc["label_map"] = {{"toilet", "toilet"}, {"sink", {"miscellaneous", "sink"}}};
  const auto space = LabelSpace::from_json(doc);
  EXPECT_EQ(space.label_map().at("toilet"), std::vector<std::string>{"toilet"});
  EXPECT_EQ(space.label_map().at("sink"), (std::vector<std::string>{"miscellaneous", "sink"}));
}

TEST(LabelSpace, RoundTripsThroughJson) {
  auto doc = minimal_doc();
  doc["aliases"] = {{"tub", "bed"}};
  const auto space = LabelSpace::from_json(doc);
  EXPECT_EQ(LabelSpace::from_json(space.to_json()), space);
}

TEST(LabelSpace, RejectsDuplicatesAndOverlap) {
  auto dup = minimal_doc();
  dup["room_labels"] = {"bathroom", "bathroom"};
  EXPECT_THROW(LabelSpace::from_json(dup), Error);
  auto overlap = minimal_doc();
  overlap["object_labels"] = {"toilet", "wall"};
  EXPECT_THROW(LabelSpace::from_json(overlap), Error);
  auto empty_rooms = minimal_doc();
  empty_rooms["room_labels"] = nlohmann::json::array();
  EXPECT_THROW(LabelSpace::from_json(empty_rooms), Error);
}

TEST(LabelSpace, MalformedFieldsAreParseErrors) {
  auto bad = minimal_doc();
  bad["object_labels"] = "toilet";
  try {
    LabelSpace::from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParse);
  }
  EXPECT_THROW(LabelSpace::from_json(nlohmann::json::array()), Error);
}

TEST(LabelSpace, ShippedMpcat40Space) {
  const auto space = load_label_space(testing::data_dir() / ".." / ".." / "data" / "label_spaces" / "mpcat40.json");
  EXPECT_EQ(space.num_objects(), 35u);
  EXPECT_EQ(space.num_rooms(), 23u);
  for (const char* l : {"ceiling", "wall", "floor", "miscellaneous", "object", "unlabeled"})
    EXPECT_TRUE(space.is_rejected(l)) << l;
  EXPECT_EQ(space.room_labels(), testing::standard_room_labels());
  EXPECT_EQ(space.object_labels(), testing::standard_object_labels());
}

}  // namespace
}  // namespace scenesense
