#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "scenesense/label_space.hpp"
#include "scenesense/scene_graph.hpp"

namespace scenesense {

struct FilterReport {
  std::map<std::string, std::size_t> removed_objects_by_label;
  std::vector<std::string> removed_empty_rooms;
  std::vector<std::string> removed_excluded_rooms;  // "none" and outdoor regions
  std::size_t removed_objects = 0;
};

struct ReassignReport {
  struct Move {
    std::string object_id;
    std::string from_room;
    std::string to_room;
  };
  std::vector<Move> reassigned;
  std::vector<std::string> uncontained;  // outside every room; left in place
};

struct RemapReport {
  std::map<std::string, std::size_t> unmapped;          // source label -> objects dropped
  std::map<std::string, std::size_t> rejected_targets;  // every candidate rejected in target
  std::size_t remapped = 0;
};

template <typename Report>
struct Processed {
  SceneGraph graph;
  Report report;
};

/// Drops rejected/unlabeled objects, then rooms that are excluded or were
/// left without objects. Rooms with no label are kept (inference input).
Processed<FilterReport> filter_objects(const SceneGraph& graph, const LabelSpace& space);

/// Moves each object whose center lies outside its room's box into the
/// first room (ascending id) whose box contains it.
Processed<ReassignReport> reassign_objects(const SceneGraph& graph);

/// Rewrites object labels from `source` into `target` via source.label_map,
/// taking the first candidate that `target` does not reject.
Processed<RemapReport> remap_label_space(const SceneGraph& graph, const LabelSpace& source,
                                         const LabelSpace& target);

struct PreprocessReport {
  LoadReport load;
  FilterReport filter;
  ReassignReport reassign;
  std::optional<RemapReport> remap;
  std::optional<FilterReport> final_filter;
  std::size_t rooms_in = 0, objects_in = 0, rooms_out = 0, objects_out = 0;

  std::string to_text() const;
};

/// filter -> reassign -> (remap -> filter in the target space).
Processed<PreprocessReport> preprocess(const LoadedGraph& loaded, const LabelSpace& space,
                                       const LabelSpace* target = nullptr);

}  // namespace scenesense
