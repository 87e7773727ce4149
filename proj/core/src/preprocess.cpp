#include "scenesense/preprocess.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace scenesense {

Processed<FilterReport> filter_objects(const SceneGraph& graph, const LabelSpace& space) {
  FilterReport report;
  std::set<std::string> excluded_rooms;
  for (const auto& room : graph.rooms()) {
    if (room.label && space.is_excluded_room(*room.label)) {
      excluded_rooms.insert(room.id);
      report.removed_excluded_rooms.push_back(room.id);
    }
  }

  std::vector<ObjectNode> kept_objects;
  std::map<std::string, std::size_t> kept_per_room;
  for (const auto& obj : graph.objects()) {
    if (space.is_rejected(obj.label)) {
      ++report.removed_objects_by_label[obj.label];
      ++report.removed_objects;
      continue;
    }
    if (excluded_rooms.contains(obj.room_id)) {
      ++report.removed_objects;
      continue;
    }
    ++kept_per_room[obj.room_id];
    kept_objects.push_back(obj);
  }

  std::vector<RoomNode> kept_rooms;
  for (const auto& room : graph.rooms()) {
    if (excluded_rooms.contains(room.id)) continue;
    if (!kept_per_room.contains(room.id)) {
      report.removed_empty_rooms.push_back(room.id);
      continue;
    }
    kept_rooms.push_back(room);
  }
  return {SceneGraph(graph.label_space(), std::move(kept_rooms), std::move(kept_objects)), std::move(report)};
}

Processed<ReassignReport> reassign_objects(const SceneGraph& graph) {
  ReassignReport report;
  std::vector<const RoomNode*> by_id;
  for (const auto& r : graph.rooms()) by_id.push_back(&r);
  std::sort(by_id.begin(), by_id.end(), [](const RoomNode* a, const RoomNode* b) { return a->id < b->id; });

  std::vector<ObjectNode> objects = graph.objects();
  for (auto& obj : objects) {
    const RoomNode* current = graph.find_room(obj.room_id);
    if (current->bbox.contains(obj.position)) continue;
    auto hit = std::find_if(by_id.begin(), by_id.end(),
                            [&](const RoomNode* r) { return r->bbox.contains(obj.position); });
    if (hit == by_id.end()) {
      report.uncontained.push_back(obj.id);
      continue;
    }
    report.reassigned.push_back({obj.id, obj.room_id, (*hit)->id});
    obj.room_id = (*hit)->id;
  }
  return {SceneGraph(graph.label_space(), graph.rooms(), std::move(objects)), std::move(report)};
}

Processed<RemapReport> remap_label_space(const SceneGraph& graph, const LabelSpace& source,
                                         const LabelSpace& target) {
  RemapReport report;
  std::vector<ObjectNode> objects;
  for (const auto& obj : graph.objects()) {
    auto it = source.label_map().find(obj.label);
    if (it == source.label_map().end()) {
      ++report.unmapped[obj.label];
      continue;
    }
    const auto& candidates = it->second;
    auto pick = std::find_if(candidates.begin(), candidates.end(),
                             [&](const std::string& t) { return !target.is_rejected(t); });
    if (pick == candidates.end()) {
      ++report.rejected_targets[obj.label];
      continue;
    }
    ObjectNode mapped = obj;
    mapped.label = *pick;
    objects.push_back(std::move(mapped));
    ++report.remapped;
  }
  return {SceneGraph(target.name(), graph.rooms(), std::move(objects)), std::move(report)};
}

namespace {

void describe_filter(std::ostringstream& out, const FilterReport& f) {
  out << "  objects removed: " << f.removed_objects << "\n";
  for (const auto& [label, n] : f.removed_objects_by_label)
    out << "    " << (label.empty() ? "<unlabeled>" : label) << ": " << n << "\n";
  out << "  excluded rooms removed: " << f.removed_excluded_rooms.size() << "\n";
  for (const auto& id : f.removed_excluded_rooms) out << "    " << id << "\n";
  out << "  empty rooms removed: " << f.removed_empty_rooms.size() << "\n";
  for (const auto& id : f.removed_empty_rooms) out << "    " << id << "\n";
}

}  // namespace

std::string PreprocessReport::to_text() const {
  std::ostringstream out;
  out << "input: " << rooms_in << " rooms, " << objects_in << " objects\n";
  out << "load:\n";
  out << "  aliased labels: " << load.aliased_labels << "\n";
  out << "  unknown object labels: " << load.unknown_object_labels.size() << "\n";
  for (const auto& f : load.unknown_object_labels)
    out << "    " << f.object_id << ": " << (f.label.empty() ? "<unlabeled>" : f.label) << "\n";
  out << "filter:\n";
  describe_filter(out, filter);
  out << "reassign:\n";
  out << "  objects reassigned: " << reassign.reassigned.size() << "\n";
  for (const auto& m : reassign.reassigned)
    out << "    " << m.object_id << ": " << m.from_room << " -> " << m.to_room << "\n";
  out << "  objects outside every room: " << reassign.uncontained.size() << "\n";
  for (const auto& id : reassign.uncontained) out << "    " << id << "\n";
  if (remap) {
    out << "remap:\n";
    out << "  objects remapped: " << remap->remapped << "\n";
    for (const auto& [label, n] : remap->unmapped) out << "    unmapped " << label << ": " << n << "\n";
    for (const auto& [label, n] : remap->rejected_targets) out << "    rejected " << label << ": " << n << "\n";
  }
  if (final_filter) {
    out << "final filter:\n";
    describe_filter(out, *final_filter);
  }
  out << "output: " << rooms_out << " rooms, " << objects_out << " objects\n";
  return out.str();
}

Processed<PreprocessReport> preprocess(const LoadedGraph& loaded, const LabelSpace& space,
                                       const LabelSpace* target) {
  PreprocessReport report;
  report.load = loaded.report;
  report.rooms_in = loaded.graph.rooms().size();
  report.objects_in = loaded.graph.objects().size();

  auto filtered = filter_objects(loaded.graph, space);
  report.filter = std::move(filtered.report);
  auto moved = reassign_objects(filtered.graph);
  report.reassign = std::move(moved.report);
  SceneGraph graph = std::move(moved.graph);

  // Reassignment can empty a room, so always finish with a filter pass in
  // whichever space the graph ends up in.
  const LabelSpace& final_space = target ? *target : space;
  if (target) {
    auto remapped = remap_label_space(graph, space, *target);
    report.remap = std::move(remapped.report);
    graph = std::move(remapped.graph);
  }
  auto final_pass = filter_objects(graph, final_space);
  report.final_filter = std::move(final_pass.report);
  graph = std::move(final_pass.graph);

  report.rooms_out = graph.rooms().size();
  report.objects_out = graph.objects().size();
  return {std::move(graph), std::move(report)};
}

}  // namespace scenesense
