#include "scenesense/query.hpp"

#include <cctype>

#include "scenesense/error.hpp"
#include "scenesense/io.hpp"

namespace scenesense {

const char* to_string(QueryMethod method) {
  switch (method) {
    case QueryMethod::kZeroShot: return "zero_shot";
    case QueryMethod::kEmbedding: return "embedding";
    case QueryMethod::kStructured: return "structured";
  }
  return "unknown";
}

std::string join_labels(std::span<const std::string> labels) {
  std::string out;
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      if (n > 2) out += ',';
      out += ' ';
      if (i + 1 == n) out += "and ";
    }
    out += labels[i];
  }
  return out;
}

std::string indefinite_article(std::string_view word) {
  if (word.empty()) return "a";
  switch (std::tolower(static_cast<unsigned char>(word.front()))) {
    case 'a': case 'e': case 'i': case 'o': case 'u': return "an";
    default: return "a";
  }
}

std::string zero_shot_sentence(std::span<const std::string> objects, std::string_view room) {
  std::string out = "A room containing ";
  out += join_labels(objects);
  out += " is called ";
  out += indefinite_article(room);
  out += ' ';
  out += room;
  out += '.';
  return out;
}

QueryBundle render_zero_shot(std::span<const std::string> objects, const LabelSpace& space) {
  if (objects.empty()) fail(ErrorKind::kValidation, "zero-shot query needs at least one object");
  QueryBundle bundle;
  bundle.method = QueryMethod::kZeroShot;
  bundle.objects_used.assign(objects.begin(), objects.end());
  bundle.room_labels = space.room_labels();
  bundle.texts.reserve(space.num_rooms());
  for (const auto& room : space.room_labels()) bundle.texts.push_back(zero_shot_sentence(objects, room));
  return bundle;
}

QueryBundle render_embedding(std::span<const std::string> objects) {
  if (objects.empty()) fail(ErrorKind::kValidation, "embedding query needs at least one object");
  QueryBundle bundle;
  bundle.method = QueryMethod::kEmbedding;
  bundle.objects_used.assign(objects.begin(), objects.end());
  bundle.texts.push_back("This room contains " + join_labels(objects) + ".");
  return bundle;
}

std::optional<std::string> render_structured(const RoomNode& room,
                                             std::span<const ObjectNode* const> objects,
                                             const StructuredStringConfig& cfg) {
  if (cfg.max_objects < 1) fail(ErrorKind::kValidation, "max_objects must be at least 1");
  if (objects.size() > cfg.max_objects) return std::nullopt;
  static constexpr char kAxes[3] = {'x', 'y', 'z'};
  std::string out;
  if (cfg.include_room_size) {
    const Vec3 size = room.bbox.extents();
    out += "Room Size:\n";
    for (int i = 0; i < 3; ++i) {
      out += kAxes[i];
      out += ' ';
      out += format_fixed(size[i], cfg.decimals);
      out += '\n';
    }
    out += '\n';
  }
  out += "Object Locations:\n";
  const Vec3 center = room.bbox.center();
  for (std::size_t n = 0; n < objects.size(); ++n) {
    const ObjectNode& obj = *objects[n];
    // Blank line between object blocks only when they have coordinate lines.
    if (n > 0 && cfg.include_positions) out += '\n';
    out += obj.label;
    out += '\n';
    if (!cfg.include_positions) continue;
    for (int i = 0; i < 3; ++i) {
      out += kAxes[i];
      out += ' ';
      out += format_fixed(obj.position[i] - center[i], cfg.decimals);
      out += '\n';
    }
  }
  return out;
}

BootstrapSchedule default_bootstrap_schedule() { return {{1, 2}, {2, 3}, {3, 4}}; }

std::vector<std::vector<std::size_t>> ordered_permutations(std::size_t n, std::size_t r) {
  std::vector<std::vector<std::size_t>> out;
  if (r > n) return out;
  std::vector<std::size_t> current;
  std::vector<bool> used(n, false);
  auto recurse = [&](auto&& self) -> void {
    if (current.size() == r) {
      out.push_back(current);
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      used[i] = true;
      current.push_back(i);
      self(self);
      current.pop_back();
      used[i] = false;
    }
  };
  recurse(recurse);
  return out;
}

std::vector<BootstrapRow> bootstrap_queries(const RoomSample& room, const InformativenessIndex& index,
                                            const BootstrapSchedule& schedule, TieBreak tie_break) {
  if (room.object_labels.empty()) fail(ErrorKind::kValidation, "room '" + room.room_id + "' has no objects");
  if (!room.label) fail(ErrorKind::kValidation, "room '" + room.room_id + "' has no label to bootstrap");
  if (schedule.empty()) fail(ErrorKind::kValidation, "bootstrap schedule is empty");
  std::vector<BootstrapRow> rows;
  for (const auto& [k, n] : schedule) {
    if (k < 1 || n < 1) fail(ErrorKind::kValidation, "bootstrap (k, n) entries must be positive");
    const auto top = select_informative(room.object_labels, index, {n, tie_break});
    const std::size_t kk = std::min(k, top.size());
    for (const auto& perm : ordered_permutations(top.size(), kk)) {
      std::vector<std::string> picked;
      picked.reserve(perm.size());
      for (std::size_t i : perm) picked.push_back(top[i]);
      auto text = render_embedding(picked).texts.front();
      rows.push_back({std::move(text), *room.label, room.room_id, std::move(picked)});
    }
  }
  return rows;
}

}  // namespace scenesense
