#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scenesense/cooccurrence.hpp"
#include "scenesense/label_space.hpp"
#include "scenesense/scene_graph.hpp"

namespace scenesense {

enum class QueryMethod { kZeroShot, kEmbedding, kStructured };

const char* to_string(QueryMethod method);

/// Rendered strings for one room under one method. Zero-shot bundles carry
/// one text per room label (aligned with `room_labels`); the other methods
/// carry exactly one text.
struct QueryBundle {
  std::string room_id;
  QueryMethod method = QueryMethod::kEmbedding;
  std::vector<std::string> room_labels;
  std::vector<std::string> texts;
  std::vector<std::string> objects_used;
};

/// "a", "a and b", "a, b, and c".
std::string join_labels(std::span<const std::string> labels);

/// "an" when the word starts with a/e/i/o/u (case-insensitive), else "a".
std::string indefinite_article(std::string_view word);

/// "A room containing {list} is called {a|an} {room}."
std::string zero_shot_sentence(std::span<const std::string> objects, std::string_view room);

QueryBundle render_zero_shot(std::span<const std::string> objects, const LabelSpace& space);

/// "This room contains {list}."
QueryBundle render_embedding(std::span<const std::string> objects);

struct StructuredStringConfig {
  bool include_room_size = true;
  bool include_positions = true;
  std::size_t max_objects = 100;
  int decimals = 3;
};

/// Room-size block and per-object offsets from the room-box center. Objects
/// appear in the order given. Returns nullopt (skip) for rooms with more than
/// cfg.max_objects objects.
std::optional<std::string> render_structured(const RoomNode& room,
                                             std::span<const ObjectNode* const> objects,
                                             const StructuredStringConfig& cfg);

struct BootstrapRow {
  std::string text;
  std::string label;
  std::string room_id;
  std::vector<std::string> objects;  // labels named in `text`, in order
};

using BootstrapSchedule = std::vector<std::pair<std::size_t, std::size_t>>;  // (k, n)

BootstrapSchedule default_bootstrap_schedule();

/// For every (k, n): the n most informative distinct labels (all if fewer),
/// every ordered k-permutation of them (k capped at what is available) in
/// lexicographic index order, each rendered as an embedding query.
std::vector<BootstrapRow> bootstrap_queries(const RoomSample& room, const InformativenessIndex& index,
                                            const BootstrapSchedule& schedule,
                                            TieBreak tie_break = TieBreak::kLexicographic);

/// Every ordered r-permutation of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> ordered_permutations(std::size_t n, std::size_t r);

}  // namespace scenesense
