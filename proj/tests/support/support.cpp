#include "support.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <httplib.h>

namespace scenesense::testing {

namespace fs = std::filesystem;

fs::path data_dir() { return SCENESENSE_TEST_DATA_DIR; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = fs::temp_directory_path() /
                     ("scenesense-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create a temp directory");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

const std::vector<std::string>& standard_room_labels() {
  static const std::vector<std::string> labels{
      "bar",         "bathroom",  "bedroom", "classroom",    "closet",      "conference auditorium",
      "dining room", "family room", "game room", "garage",   "gym",         "hallway",
      "kitchen",     "laundry room", "library", "living room", "lobby",      "lounge",
      "office",      "spa",       "staircase", "television room", "utility room"};
  return labels;
}

const std::vector<std::string>& standard_object_labels() {
  static const std::vector<std::string> labels{
      "chair",   "door",    "table",         "picture", "cabinet", "cushion", "window",
      "sofa",    "bed",     "curtain",       "chest of drawers", "plant", "sink", "stairs",
      "toilet",  "stool",   "towel",         "mirror",  "tv monitor", "shower", "column",
      "bathtub", "counter", "fireplace",     "lighting", "beam",   "railing", "shelving",
      "blinds",  "gym equipment", "seating", "board panel", "furniture", "appliances", "clothes"};
  return labels;
}

LabelSpace standard_space() {
  return LabelSpace("mpcat40", standard_object_labels(), standard_room_labels(),
                    {"wall", "floor", "ceiling", "miscellaneous", "object", "unlabeled"});
}

LabelSpace toy_space() { return load_label_space(data_dir() / "toy_space.json"); }

std::vector<RoomSample> random_corpus(const LabelSpace& space, std::size_t num_rooms, std::mt19937_64& rng,
                                      std::size_t max_objects) {
  const auto& rooms = space.room_labels();
  const auto& objects = space.object_labels();
  std::uniform_int_distribution<std::size_t> pick_room(0, rooms.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_object(0, objects.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_count(1, max_objects);
  std::bernoulli_distribution preferred(0.7);
  std::vector<RoomSample> out;
  for (std::size_t i = 0; i < num_rooms; ++i) {
    const std::size_t r = pick_room(rng);
    RoomSample room;
    room.room_id = "room" + std::to_string(i);
    room.building_id = "b" + std::to_string(i / 5);
    room.label = rooms[r];
    const std::size_t n = pick_count(rng);
    for (std::size_t j = 0; j < n; ++j) {
      // Each room label prefers a window of three objects.
      const std::size_t o = preferred(rng) ? (r * 3 + j % 3) % objects.size() : pick_object(rng);
      room.object_labels.push_back(objects[o]);
    }
    out.push_back(std::move(room));
  }
  return out;
}

StubServer::StubServer() : server_(std::make_unique<httplib::Server>()) {}

StubServer::~StubServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void StubServer::post(const std::string& path, Handler handler) { server_->Post(path, std::move(handler)); }

void StubServer::start() {
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("stub server could not bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

std::string StubServer::endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

}  // namespace scenesense::testing
