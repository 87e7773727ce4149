#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "scenesense/label_space.hpp"
#include "scenesense/scene_graph.hpp"

namespace httplib {
class Server;
struct Request;
struct Response;
}  // namespace httplib

namespace scenesense::testing {

std::filesystem::path data_dir();
std::string read_file(const std::filesystem::path& path);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// The 23 room labels shipped with the mpcat40 label space.
const std::vector<std::string>& standard_room_labels();
const std::vector<std::string>& standard_object_labels();
LabelSpace standard_space();
LabelSpace toy_space();

/// Rooms whose labels are uniform over the space and whose objects are drawn
/// from a per-label preference list plus background clutter.
std::vector<RoomSample> random_corpus(const LabelSpace& space, std::size_t num_rooms, std::mt19937_64& rng,
                                      std::size_t max_objects = 8);

/// HTTP server on 127.0.0.1 at an ephemeral port, served from a background
/// thread. Handlers run on the server's worker pool.
class StubServer {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  StubServer();
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  void post(const std::string& path, Handler handler);
  /// Binds and starts serving; call after registering handlers.
  void start();
  std::string endpoint() const;

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace scenesense::testing
