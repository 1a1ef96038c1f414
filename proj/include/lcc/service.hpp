#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "lcc/commands.hpp"
#include "lcc/correspondence.hpp"
#include "lcc/formats.hpp"
#include "lcc/ga_solver.hpp"
#include "lcc/vertex_detect.hpp"

namespace httplib {
class Server;
}

namespace lcc {

struct SessionConfig {
  fs::path clouds;
  fs::path images;
  fs::path manifest;
  RoiBox roi;
  fs::path out;  // correspondence file, loaded on start when it exists
  DetectorConfig detector;
  RingLayout layout;
  double max_skew = kDefaultMaxSkew;
  ImageSize image;
  int solve_workers = 1;
};

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Annotation session state behind the HTTP API. Every public call is
/// serialized on one mutex; solves run on a background thread.
class Session {
 public:
  explicit Session(SessionConfig config);
  ~Session();

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  Response pending() const;
  Response image(const std::string& frame_id) const;
  Response annotate(const std::string& id, const std::string& body);
  Response skip(const std::string& id);
  Response remove(const std::string& key);
  Response correspondences() const;
  Response start_solve(const std::string& body);
  Response solve_status() const;
  Response calibration() const;
  Response overlay(const std::string& frame_id) const;

  /// Blocks until no solve is running.
  void wait_for_solve();

  CorrespondenceSet snapshot() const;

 private:
  enum class SolveState { idle, running, done, failed };

  struct Detection {
    VertexDetection detection;
    std::size_t camera;  // index into camera_
  };

  std::optional<std::size_t> parse_pending_id(const std::string& id) const;
  std::string pending_id(std::size_t index) const;
  void checkpoint() const;

  SessionConfig config_;
  std::vector<LidarFrame> frames_;  // ordered by timestamp
  std::vector<CameraFrameRef> camera_;
  std::map<std::string, std::size_t> camera_index_;
  std::vector<Detection> detections_;
  std::size_t unmatched_ = 0;

  mutable std::mutex mutex_;
  std::set<std::size_t> pending_;
  std::set<std::size_t> skipped_;
  CorrespondenceSet set_;
  SolveState state_ = SolveState::idle;
  std::string solve_error_;
  std::string solve_model_;
  std::uint64_t solve_seed_ = 0;
  std::optional<CalibrationResult> calibration_;
  std::jthread worker_;
};

/// HTTP front end for a Session.
class HttpService {
 public:
  explicit HttpService(Session& session);
  ~HttpService();

  /// Binds `host:port`; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void run();
  void stop();

 private:
  Session& session_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace lcc
