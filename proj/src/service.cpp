#include "lcc/service.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <httplib.h>
#include <json.hpp>

#include "lcc/errors.hpp"

namespace lcc {

using nlohmann::ordered_json;

namespace {

Response json_response(int status, const ordered_json& body) {
  return {status, body.dump(), "application/json"};
}

Response error_response(int status, const std::string& kind,
                        const std::string& message) {
  return json_response(status, {{"error", kind}, {"message", message}});
}

std::optional<ordered_json> parse_body(const std::string& body) {
  try {
    auto j = ordered_json::parse(body.empty() ? std::string("{}") : body);
    if (j.is_object()) {
      return j;
    }
  } catch (const nlohmann::json::parse_error&) {
  }
  return std::nullopt;
}

std::string content_type_for(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  return "application/octet-stream";
}

ordered_json correspondence_json(const Correspondence& c) {
  return {{"key", to_string(key_of(c))},
          {"lidar", {c.lidar_point.x, c.lidar_point.y, c.lidar_point.z}},
          {"pixel", {c.pixel.i, c.pixel.j}},
          {"t_lidar", c.lidar_timestamp},
          {"t_camera", c.camera_timestamp},
          {"frame_id", c.camera_frame_id}};
}

}  // namespace

Session::Session(SessionConfig config) : config_(std::move(config)) {
  config_.roi.validate();
  frames_ = load_cloud_dir(config_.clouds, config_.layout);
  std::stable_sort(frames_.begin(), frames_.end(),
                   [](const LidarFrame& a, const LidarFrame& b) {
                     return a.timestamp < b.timestamp;
                   });
  camera_ = load_manifest(config_.manifest);
  check_manifest_images(camera_, config_.images);
  for (std::size_t k = 0; k < camera_.size(); ++k) {
    camera_index_.emplace(camera_[k].id, k);
  }

  std::error_code ec;
  if (fs::exists(config_.out, ec)) {
    set_ = load_correspondences(config_.out);
    for (const auto& c : set_.entries()) {
      if (!camera_index_.contains(c.camera_frame_id)) {
        throw FormatError(config_.out.string(), 1,
                          "correspondence references unknown camera frame '" +
                              c.camera_frame_id + "'");
      }
    }
  } else {
    set_.recording = config_.clouds.filename().string();
    set_.devices = {"lidar", "camera"};
  }

  for (const auto& d : detect_sequence(frames_, config_.roi, config_.detector)) {
    const auto cam = match_camera_frame(d.frame_timestamp, camera_, config_.max_skew);
    if (!cam) {
      ++unmatched_;
      continue;
    }
    const std::size_t index = detections_.size();
    detections_.push_back({d, *cam});
    if (!set_.contains({d.frame_timestamp, camera_[*cam].id})) {
      pending_.insert(index);
    }
  }
}

Session::~Session() {
  if (worker_.joinable()) {
    worker_.join();
  }
}

std::string Session::pending_id(std::size_t index) const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "d%06zu", index);
  return buf;
}

std::optional<std::size_t> Session::parse_pending_id(const std::string& id) const {
  for (std::size_t k = 0; k < detections_.size(); ++k) {
    if (pending_id(k) == id) {
      return k;
    }
  }
  return std::nullopt;
}

void Session::checkpoint() const { save_correspondences(config_.out, set_); }

Response Session::pending() const {
  std::lock_guard lock(mutex_);
  ordered_json items = ordered_json::array();
  for (const auto k : pending_) {
    const auto& d = detections_[k];
    const auto& cam = camera_[d.camera];
    items.push_back({{"id", pending_id(k)},
                     {"t_lidar", d.detection.frame_timestamp},
                     {"vertex",
                      {d.detection.vertex.x, d.detection.vertex.y,
                       d.detection.vertex.z}},
                     {"ring_span", d.detection.ring_span},
                     {"roi_points", d.detection.roi_point_count},
                     {"camera_frame_id", cam.id},
                     {"t_camera", cam.timestamp},
                     {"image_url", "/api/frames/" + cam.id + "/image"}});
  }
  return json_response(200, {{"items", items},
                             {"counts",
                              {{"annotated", set_.size()},
                               {"pending", pending_.size()},
                               {"skipped", skipped_.size()},
                               {"unmatched", unmatched_}}}});
}

Response Session::image(const std::string& frame_id) const {
  const auto it = camera_index_.find(frame_id);
  if (it == camera_index_.end()) {
    return error_response(404, "NotFound", "unknown camera frame '" + frame_id + "'");
  }
  const fs::path path = config_.images / camera_[it->second].image_path;
  try {
    return {200, read_text_file(path), content_type_for(path)};
  } catch (const IoError& e) {
    return error_response(404, "NotFound", e.what());
  }
}

Response Session::annotate(const std::string& id, const std::string& body) {
  const auto payload = parse_body(body);
  if (!payload || !payload->contains("i") || !payload->contains("j") ||
      !payload->at("i").is_number() || !payload->at("j").is_number()) {
    return error_response(400, "BadRequest", "body must be {\"i\": number, \"j\": number}");
  }
  const Pixel px{payload->at("i").get<double>(), payload->at("j").get<double>()};
  if (!std::isfinite(px.i) || !std::isfinite(px.j)) {
    return error_response(400, "BadRequest", "pixel must be finite");
  }
  std::lock_guard lock(mutex_);
  const auto index = parse_pending_id(id);
  if (!index) {
    return error_response(404, "NotFound", "unknown detection '" + id + "'");
  }
  const auto& d = detections_[*index];
  const auto& cam = camera_[d.camera];
  if (set_.contains({d.detection.frame_timestamp, cam.id})) {
    return error_response(409, "DuplicateAnnotation",
                          "detection '" + id + "' is already annotated");
  }
  if (!pending_.contains(*index)) {
    return error_response(404, "NotFound", "detection '" + id + "' is not pending");
  }
  Correspondence added;
  try {
    added = set_.add_annotation(d.detection, cam, px, config_.max_skew);
  } catch (const DuplicateAnnotation& e) {
    return error_response(409, "DuplicateAnnotation", e.what());
  } catch (const SkewExceeded& e) {
    return error_response(400, "SkewExceeded", e.what());
  }
  try {
    checkpoint();
  } catch (const Error& e) {
    set_.remove(key_of(added));
    return error_response(500, "IoError", e.what());
  }
  pending_.erase(*index);
  return json_response(201, correspondence_json(added));
}

Response Session::skip(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto index = parse_pending_id(id);
  if (!index || !pending_.contains(*index)) {
    return error_response(404, "NotFound", "no pending detection '" + id + "'");
  }
  pending_.erase(*index);
  skipped_.insert(*index);
  return json_response(200, {{"skipped", id}});
}

Response Session::remove(const std::string& key_text) {
  CorrespondenceKey key;
  try {
    key = parse_correspondence_key(key_text);
  } catch (const std::exception& e) {
    return error_response(400, "BadRequest", e.what());
  }
  std::lock_guard lock(mutex_);
  const auto it = std::find_if(set_.entries().begin(), set_.entries().end(),
                               [&](const Correspondence& c) { return key_of(c) == key; });
  if (it == set_.entries().end()) {
    return error_response(404, "NotFound", "no correspondence '" + key_text + "'");
  }
  const Correspondence removed = *it;
  set_.remove(key);
  try {
    checkpoint();
  } catch (const Error& e) {
    set_.add(removed);
    return error_response(500, "IoError", e.what());
  }
  for (std::size_t k = 0; k < detections_.size(); ++k) {
    if (detections_[k].detection.frame_timestamp == key.lidar_timestamp &&
        camera_[detections_[k].camera].id == key.camera_frame_id) {
      skipped_.erase(k);
      pending_.insert(k);
    }
  }
  return json_response(200, {{"deleted", key_text}});
}

Response Session::correspondences() const {
  std::lock_guard lock(mutex_);
  ordered_json entries = ordered_json::array();
  for (const auto& c : set_.entries()) {
    entries.push_back(correspondence_json(c));
  }
  return json_response(200, {{"recording", set_.recording},
                             {"devices", set_.devices},
                             {"entries", entries}});
}

Response Session::start_solve(const std::string& body) {
  const auto payload = parse_body(body);
  if (!payload) {
    return error_response(400, "BadRequest", "body must be a JSON object");
  }
  CameraKind kind = CameraKind::pinhole;
  GaConfig cfg;
  try {
    if (payload->contains("model")) {
      kind = parse_camera_kind(payload->at("model").get<std::string>());
    }
    if (payload->contains("seed")) {
      cfg.seed = payload->at("seed").get<std::uint64_t>();
    }
    for (const auto& [name, field] :
         {std::pair{"slots", &cfg.slots}, std::pair{"population", &cfg.population},
          std::pair{"generations", &cfg.generations},
          std::pair{"max_iterations", &cfg.max_iterations}}) {
      if (payload->contains(name)) {
        *field = payload->at(name).get<int>();
      }
    }
    cfg.validate();
  } catch (const std::exception& e) {
    return error_response(400, "BadRequest", e.what());
  }
  cfg.workers = config_.solve_workers;

  std::lock_guard lock(mutex_);
  if (state_ == SolveState::running) {
    return error_response(409, "SolveInProgress", "a solve is already running");
  }
  const std::size_t minimum = cfg.min_correspondences != 0
                                  ? cfg.min_correspondences
                                  : default_min_correspondences(kind);
  if (set_.size() < minimum) {
    return error_response(400, "TooFewCorrespondences",
                          std::to_string(set_.size()) + " correspondences, " +
                              std::string(to_string(kind)) + " needs " +
                              std::to_string(minimum));
  }
  if (worker_.joinable()) {
    worker_.join();
  }
  state_ = SolveState::running;
  solve_error_.clear();
  solve_model_ = std::string(to_string(kind));
  solve_seed_ = cfg.seed;
  worker_ = std::jthread([this, snapshot = set_, kind, cfg] {
    std::optional<CalibrationResult> result;
    std::string error;
    try {
      result = solve_correspondences(snapshot, kind, default_bounds(kind), cfg);
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard inner(mutex_);
    if (result) {
      calibration_ = std::move(result);
      state_ = SolveState::done;
    } else {
      solve_error_ = error;
      state_ = SolveState::failed;
    }
  });
  return json_response(202, {{"state", "running"},
                             {"model", solve_model_},
                             {"seed", solve_seed_}});
}

Response Session::solve_status() const {
  std::lock_guard lock(mutex_);
  static constexpr const char* names[] = {"idle", "running", "done", "failed"};
  ordered_json body{{"state", names[static_cast<int>(state_)]}};
  if (state_ != SolveState::idle) {
    body["model"] = solve_model_;
    body["seed"] = solve_seed_;
  }
  if (state_ == SolveState::failed) {
    body["error"] = solve_error_;
  }
  if (calibration_) {
    body["train_error_px"] = calibration_->train_error_px;
  }
  return json_response(200, body);
}

Response Session::calibration() const {
  std::lock_guard lock(mutex_);
  if (!calibration_) {
    return error_response(404, "NotFound", "no calibration has been solved yet");
  }
  return {200, write_calibration(*calibration_), "application/json"};
}

Response Session::overlay(const std::string& frame_id) const {
  const auto it = camera_index_.find(frame_id);
  if (it == camera_index_.end()) {
    return error_response(404, "NotFound", "unknown camera frame '" + frame_id + "'");
  }
  std::lock_guard lock(mutex_);
  if (!calibration_) {
    return error_response(409, "NoCalibration", "no calibration has been solved yet");
  }
  const Calibration& cal = calibration_->calibration;
  const double t = camera_[it->second].timestamp;

  ordered_json body;
  body["frame_id"] = frame_id;
  ordered_json points = ordered_json::array();
  const auto nearest = std::min_element(
      frames_.begin(), frames_.end(), [&](const LidarFrame& a, const LidarFrame& b) {
        return std::abs(a.timestamp - t) < std::abs(b.timestamp - t);
      });
  if (nearest != frames_.end() && std::abs(nearest->timestamp - t) <= config_.max_skew) {
    body["t_lidar"] = nearest->timestamp;
    for (const auto& p : nearest->points) {
      const auto px = try_project(p.position, cal);
      if (px && config_.image.contains(*px)) {
        points.push_back({px->i, px->j});
      }
    }
  } else {
    body["t_lidar"] = nullptr;
  }
  body["points"] = points;
  ordered_json annotations = ordered_json::array();
  for (const auto& c : set_.entries()) {
    if (c.camera_frame_id != frame_id) {
      continue;
    }
    const auto px = try_project(c.lidar_point, cal);
    annotations.push_back(
        {{"key", to_string(key_of(c))},
         {"pixel", {c.pixel.i, c.pixel.j}},
         {"reprojected", px ? ordered_json{px->i, px->j} : ordered_json()}});
  }
  body["annotations"] = annotations;
  return json_response(200, body);
}

void Session::wait_for_solve() {
  std::jthread done;
  {
    std::lock_guard lock(mutex_);
    done = std::move(worker_);
  }
  if (done.joinable()) {
    done.join();
  }
}

CorrespondenceSet Session::snapshot() const {
  std::lock_guard lock(mutex_);
  return set_;
}

// ---------------------------------------------------------------------------

HttpService::HttpService(Session& session)
    : session_(session), server_(std::make_unique<httplib::Server>()) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto& s = *server_;
  s.Get("/api/pending", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, session_.pending());
  });
  s.Get(R"(/api/frames/([^/]+)/image)",
        [this, reply](const httplib::Request& req, httplib::Response& res) {
          reply(res, session_.image(req.matches[1]));
        });
  s.Post(R"(/api/pending/([^/]+)/annotate)",
         [this, reply](const httplib::Request& req, httplib::Response& res) {
           reply(res, session_.annotate(req.matches[1], req.body));
         });
  s.Post(R"(/api/pending/([^/]+)/skip)",
         [this, reply](const httplib::Request& req, httplib::Response& res) {
           reply(res, session_.skip(req.matches[1]));
         });
  s.Delete(R"(/api/correspondences/([^/]+))",
           [this, reply](const httplib::Request& req, httplib::Response& res) {
             reply(res, session_.remove(req.matches[1]));
           });
  s.Get("/api/correspondences",
        [this, reply](const httplib::Request&, httplib::Response& res) {
          reply(res, session_.correspondences());
        });
  s.Post("/api/solve", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, session_.start_solve(req.body));
  });
  s.Get("/api/solve/status",
        [this, reply](const httplib::Request&, httplib::Response& res) {
          reply(res, session_.solve_status());
        });
  s.Get("/api/calibration",
        [this, reply](const httplib::Request&, httplib::Response& res) {
          reply(res, session_.calibration());
        });
  s.Get(R"(/api/overlay/([^/]+))",
        [this, reply](const httplib::Request& req, httplib::Response& res) {
          reply(res, session_.overlay(req.matches[1]));
        });
  s.set_exception_handler(
      [reply](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          message = e.what();
        } catch (...) {
        }
        reply(res, error_response(500, "InternalError", message));
      });
  s.set_error_handler([reply](const httplib::Request& req, httplib::Response& res) {
    if (res.body.empty()) {
      reply(res, error_response(res.status, res.status == 404 ? "NotFound" : "Error",
                                req.method + " " + req.path));
    }
  });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) {
      throw IoError("cannot bind " + host);
    }
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpService::run() { server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_) {
    server_->stop();
  }
}

}  // namespace lcc
