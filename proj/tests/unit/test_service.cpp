#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fixtures.hpp"
#include "lcc/commands.hpp"
#include "lcc/errors.hpp"
#include "lcc/service.hpp"

#include <httplib.h>

namespace lcc {
namespace {

using nlohmann::json;

struct Workspace {
  testing::TempDir dir;
  synth::SyntheticScene scene;
  synth::SyntheticRecording rec;

  Workspace() {
    scene = synth::reference_scene(CameraKind::pinhole, testing::near_walk(700), 41);
    scene.clutter.ground = true;
    rec = synth::generate(scene, 42);
    write_recording(dir / "rec", scene, rec, 42);
  }

  SessionConfig config() const {
    SessionConfig c;
    c.clouds = dir / "rec" / "clouds";
    c.images = dir / "rec" / "images";
    c.manifest = dir / "rec" / "manifest.csv";
    c.roi = scene.roi;
    c.out = dir / "annotations.jsonl";
    c.layout = scene.device.ring_layout();
    return c;
  }

  std::string pixel_body(double t_lidar) const {
    for (const auto& e : rec.ledger) {
      if (e.lidar_timestamp == t_lidar) {
        return json{{"i", e.pixel.i}, {"j", e.pixel.j}}.dump();
      }
    }
    throw std::runtime_error("no ledger entry");
  }
};

const Workspace& workspace() {
  static const Workspace w;
  return w;
}

class Server {
 public:
  explicit Server(Session& session) : http_(session) {
    port_ = http_.bind("127.0.0.1", 0);
    thread_ = std::thread([this] { http_.run(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    for (int attempt = 0; attempt < 200 && !client_->Get("/api/pending"); ++attempt) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  ~Server() {
    http_.stop();
    thread_.join();
  }

  httplib::Client& client() { return *client_; }
  int port() const { return port_; }

 private:
  HttpService http_;
  int port_ = 0;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
};

json body_of(const httplib::Result& r) { return json::parse(r->body); }

json pending_items(httplib::Client& c) { return body_of(c.Get("/api/pending"))["items"]; }

httplib::Result annotate(httplib::Client& c, const std::string& id, const std::string& body) {
  return c.Post("/api/pending/" + id + "/annotate", body, "application/json");
}

httplib::Result wait_done(httplib::Client& c) {
  for (int n = 0; n < 6000; ++n) {
    auto r = c.Get("/api/solve/status");
    if (body_of(r)["state"] != "running") return r;
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  return c.Get("/api/solve/status");
}

TEST(Service, PendingListsEveryMatchedDetection) {
  const auto& w = workspace();
  std::filesystem::remove(w.config().out);
  Session session(w.config());
  Server server(session);
  const auto r = server.client().Get("/api/pending");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  const json body = json::parse(r->body);
  EXPECT_EQ(body["items"].size(), w.rec.ledger.size());
  EXPECT_EQ(body["counts"]["pending"], w.rec.ledger.size());
  EXPECT_EQ(body["counts"]["annotated"], 0);
  const auto& first = body["items"][0];
  EXPECT_EQ(first["camera_frame_id"], w.rec.ledger[0].camera_frame_id);
  EXPECT_EQ(first["t_lidar"].get<double>(), w.rec.ledger[0].lidar_timestamp);

  const auto img = server.client().Get(first["image_url"].get<std::string>());
  ASSERT_TRUE(img);
  EXPECT_EQ(img->status, 200);
  EXPECT_EQ(img->get_header_value("Content-Type"), "image/svg+xml");
  EXPECT_EQ(server.client().Get("/api/frames/nope/image")->status, 404);
  EXPECT_EQ(server.client().Get("/api/unknown")->status, 404);
}

TEST(Service, AnnotateDeleteAndErrors) {
  const auto& w = workspace();
  std::filesystem::remove(w.config().out);
  Session session(w.config());
  Server server(session);
  auto& c = server.client();
  const json item = pending_items(c)[0];
  const std::string id = item["id"];
  const std::string good = w.pixel_body(item["t_lidar"]);

  EXPECT_EQ(annotate(c, id, "{\"i\": 1}")->status, 400);
  EXPECT_EQ(annotate(c, id, "not json")->status, 400);
  EXPECT_EQ(annotate(c, "d999999", good)->status, 404);
  const auto created = annotate(c, id, good);
  ASSERT_EQ(created->status, 201);
  const std::string key = body_of(created)["key"];
  EXPECT_EQ(annotate(c, id, good)->status, 409);

  const json listed = body_of(c.Get("/api/correspondences"))["entries"];
  ASSERT_EQ(listed.size(), 1u);
  EXPECT_EQ(listed[0]["key"], key);
  const json pixel = json::parse(good);
  EXPECT_EQ(listed[0]["pixel"], (json{pixel["i"], pixel["j"]}));
  EXPECT_EQ(load_correspondences(w.config().out).size(), 1u);
  EXPECT_EQ(body_of(c.Get("/api/pending"))["counts"]["annotated"], 1);

  EXPECT_EQ(c.Delete("/api/correspondences/garbage")->status, 400);
  EXPECT_EQ(c.Delete("/api/correspondences/" + httplib::detail::encode_url(key))->status, 200);
  EXPECT_EQ(c.Delete("/api/correspondences/" + httplib::detail::encode_url(key))->status, 404);
  EXPECT_TRUE(load_correspondences(w.config().out).empty());
  EXPECT_EQ(pending_items(c)[0]["id"], id);

  EXPECT_EQ(c.Post("/api/pending/" + id + "/skip")->status, 200);
  EXPECT_EQ(c.Post("/api/pending/" + id + "/skip")->status, 404);
  EXPECT_EQ(annotate(c, id, good)->status, 404);
  EXPECT_EQ(body_of(c.Get("/api/pending"))["counts"]["skipped"], 1);
}

TEST(Service, ResumesFromCheckpoint) {
  const auto& w = workspace();
  std::filesystem::remove(w.config().out);
  std::size_t total = 0;
  {
    Session session(w.config());
    Server server(session);
    auto& c = server.client();
    const json items = pending_items(c);
    total = items.size();
    for (std::size_t k = 0; k < 3; ++k) {
      ASSERT_EQ(annotate(c, items[k]["id"], w.pixel_body(items[k]["t_lidar"]))->status, 201);
    }
  }
  Session resumed(w.config());
  EXPECT_EQ(resumed.snapshot().size(), 3u);
  const json pending = json::parse(resumed.pending().body);
  EXPECT_EQ(pending["items"].size(), total - 3);
  EXPECT_EQ(pending["counts"]["annotated"], 3);
}

TEST(Service, ConcurrentAnnotationsAreLinearizable) {
  const auto& w = workspace();
  std::filesystem::remove(w.config().out);
  Session session(w.config());
  Server server(session);
  const json items = pending_items(server.client());
  const std::size_t n = std::min<std::size_t>(items.size(), 8);
  std::atomic<int> created{0}, conflicts{0}, other{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&] {
      httplib::Client c("127.0.0.1", server.port());
      for (std::size_t k = 0; k < n; ++k) {
        const auto r = annotate(c, items[k]["id"], w.pixel_body(items[k]["t_lidar"]));
        if (r && r->status == 201) {
          ++created;
        } else if (r && r->status == 409) {
          ++conflicts;
        } else {
          ++other;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(created.load(), static_cast<int>(n));
  EXPECT_EQ(conflicts.load(), static_cast<int>(3 * n));
  EXPECT_EQ(other.load(), 0);
  EXPECT_EQ(session.snapshot().size(), n);
  EXPECT_EQ(load_correspondences(w.config().out), session.snapshot());
}

TEST(Service, SolveMatchesOfflinePipeline) {
  const auto& w = workspace();
  std::filesystem::remove(w.config().out);
  Session session(w.config());
  Server server(session);
  auto& c = server.client();

  EXPECT_EQ(c.Get("/api/calibration")->status, 404);
  EXPECT_EQ(body_of(c.Get("/api/solve/status"))["state"], "idle");
  EXPECT_EQ(c.Post("/api/solve", "{}", "application/json")->status, 400);

  testing::TempDir scratch;
  DetectOptions det;
  det.clouds = w.config().clouds;
  det.roi = w.scene.roi;
  det.out = scratch / "det.jsonl";
  det.layout = w.scene.device.ring_layout();
  std::ostringstream quiet;
  cmd_detect(det, quiet);
  const DetectionFile detected = load_detections(det.out);
  const json items = pending_items(c);
  ASSERT_EQ(items.size(), detected.detections.size());
  for (std::size_t k = 0; k < items.size(); ++k) {
    EXPECT_EQ(items[k]["t_lidar"].get<double>(), detected.detections[k].frame_timestamp);
    ASSERT_EQ(annotate(c, items[k]["id"], w.pixel_body(items[k]["t_lidar"]))->status, 201);
  }
  const std::string frame = w.rec.ledger[0].camera_frame_id;
  EXPECT_EQ(c.Get("/api/overlay/" + frame)->status, 409);

  const json request{{"model", "pinhole"}, {"seed", 17}, {"slots", 2}, {"population", 60},
                     {"generations", 5}, {"max_iterations", 3}};
  EXPECT_EQ(c.Post("/api/solve", json{{"model", "orthographic"}}.dump(), "application/json")
                ->status,
            400);
  const auto started = c.Post("/api/solve", request.dump(), "application/json");
  ASSERT_EQ(started->status, 202);
  const auto again = c.Post("/api/solve", request.dump(), "application/json");
  EXPECT_TRUE(again->status == 409 || again->status == 202);
  session.wait_for_solve();
  EXPECT_EQ(body_of(wait_done(c))["state"], "done");

  GaConfig cfg;
  cfg.seed = 17;
  cfg.slots = 2;
  cfg.population = 60;
  cfg.generations = 5;
  cfg.max_iterations = 3;
  const CorrespondenceSet offline = synth::make_correspondences(w.rec, 0.0, 1);
  const std::string expected = write_calibration(
      solve_correspondences(offline, CameraKind::pinhole, default_bounds(CameraKind::pinhole), cfg));
  const auto calib = c.Get("/api/calibration");
  ASSERT_EQ(calib->status, 200);
  EXPECT_EQ(calib->body, expected);

  testing::TempDir dir;
  save_correspondences(dir / "c.jsonl", session.snapshot());
  SolveOptions opts;
  opts.corr = dir / "c.jsonl";
  opts.ga = cfg;
  opts.out = dir / "calib.json";
  cmd_solve(opts);
  EXPECT_EQ(testing::slurp(opts.out), calib->body);

  const auto overlay = c.Get("/api/overlay/" + frame);
  ASSERT_EQ(overlay->status, 200);
  const json o = json::parse(overlay->body);
  EXPECT_FALSE(o["points"].empty());
  ASSERT_EQ(o["annotations"].size(), 1u);
  EXPECT_EQ(o["annotations"][0]["reprojected"].size(), 2u);
  EXPECT_EQ(c.Get("/api/overlay/nope")->status, 404);
}

TEST(Service, SecondSolveWhileRunningIsRejected) {
  const auto& w = workspace();
  std::filesystem::remove(w.config().out);
  Session session(w.config());
  const json pending = json::parse(session.pending().body);
  for (const auto& item : pending["items"]) {
    ASSERT_EQ(session.annotate(item["id"], w.pixel_body(item["t_lidar"])).status, 201);
  }
  const std::string slow = json{{"population", 400}, {"generations", 40}}.dump();
  const Response first = session.start_solve(slow);
  ASSERT_EQ(first.status, 202) << first.body;
  const Response second = session.start_solve(slow);
  EXPECT_EQ(second.status, 409);
  EXPECT_EQ(json::parse(session.solve_status().body)["state"], "running");
  session.wait_for_solve();
  EXPECT_EQ(json::parse(session.solve_status().body)["state"], "done");
}

TEST(Service, RejectsCheckpointWithUnknownFrames) {
  const auto& w = workspace();
  CorrespondenceSet bad;
  Correspondence c;
  c.camera_frame_id = "not-in-manifest";
  bad.add(c);
  save_correspondences(w.config().out, bad);
  EXPECT_THROW(Session{w.config()}, FormatError);
  std::filesystem::remove(w.config().out);
}

}  // namespace
}  // namespace lcc
