#include "lcc/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>

#include "lcc/errors.hpp"
#include "lcc/text.hpp"

namespace lcc::synth {

namespace {

constexpr double pi = std::numbers::pi;

struct Vec3 {
  double x, y, z;
};

Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
Vec3 to_vec(const Point3& p) { return {p.x, p.y, p.z}; }
Point3 to_point(Vec3 v) { return {v.x, v.y, v.z}; }

/// Planar convex polygon with an in-plane frame (h horizontal, e up).
struct Facet {
  Vec3 origin;
  Vec3 normal;
  Vec3 h;
  Vec3 e;
  std::vector<std::array<double, 2>> polygon;  // local (h, e) coordinates
  double intensity = 0.0;
  bool is_board = false;
};

struct Frame3 {
  Vec3 normal, h, e;
};

Frame3 board_frame(const BoardPose& pose) {
  const double ca = std::cos(pose.normal_azimuth);
  const double sa = std::sin(pose.normal_azimuth);
  const double ct = std::cos(pose.tilt);
  const double st = std::sin(pose.tilt);
  const Vec3 normal{ct * ca, ct * sa, st};
  const Vec3 h{-sa, ca, 0.0};
  return {normal, h, cross(normal, h)};
}

std::array<std::array<double, 2>, 4> diamond_local(const BoardSpec& board) {
  const double a = 0.5 * board.width;
  const double b = 0.5 * board.height;
  const double s = std::numbers::sqrt2 / 2.0;
  // Rectangle corners (a, b), (a, -b), (-a, -b), (-a, b) turned by 45 deg.
  return {{{s * (a - b), s * (a + b)},
           {s * (a + b), s * (a - b)},
           {s * (b - a), -s * (a + b)},
           {-s * (a + b), s * (b - a)}}};
}

bool inside_convex(const std::vector<std::array<double, 2>>& poly, double x,
                   double y) {
  bool has_pos = false;
  bool has_neg = false;
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto& p = poly[k];
    const auto& q = poly[(k + 1) % poly.size()];
    const double c = (q[0] - p[0]) * (y - p[1]) - (q[1] - p[1]) * (x - p[0]);
    has_pos = has_pos || c > 0.0;
    has_neg = has_neg || c < 0.0;
  }
  return !(has_pos && has_neg);
}

std::optional<Vec3> intersect(const Facet& f, Vec3 dir, double max_range) {
  const double denom = dot(f.normal, dir);
  if (std::abs(denom) < 1e-12) {
    return std::nullopt;
  }
  const double t = dot(f.normal, f.origin) / denom;
  if (!(t > 1e-9 && t <= max_range)) {
    return std::nullopt;
  }
  const Vec3 q = t * dir;
  const Vec3 rel = q - f.origin;
  if (!inside_convex(f.polygon, dot(rel, f.h), dot(rel, f.e))) {
    return std::nullopt;
  }
  return q;
}

Facet upright_rect(double cx, double cy, double width, double z_bottom,
                   double z_top, double intensity) {
  // Faces the sensor at the origin.
  const double az = std::atan2(-cy, -cx);
  Facet f;
  f.normal = {std::cos(az), std::sin(az), 0.0};
  f.h = {-std::sin(az), std::cos(az), 0.0};
  f.e = {0.0, 0.0, 1.0};
  f.origin = {cx, cy, 0.0};
  const double w = 0.5 * width;
  f.polygon = {{-w, z_bottom}, {w, z_bottom}, {w, z_top}, {-w, z_top}};
  f.intensity = intensity;
  return f;
}

Facet board_facet(const BoardPose& pose, const BoardSpec& board) {
  const Frame3 fr = board_frame(pose);
  Facet f;
  f.origin = to_vec(pose.center);
  f.normal = fr.normal;
  f.h = fr.h;
  f.e = fr.e;
  for (const auto& c : diamond_local(board)) {
    f.polygon.push_back(c);
  }
  f.intensity = 100.0;
  f.is_board = true;
  return f;
}

/// Firing indices whose azimuth falls inside the facet's angular extent.
void collect_firings(const Facet& f, const DeviceSpec& dev, std::set<long>& out) {
  const double center_az = std::atan2(f.origin.y, f.origin.x);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : f.polygon) {
    const Vec3 p = f.origin + c[0] * f.h + c[1] * f.e;
    double rel = std::atan2(p.y, p.x) - center_az;
    rel = std::remainder(rel, 2.0 * pi);
    lo = std::min(lo, rel);
    hi = std::max(hi, rel);
  }
  const double res = dev.horizontal_resolution;
  const long first = static_cast<long>(
      std::floor((center_az + lo - dev.azimuth_offset) / res)) - 1;
  const long last = static_cast<long>(
      std::ceil((center_az + hi - dev.azimuth_offset) / res)) + 1;
  const long n = dev.firings_per_revolution();
  for (long k = first; k <= last; ++k) {
    out.insert(((k % n) + n) % n);
  }
}

struct Hit {
  Vec3 position;
  double range;
  double intensity;
  bool is_board;
};

std::string camera_id(std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cam_%06zu", k);
  return buf;
}

}  // namespace

double DeviceSpec::ring_elevation(int r) const {
  return min_elevation + (max_elevation - min_elevation) *
                             static_cast<double>(r) /
                             static_cast<double>(ring_count - 1);
}

double DeviceSpec::azimuth(long k) const {
  return azimuth_offset + static_cast<double>(k) * horizontal_resolution;
}

long DeviceSpec::firings_per_revolution() const {
  return std::lround(2.0 * pi / horizontal_resolution);
}

RingLayout DeviceSpec::ring_layout() const {
  return {ring_count, min_elevation, max_elevation};
}

void SyntheticScene::validate() const {
  const auto& d = device;
  if (d.ring_count < 2 || !(d.min_elevation < d.max_elevation) ||
      !(d.horizontal_resolution > 0.0) || !(d.lidar_rate > 0.0) ||
      !(d.camera_rate > 0.0) || !(d.max_range > 0.0) || d.image_rows < 1 ||
      d.image_cols < 1) {
    throw std::invalid_argument("scene: invalid device spec");
  }
  if (!(noise.pixel_sigma >= 0.0) || !(noise.point_sigma >= 0.0)) {
    throw std::invalid_argument("scene: noise sigmas must be >= 0");
  }
  if (!(board.width > 0.0 && board.height > 0.0)) {
    throw std::invalid_argument("scene: board dimensions must be positive");
  }
  roi.validate();
  if (!default_bounds(kind_of(ground_truth)).contains(pack(ground_truth))) {
    throw std::invalid_argument(
        "scene: ground truth lies outside the default search bounds");
  }
  for (std::size_t k = 1; k < trajectory.size(); ++k) {
    if (!(trajectory[k].timestamp > trajectory[k - 1].timestamp)) {
      throw std::invalid_argument(
          "scene: trajectory timestamps must increase strictly");
    }
  }
  if (clutter.ground && !(clutter.ground_z < roi.z_min)) {
    throw std::invalid_argument("scene: ground plane must lie below the ROI");
  }
  for (const auto& post : clutter.posts) {
    const bool outside = post.x + 0.5 * post.width < roi.x_min ||
                         post.x - 0.5 * post.width > roi.x_max ||
                         post.y < roi.y_min || post.y > roi.y_max ||
                         post.top < roi.z_min;
    if (!outside) {
      throw std::invalid_argument("scene: clutter posts must lie outside the ROI");
    }
  }
}

Calibration reference_calibration(CameraKind kind) {
  Calibration cal;
  cal.extrinsic = {0.55 * pi, -0.45 * pi, 0.04 * pi, 0.12, -0.25, 0.08};
  if (kind == CameraKind::pinhole) {
    cal.camera = PinholeIntrinsics{620.0, 615.0, 512.0, 640.0};
  } else {
    cal.camera = FisheyeIntrinsics{620.0, 615.0, 512.0, 640.0, 0.002,
                                   0.2,   -0.05, 0.002, -0.001, 0.01};
  }
  return cal;
}

std::vector<TrajectorySample> random_walk(const WalkSpec& walk,
                                          std::uint64_t seed) {
  if (!(walk.rate > 0.0) || !(walk.x_min < walk.x_max) ||
      !(walk.y_min < walk.y_max) || !(walk.y_min > 0.0) ||
      !(walk.center_z_min <= walk.center_z_max)) {
    throw std::invalid_argument("random_walk: invalid walk spec");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto admissible = [&](double x, double y) {
    return x >= walk.x_min && x <= walk.x_max && y >= walk.y_min &&
           y <= walk.y_max && std::abs(std::atan2(x, y)) <= walk.max_view_angle;
  };

  double x = 0.0;
  double y = 0.0;
  do {
    x = walk.x_min + unit(rng) * (walk.x_max - walk.x_min);
    y = walk.y_min + unit(rng) * (walk.y_max - walk.y_min);
  } while (!admissible(x, y));
  double z = walk.center_z_min + unit(rng) * (walk.center_z_max - walk.center_z_min);
  double heading = 2.0 * pi * unit(rng);
  double yaw = 0.0;
  double tilt = 0.0;
  const double step = walk.speed / walk.rate;

  std::vector<TrajectorySample> out;
  out.reserve(walk.frames);
  for (std::size_t n = 0; n < walk.frames; ++n) {
    TrajectorySample s;
    s.timestamp = walk.start_time + static_cast<double>(n) / walk.rate;
    s.pose.center = {x, y, z};
    s.pose.normal_azimuth = std::atan2(-y, -x) + yaw;
    s.pose.tilt = tilt;
    out.push_back(s);

    heading += 0.4 * gauss(rng);
    double nx = x + step * std::cos(heading);
    double ny = y + step * std::sin(heading);
    for (int attempt = 0; attempt < 16 && !admissible(nx, ny); ++attempt) {
      heading = 2.0 * pi * unit(rng);
      nx = x + step * std::cos(heading);
      ny = y + step * std::sin(heading);
    }
    if (admissible(nx, ny)) {
      x = nx;
      y = ny;
    }
    z = std::clamp(z + 0.04 * gauss(rng), walk.center_z_min, walk.center_z_max);
    yaw = std::clamp(yaw + 0.05 * gauss(rng), -walk.yaw_jitter, walk.yaw_jitter);
    tilt = std::clamp(tilt + 0.03 * gauss(rng), -walk.max_tilt, walk.max_tilt);
  }
  return out;
}

SyntheticScene reference_scene(CameraKind kind, const WalkSpec& walk,
                               std::uint64_t walk_seed) {
  SyntheticScene scene;
  scene.ground_truth = reference_calibration(kind);
  scene.trajectory = random_walk(walk, walk_seed);
  scene.device.lidar_rate = walk.rate;
  scene.roi = {walk.x_min - 1.0, walk.x_max + 1.0, walk.y_min - 1.0,
               walk.y_max + 1.0, -1.6, 1.5};
  return scene;
}

std::array<Point3, 4> board_corners(const BoardPose& pose,
                                    const BoardSpec& board) {
  const Frame3 fr = board_frame(pose);
  const auto local = diamond_local(board);
  std::array<Point3, 4> out;
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = to_point(to_vec(pose.center) + local[k][0] * fr.h +
                      local[k][1] * fr.e);
  }
  return out;
}

BoardPose pose_with_top_vertex(const Point3& vertex, double normal_azimuth,
                               double tilt, const BoardSpec& board) {
  BoardPose pose{{0.0, 0.0, 0.0}, normal_azimuth, tilt};
  const Frame3 fr = board_frame(pose);
  const auto top = diamond_local(board)[0];
  pose.center = to_point(to_vec(vertex) - top[0] * fr.h - top[1] * fr.e);
  return pose;
}

SyntheticRecording generate(const SyntheticScene& scene, std::uint64_t seed) {
  scene.validate();
  const DeviceSpec& dev = scene.device;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> point_noise(0.0, 1.0);

  SyntheticRecording rec;
  if (scene.trajectory.empty()) {
    return rec;
  }

  const double cam_t0 = scene.trajectory.front().timestamp + dev.camera_time_offset;
  const double cam_period = 1.0 / dev.camera_rate;
  const double t_end = scene.trajectory.back().timestamp + 1.0 / dev.lidar_rate;
  for (std::size_t k = 0;; ++k) {
    const double t = cam_t0 + static_cast<double>(k) * cam_period;
    if (t > t_end) {
      break;
    }
    rec.camera_frames.push_back({camera_id(k), t, camera_id(k) + ".svg"});
  }

  std::vector<Facet> static_facets;
  for (const auto& post : scene.clutter.posts) {
    static_facets.push_back(upright_rect(post.x, post.y, post.width,
                                         scene.clutter.ground_z, post.top, 60.0));
  }
  std::set<long> ground_firings;
  if (scene.clutter.ground) {
    const double res = dev.horizontal_resolution;
    const long n = dev.firings_per_revolution();
    const long first = static_cast<long>(
        std::ceil((scene.clutter.azimuth_min - dev.azimuth_offset) / res));
    const long last = static_cast<long>(
        std::floor((scene.clutter.azimuth_max - dev.azimuth_offset) / res));
    for (long k = first; k <= last; ++k) {
      ground_firings.insert(((k % n) + n) % n);
    }
  }

  rec.frames.reserve(scene.trajectory.size());
  for (std::size_t fi = 0; fi < scene.trajectory.size(); ++fi) {
    const TrajectorySample& sample = scene.trajectory[fi];
    std::vector<Facet> facets = static_facets;
    facets.push_back(board_facet(sample.pose, scene.board));
    if (scene.clutter.holder) {
      const Vec3 c = to_vec(sample.pose.center);
      const double r = std::hypot(c.x, c.y);
      const double push = 0.15 / r;
      facets.push_back(upright_rect(c.x * (1.0 + push), c.y * (1.0 + push), 0.4,
                                    scene.clutter.ground_z,
                                    scene.roi.z_min - 0.02, 40.0));
    }

    std::set<long> firings = ground_firings;
    for (const auto& f : facets) {
      collect_firings(f, dev, firings);
    }

    LidarFrame frame;
    frame.timestamp = sample.timestamp;
    struct BoardHit {
      Vec3 position;  // before point noise
      int ring;
      std::size_t index;  // into frame.points
    };
    std::vector<BoardHit> board_hits;
    for (int ring = 0; ring < dev.ring_count; ++ring) {
      const double el = dev.ring_elevation(ring);
      const double ce = std::cos(el);
      const double se = std::sin(el);
      for (const long k : firings) {
        const double az = dev.azimuth(k);
        const Vec3 dir{ce * std::cos(az), ce * std::sin(az), se};
        std::optional<Hit> best;
        for (const auto& f : facets) {
          if (auto q = intersect(f, dir, dev.max_range)) {
            const double range = std::sqrt(dot(*q, *q));
            if (!best || range < best->range) {
              best = Hit{*q, range, f.intensity, f.is_board};
            }
          }
        }
        if (scene.clutter.ground && ground_firings.count(k) && dir.z < 0.0) {
          const double t = scene.clutter.ground_z / dir.z;
          if (t <= dev.max_range && (!best || t < best->range)) {
            best = Hit{t * dir, t, 20.0, false};
          }
        }
        if (!best) {
          continue;
        }
        Vec3 measured = best->position;
        if (scene.noise.point_sigma > 0.0) {
          measured = measured + scene.noise.point_sigma *
                                    Vec3{point_noise(rng), point_noise(rng),
                                         point_noise(rng)};
        }
        if (best->is_board && scene.roi.contains(to_point(best->position))) {
          board_hits.push_back({best->position, ring, frame.points.size()});
        }
        frame.points.push_back({to_point(measured), best->intensity, ring});
      }
    }

    // Ledger: the noise-free board returns inside the ROI decide whether
    // this frame carries a unique top-ring vertex.
    if (!board_hits.empty() &&
        board_hits.size() >= scene.detector.min_object_points) {
      Vec3 lo{std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity()};
      Vec3 hi = -1.0 * lo;
      int ring_lo = dev.ring_count;
      int ring_hi = -1;
      for (const auto& b : board_hits) {
        const Vec3 p = b.position;
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
        ring_lo = std::min(ring_lo, b.ring);
        ring_hi = std::max(ring_hi, b.ring);
      }
      const Vec3 ext = hi - lo;
      const double diag = std::sqrt(dot(ext, ext));
      std::size_t top_count = 0;
      std::size_t top_pos = 0;
      for (std::size_t m = 0; m < board_hits.size(); ++m) {
        if (board_hits[m].ring == ring_hi) {
          ++top_count;
          top_pos = m;
        }
      }
      if (diag <= scene.detector.max_object_extent &&
          ring_hi - ring_lo >= scene.detector.min_ring_span && top_count == 1) {
        LedgerEntry entry;
        entry.frame_index = fi;
        entry.lidar_timestamp = sample.timestamp;
        entry.vertex = to_point(board_hits[top_pos].position);
        entry.measured_vertex = frame.points[board_hits[top_pos].index].position;
        const auto px = try_project(entry.vertex, scene.ground_truth);
        if (!px) {
          throw std::runtime_error(
              "synthetic vertex falls behind the ground-truth camera");
        }
        entry.pixel = *px;
        // Nearest camera frame on the regular grid, ties to the earlier one.
        const double pos = (sample.timestamp - cam_t0) / cam_period;
        std::size_t best_k = 0;
        double best_d = std::numeric_limits<double>::infinity();
        const long guess = std::lround(pos);
        for (long k = guess - 1; k <= guess + 1; ++k) {
          if (k < 0 || k >= static_cast<long>(rec.camera_frames.size())) {
            continue;
          }
          const double d =
              std::abs(rec.camera_frames[static_cast<std::size_t>(k)].timestamp -
                       sample.timestamp);
          if (d < best_d) {
            best_d = d;
            best_k = static_cast<std::size_t>(k);
          }
        }
        entry.camera_frame_id = rec.camera_frames[best_k].id;
        entry.camera_timestamp = rec.camera_frames[best_k].timestamp;
        entry.ring_span = ring_hi - ring_lo;
        entry.roi_point_count = board_hits.size();
        rec.ledger.push_back(entry);
      }
    }
    rec.frames.push_back(std::move(frame));
  }
  return rec;
}

CorrespondenceSet make_correspondences(const SyntheticRecording& rec,
                                       double pixel_sigma, std::uint64_t seed) {
  if (rec.ledger.empty()) {
    throw EmptyLedger("make_correspondences: the ledger is empty");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  CorrespondenceSet set;
  set.recording = "synthetic";
  set.devices = {"synthetic-lidar", "synthetic-camera"};
  for (const auto& entry : rec.ledger) {
    Correspondence c;
    c.lidar_point = entry.measured_vertex;
    c.pixel = entry.pixel;
    if (pixel_sigma > 0.0) {
      c.pixel.i += pixel_sigma * noise(rng);
      c.pixel.j += pixel_sigma * noise(rng);
    }
    c.lidar_timestamp = entry.lidar_timestamp;
    c.camera_timestamp = entry.camera_timestamp;
    c.camera_frame_id = entry.camera_frame_id;
    set.add(std::move(c));
  }
  return set;
}

std::vector<Point3> held_out_points(const SyntheticScene& scene,
                                    const WalkSpec& walk, std::size_t count,
                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(walk.x_min, walk.x_max);
  std::uniform_real_distribution<double> uy(walk.y_min, walk.y_max);
  const double reach = 0.5 * (scene.board.width + scene.board.height) /
                       std::numbers::sqrt2;
  std::uniform_real_distribution<double> uz(walk.center_z_min - reach,
                                            walk.center_z_max + reach);
  std::vector<Point3> out;
  out.reserve(count);
  for (std::size_t attempts = 0; out.size() < count; ++attempts) {
    if (attempts > 1000 * count + 1000) {
      throw std::runtime_error("held_out_points: volume is not visible");
    }
    const Point3 p{ux(rng), uy(rng), uz(rng)};
    const auto px = try_project(p, scene.ground_truth);
    if (px && px->i >= 0.0 && px->i < scene.device.image_rows && px->j >= 0.0 &&
        px->j < scene.device.image_cols) {
      out.push_back(p);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene configuration

namespace {

double number_or_angle(const nlohmann::ordered_json& j, const char* key,
                       double fallback, bool angle) {
  if (!j.contains(key)) {
    return fallback;
  }
  const auto& v = j.at(key);
  if (v.is_number()) {
    return v.get<double>();
  }
  if (v.is_string()) {
    const auto parsed = angle ? parse_angle(v.get<std::string>())
                              : parse_double(v.get<std::string>());
    if (parsed) {
      return *parsed;
    }
  }
  throw std::invalid_argument(std::string("scene config: bad value for '") +
                              key + "'");
}

}  // namespace

nlohmann::ordered_json scene_to_json(const SyntheticScene& scene) {
  nlohmann::ordered_json j;
  j["name"] = scene.name;
  const CameraKind kind = kind_of(scene.ground_truth);
  j["model"] = std::string(to_string(kind));
  const auto params = pack(scene.ground_truth);
  const auto names = param_names(kind);
  nlohmann::ordered_json gt;
  for (std::size_t k = 0; k < params.size(); ++k) {
    gt[std::string(names[k])] = params[k];
  }
  j["ground_truth"] = gt;
  const auto& d = scene.device;
  j["device"] = {{"ring_count", d.ring_count},
                 {"min_elevation", d.min_elevation},
                 {"max_elevation", d.max_elevation},
                 {"horizontal_resolution", d.horizontal_resolution},
                 {"azimuth_offset", d.azimuth_offset},
                 {"max_range", d.max_range},
                 {"lidar_rate", d.lidar_rate},
                 {"camera_rate", d.camera_rate},
                 {"camera_time_offset", d.camera_time_offset},
                 {"image_rows", d.image_rows},
                 {"image_cols", d.image_cols}};
  j["noise"] = {{"pixel_sigma", scene.noise.pixel_sigma},
                {"point_sigma", scene.noise.point_sigma}};
  j["board"] = {{"width", scene.board.width}, {"height", scene.board.height}};
  nlohmann::ordered_json posts = nlohmann::ordered_json::array();
  for (const auto& p : scene.clutter.posts) {
    posts.push_back({{"x", p.x}, {"y", p.y}, {"width", p.width}, {"top", p.top}});
  }
  j["clutter"] = {{"ground", scene.clutter.ground},
                  {"ground_z", scene.clutter.ground_z},
                  {"azimuth_min", scene.clutter.azimuth_min},
                  {"azimuth_max", scene.clutter.azimuth_max},
                  {"holder", scene.clutter.holder},
                  {"posts", posts}};
  const auto& r = scene.roi;
  j["roi"] = {r.x_min, r.x_max, r.y_min, r.y_max, r.z_min, r.z_max};
  j["detector"] = {{"min_object_points", scene.detector.min_object_points},
                   {"max_object_extent", scene.detector.max_object_extent},
                   {"min_ring_span", scene.detector.min_ring_span}};
  nlohmann::ordered_json traj = nlohmann::ordered_json::array();
  for (const auto& s : scene.trajectory) {
    traj.push_back({{"t", s.timestamp},
                    {"center", {s.pose.center.x, s.pose.center.y, s.pose.center.z}},
                    {"normal_azimuth", s.pose.normal_azimuth},
                    {"tilt", s.pose.tilt}});
  }
  j["trajectory"] = traj;
  return j;
}

SyntheticScene scene_from_json(const nlohmann::ordered_json& config) {
  const CameraKind kind =
      parse_camera_kind(config.value("model", std::string("pinhole")));
  WalkSpec walk;
  SyntheticScene scene = reference_scene(kind, WalkSpec{.frames = 0}, 0);
  scene.name = config.value("name", scene.name);

  if (config.contains("ground_truth")) {
    const auto& gt = config.at("ground_truth");
    auto params = pack(scene.ground_truth);
    const auto names = param_names(kind);
    for (std::size_t k = 0; k < params.size(); ++k) {
      params[k] = number_or_angle(gt, std::string(names[k]).c_str(), params[k],
                                  k < 3);
    }
    scene.ground_truth = unpack(kind, params);
  }
  if (config.contains("device")) {
    const auto& d = config.at("device");
    auto& dev = scene.device;
    dev.ring_count = d.value("ring_count", dev.ring_count);
    dev.min_elevation = number_or_angle(d, "min_elevation", dev.min_elevation, true);
    dev.max_elevation = number_or_angle(d, "max_elevation", dev.max_elevation, true);
    dev.horizontal_resolution = number_or_angle(d, "horizontal_resolution",
                                                dev.horizontal_resolution, true);
    dev.azimuth_offset = number_or_angle(d, "azimuth_offset", dev.azimuth_offset, true);
    dev.max_range = number_or_angle(d, "max_range", dev.max_range, false);
    dev.lidar_rate = number_or_angle(d, "lidar_rate", dev.lidar_rate, false);
    dev.camera_rate = number_or_angle(d, "camera_rate", dev.camera_rate, false);
    dev.camera_time_offset =
        number_or_angle(d, "camera_time_offset", dev.camera_time_offset, false);
    dev.image_rows = d.value("image_rows", dev.image_rows);
    dev.image_cols = d.value("image_cols", dev.image_cols);
  }
  if (config.contains("noise")) {
    const auto& n = config.at("noise");
    scene.noise.pixel_sigma = number_or_angle(n, "pixel_sigma", 0.0, false);
    scene.noise.point_sigma = number_or_angle(n, "point_sigma", 0.0, false);
  }
  if (config.contains("board")) {
    const auto& b = config.at("board");
    scene.board.width = number_or_angle(b, "width", scene.board.width, false);
    scene.board.height = number_or_angle(b, "height", scene.board.height, false);
  }
  if (config.contains("detector")) {
    const auto& d = config.at("detector");
    scene.detector.min_object_points =
        d.value("min_object_points", scene.detector.min_object_points);
    scene.detector.max_object_extent =
        number_or_angle(d, "max_object_extent", scene.detector.max_object_extent, false);
    scene.detector.min_ring_span =
        d.value("min_ring_span", scene.detector.min_ring_span);
  }

  if (config.contains("walk")) {
    const auto& w = config.at("walk");
    walk.frames = w.value("frames", walk.frames);
    walk.start_time = number_or_angle(w, "start_time", walk.start_time, false);
    walk.rate = number_or_angle(w, "rate", scene.device.lidar_rate, false);
    walk.x_min = number_or_angle(w, "x_min", walk.x_min, false);
    walk.x_max = number_or_angle(w, "x_max", walk.x_max, false);
    walk.y_min = number_or_angle(w, "y_min", walk.y_min, false);
    walk.y_max = number_or_angle(w, "y_max", walk.y_max, false);
    walk.center_z_min = number_or_angle(w, "center_z_min", walk.center_z_min, false);
    walk.center_z_max = number_or_angle(w, "center_z_max", walk.center_z_max, false);
    walk.speed = number_or_angle(w, "speed", walk.speed, false);
    walk.max_view_angle = number_or_angle(w, "max_view_angle", walk.max_view_angle, true);
    walk.yaw_jitter = number_or_angle(w, "yaw_jitter", walk.yaw_jitter, true);
    walk.max_tilt = number_or_angle(w, "max_tilt", walk.max_tilt, true);
    scene.trajectory = random_walk(walk, config.value("walk_seed", std::uint64_t{0}));
    scene.device.lidar_rate = walk.rate;
    scene.roi = {walk.x_min - 1.0, walk.x_max + 1.0, walk.y_min - 1.0,
                 walk.y_max + 1.0, -1.6, 1.5};
  } else if (config.contains("trajectory")) {
    scene.trajectory.clear();
    for (const auto& s : config.at("trajectory")) {
      TrajectorySample t;
      t.timestamp = s.at("t").get<double>();
      const auto c = s.at("center").get<std::vector<double>>();
      if (c.size() != 3) {
        throw std::invalid_argument("scene config: trajectory center needs 3 values");
      }
      t.pose.center = {c[0], c[1], c[2]};
      t.pose.normal_azimuth = number_or_angle(s, "normal_azimuth", 0.0, true);
      t.pose.tilt = number_or_angle(s, "tilt", 0.0, true);
      scene.trajectory.push_back(t);
    }
  }

  if (config.contains("roi")) {
    const auto r = config.at("roi").get<std::vector<double>>();
    if (r.size() != 6) {
      throw std::invalid_argument("scene config: roi needs 6 values");
    }
    scene.roi = {r[0], r[1], r[2], r[3], r[4], r[5]};
  }
  if (config.contains("clutter")) {
    const auto& c = config.at("clutter");
    auto& cl = scene.clutter;
    cl.ground = c.value("ground", cl.ground);
    cl.ground_z = number_or_angle(c, "ground_z", cl.ground_z, false);
    cl.azimuth_min = number_or_angle(c, "azimuth_min", cl.azimuth_min, true);
    cl.azimuth_max = number_or_angle(c, "azimuth_max", cl.azimuth_max, true);
    cl.holder = c.value("holder", cl.holder);
    cl.posts.clear();
    if (c.contains("posts")) {
      for (const auto& p : c.at("posts")) {
        cl.posts.push_back({number_or_angle(p, "x", 0.0, false),
                            number_or_angle(p, "y", 0.0, false),
                            number_or_angle(p, "width", 0.3, false),
                            number_or_angle(p, "top", 0.0, false)});
      }
    }
  }
  scene.validate();
  return scene;
}

}  // namespace lcc::synth
