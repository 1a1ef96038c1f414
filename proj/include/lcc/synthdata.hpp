#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcc/correspondence.hpp"
#include "lcc/ga_solver.hpp"
#include "lcc/projection.hpp"
#include "lcc/vertex_detect.hpp"

namespace lcc::synth {

/// Spinning multi-beam LiDAR plus a free-running camera.
struct DeviceSpec {
  int ring_count = 16;
  double min_elevation = -15.0 * std::numbers::pi / 180.0;
  double max_elevation = 15.0 * std::numbers::pi / 180.0;
  double horizontal_resolution = 0.2 * std::numbers::pi / 180.0;
  double azimuth_offset = 0.0;
  double max_range = 100.0;
  double lidar_rate = 10.0;   // Hz
  double camera_rate = 30.0;  // Hz
  double camera_time_offset = 0.011;  // s, first camera frame after start
  int image_rows = 1024;   // extent along i
  int image_cols = 1280;   // extent along j

  /// Elevation of ring `r`; rings are evenly spaced over the range.
  double ring_elevation(int r) const;
  /// Azimuth of firing `k` within a revolution.
  double azimuth(long k) const;
  long firings_per_revolution() const;
  RingLayout ring_layout() const;
};

struct NoiseSpec {
  double pixel_sigma = 0.0;  // px
  double point_sigma = 0.0;  // m, on LiDAR returns
};

/// Rectangular board turned 45 degrees in its own plane so one corner is on
/// top.
struct BoardSpec {
  double width = 0.61;
  double height = 0.91;
};

/// `normal_azimuth` is the heading of the board normal in the xy plane,
/// `tilt` leans the board back (positive tips the normal upward).
struct BoardPose {
  Point3 center;
  double normal_azimuth = 0.0;
  double tilt = 0.0;
};

struct TrajectorySample {
  double timestamp = 0.0;
  BoardPose pose;
};

/// Vertical flat post, facing the sensor, from the ground up to `top`.
struct Post {
  double x = 0.0;
  double y = 0.0;
  double width = 0.3;
  double top = 0.0;
};

struct ClutterSpec {
  bool ground = false;
  double ground_z = -1.9;
  double azimuth_min = 45.0 * std::numbers::pi / 180.0;
  double azimuth_max = 135.0 * std::numbers::pi / 180.0;
  bool holder = false;  // legs of the person under the board, below the ROI
  std::vector<Post> posts;
};

struct SyntheticScene {
  Calibration ground_truth;
  std::vector<TrajectorySample> trajectory;
  DeviceSpec device;
  NoiseSpec noise;
  BoardSpec board;
  ClutterSpec clutter;
  RoiBox roi;
  DetectorConfig detector;
  std::string name = "synthetic";

  /// Throws std::invalid_argument when an invariant does not hold.
  void validate() const;
};

/// Ground truth for the reference rig: camera looking along +y of a
/// z-up LiDAR, inside default_bounds(kind).
Calibration reference_calibration(CameraKind kind);

struct WalkSpec {
  std::size_t frames = 200;
  double start_time = 1600000000.0;
  double rate = 10.0;  // Hz
  double x_min = -5.0, x_max = 5.0;
  double y_min = 3.0, y_max = 33.0;
  double center_z_min = -0.9, center_z_max = -0.1;
  double speed = 1.2;  // m/s
  double max_view_angle = 38.0 * std::numbers::pi / 180.0;  // |atan2(x, y)|
  double yaw_jitter = 20.0 * std::numbers::pi / 180.0;
  double max_tilt = 10.0 * std::numbers::pi / 180.0;
};

/// A person carrying the board around the field in front of the sensors.
std::vector<TrajectorySample> random_walk(const WalkSpec& walk,
                                          std::uint64_t seed);

/// Reference scene: ground truth, default device, a walk and a ROI covering
/// the field.
SyntheticScene reference_scene(CameraKind kind, const WalkSpec& walk,
                               std::uint64_t walk_seed);

/// Corners in order top, right, bottom, left.
std::array<Point3, 4> board_corners(const BoardPose& pose,
                                    const BoardSpec& board);

/// Pose whose top corner sits exactly at `vertex`.
BoardPose pose_with_top_vertex(const Point3& vertex, double normal_azimuth,
                               double tilt, const BoardSpec& board);

struct LedgerEntry {
  std::size_t frame_index = 0;
  double lidar_timestamp = 0.0;
  Point3 vertex;           // before point noise
  Point3 measured_vertex;  // as stored in the frame
  Pixel pixel;             // project(vertex, ground_truth), before pixel noise
  std::string camera_frame_id;
  double camera_timestamp = 0.0;
  int ring_span = 0;
  std::size_t roi_point_count = 0;
};

struct SyntheticRecording {
  std::vector<LidarFrame> frames;
  std::vector<CameraFrameRef> camera_frames;
  std::vector<LedgerEntry> ledger;
};

SyntheticRecording generate(const SyntheticScene& scene, std::uint64_t seed);

/// One correspondence per ledger entry, pixel perturbed by isotropic
/// Gaussian noise. Throws EmptyLedger.
CorrespondenceSet make_correspondences(const SyntheticRecording& rec,
                                       double pixel_sigma, std::uint64_t seed);

/// Points spread over the walked volume that the ground truth images inside
/// the sensor; used to compare a solved calibration against the truth.
std::vector<Point3> held_out_points(const SyntheticScene& scene,
                                    const WalkSpec& walk, std::size_t count,
                                    std::uint64_t seed);

nlohmann::ordered_json scene_to_json(const SyntheticScene& scene);
/// Missing keys take reference defaults. A "walk" object, when present,
/// generates the trajectory (seeded by "walk_seed").
SyntheticScene scene_from_json(const nlohmann::ordered_json& config);

}  // namespace lcc::synth
