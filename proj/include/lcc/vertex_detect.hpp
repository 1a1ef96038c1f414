#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "lcc/projection.hpp"

namespace lcc {

struct LidarPoint {
  Point3 position;
  double intensity = 0.0;
  int ring = 0;  // 0 = lowest elevation

  friend bool operator==(const LidarPoint&, const LidarPoint&) = default;
};

struct LidarFrame {
  double timestamp = 0.0;
  std::vector<LidarPoint> points;

  friend bool operator==(const LidarFrame&, const LidarFrame&) = default;
};

/// Axis-aligned box in the LiDAR frame with closed faces.
struct RoiBox {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double z_min = 0.0, z_max = 0.0;

  /// Throws std::invalid_argument unless min < max on every axis.
  void validate() const;

  bool contains(const Point3& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max &&
           p.z >= z_min && p.z <= z_max;
  }

  friend bool operator==(const RoiBox&, const RoiBox&) = default;
};

struct DetectorConfig {
  std::size_t min_object_points = 10;
  double max_object_extent = 1.5;  // bounding-box diagonal, meters
  int min_ring_span = 3;
};

struct VertexDetection {
  double frame_timestamp = 0.0;
  Point3 vertex;
  int ring_span = 0;
  std::size_t roi_point_count = 0;

  friend bool operator==(const VertexDetection&,
                         const VertexDetection&) = default;
};

enum class DropReason {
  too_few_points,
  object_too_large,
  ring_span_too_small,
  top_ring_not_unique,
};

std::string_view to_string(DropReason reason);

struct FrameDrop {
  DropReason reason;
  std::size_t roi_point_count = 0;
  int ring_span = 0;
  std::size_t top_ring_count = 0;
};

using FrameOutcome = std::variant<VertexDetection, FrameDrop>;

std::vector<LidarPoint> roi_filter(const LidarFrame& frame, const RoiBox& roi);

/// Full outcome of the per-frame test, including why a frame was dropped.
FrameOutcome inspect_frame(const LidarFrame& frame, const RoiBox& roi,
                           const DetectorConfig& config = {});

/// The single point on the highest ring inside the ROI, when the ROI subset
/// passes the size, ring-span and uniqueness checks.
std::optional<VertexDetection> detect_vertex(const LidarFrame& frame,
                                             const RoiBox& roi,
                                             const DetectorConfig& config = {});

std::vector<VertexDetection> detect_sequence(std::span<const LidarFrame> frames,
                                             const RoiBox& roi,
                                             const DetectorConfig& config = {});

/// Uniform elevation bins for devices whose output lacks a ring channel.
struct RingLayout {
  int ring_count = 16;
  double min_elevation = -15.0 * 3.14159265358979323846 / 180.0;  // radians
  double max_elevation = 15.0 * 3.14159265358979323846 / 180.0;   // radians
};

/// Assigns each point the ring whose elevation bin contains it; points outside
/// the range clamp to the nearest edge ring.
LidarFrame derive_rings(LidarFrame frame, const RingLayout& layout);

}  // namespace lcc
