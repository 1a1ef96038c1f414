#include "lcc/vertex_detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lcc {

void RoiBox::validate() const {
  if (!(x_min < x_max && y_min < y_max && z_min < z_max)) {
    throw std::invalid_argument("ROI requires min < max on every axis");
  }
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::too_few_points:
      return "too_few_points";
    case DropReason::object_too_large:
      return "object_too_large";
    case DropReason::ring_span_too_small:
      return "ring_span_too_small";
    case DropReason::top_ring_not_unique:
      return "top_ring_not_unique";
  }
  return "unknown";
}

std::vector<LidarPoint> roi_filter(const LidarFrame& frame, const RoiBox& roi) {
  std::vector<LidarPoint> out;
  for (const auto& p : frame.points) {
    if (roi.contains(p.position)) {
      out.push_back(p);
    }
  }
  return out;
}

FrameOutcome inspect_frame(const LidarFrame& frame, const RoiBox& roi,
                           const DetectorConfig& config) {
  const std::vector<LidarPoint> inside = roi_filter(frame, roi);

  FrameDrop drop{DropReason::too_few_points, inside.size(), 0, 0};
  if (inside.empty() || inside.size() < config.min_object_points) {
    return drop;
  }

  constexpr double inf = std::numeric_limits<double>::infinity();
  Point3 lo{inf, inf, inf};
  Point3 hi{-inf, -inf, -inf};
  int min_ring = std::numeric_limits<int>::max();
  int max_ring = std::numeric_limits<int>::min();
  for (const auto& p : inside) {
    lo = {std::min(lo.x, p.position.x), std::min(lo.y, p.position.y),
          std::min(lo.z, p.position.z)};
    hi = {std::max(hi.x, p.position.x), std::max(hi.y, p.position.y),
          std::max(hi.z, p.position.z)};
    min_ring = std::min(min_ring, p.ring);
    max_ring = std::max(max_ring, p.ring);
  }

  const double diagonal =
      std::sqrt((hi.x - lo.x) * (hi.x - lo.x) + (hi.y - lo.y) * (hi.y - lo.y) +
                (hi.z - lo.z) * (hi.z - lo.z));
  if (diagonal > config.max_object_extent) {
    drop.reason = DropReason::object_too_large;
    return drop;
  }

  drop.ring_span = max_ring - min_ring;
  if (drop.ring_span < config.min_ring_span) {
    drop.reason = DropReason::ring_span_too_small;
    return drop;
  }

  const LidarPoint* top = nullptr;
  for (const auto& p : inside) {
    if (p.ring == max_ring) {
      top = &p;
      ++drop.top_ring_count;
    }
  }
  if (drop.top_ring_count != 1) {
    drop.reason = DropReason::top_ring_not_unique;
    return drop;
  }

  return VertexDetection{frame.timestamp, top->position, drop.ring_span,
                         inside.size()};
}

std::optional<VertexDetection> detect_vertex(const LidarFrame& frame,
                                             const RoiBox& roi,
                                             const DetectorConfig& config) {
  auto outcome = inspect_frame(frame, roi, config);
  if (auto* det = std::get_if<VertexDetection>(&outcome)) {
    return *det;
  }
  return std::nullopt;
}

std::vector<VertexDetection> detect_sequence(std::span<const LidarFrame> frames,
                                             const RoiBox& roi,
                                             const DetectorConfig& config) {
  std::vector<VertexDetection> out;
  for (const auto& frame : frames) {
    if (auto det = detect_vertex(frame, roi, config)) {
      out.push_back(*det);
    }
  }
  return out;
}

LidarFrame derive_rings(LidarFrame frame, const RingLayout& layout) {
  if (layout.ring_count < 2) {
    throw std::invalid_argument("derive_rings: ring_count must be >= 2");
  }
  if (!(layout.min_elevation < layout.max_elevation)) {
    throw std::invalid_argument("derive_rings: empty elevation range");
  }
  const double width = (layout.max_elevation - layout.min_elevation) /
                       static_cast<double>(layout.ring_count);
  for (auto& p : frame.points) {
    const double elevation =
        std::atan2(p.position.z, std::hypot(p.position.x, p.position.y));
    const double bin = std::floor((elevation - layout.min_elevation) / width);
    p.ring = static_cast<int>(
        std::clamp(bin, 0.0, static_cast<double>(layout.ring_count - 1)));
  }
  return frame;
}

}  // namespace lcc
