#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace lcc {

/// Smallest camera-frame depth (meters) that still produces an image point.
inline constexpr double kEpsilonDepth = 1e-6;

/// Distance charged by reprojection_error for a point behind the camera.
inline constexpr double kBehindCameraPenaltyPx = 1e4;

/// A point in the LiDAR frame, meters.
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

/// A point in the camera frame; w is depth along the optical axis.
struct CamPoint3 {
  double u = 0.0;
  double v = 0.0;
  double w = 0.0;

  friend bool operator==(const CamPoint3&, const CamPoint3&) = default;
};

/// Image-plane coordinates. Not clipped to the sensor.
struct Pixel {
  double i = 0.0;
  double j = 0.0;

  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Roll/pitch/yaw about x, y, z (radians) and the translation (meters).
struct ExtrinsicParams {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double u0 = 0.0;
  double v0 = 0.0;
  double w0 = 0.0;

  friend bool operator==(const ExtrinsicParams&,
                         const ExtrinsicParams&) = default;
};

using RotationMatrix = Eigen::Matrix3d;

struct PinholeIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double i0 = 0.0;
  double j0 = 0.0;

  friend bool operator==(const PinholeIntrinsics&,
                         const PinholeIntrinsics&) = default;
};

/// Pinhole plus skew, three radial terms (k1, k2, k5 on r^2, r^4, r^6) and
/// two tangential terms (k3, k4).
struct FisheyeIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double i0 = 0.0;
  double j0 = 0.0;
  double alpha_c = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;
  double k5 = 0.0;

  friend bool operator==(const FisheyeIntrinsics&,
                         const FisheyeIntrinsics&) = default;
};

using CameraModel = std::variant<PinholeIntrinsics, FisheyeIntrinsics>;

struct Calibration {
  ExtrinsicParams extrinsic;
  CameraModel camera;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

/// A LiDAR point paired with the pixel it should image to.
struct PointPixelPair {
  Point3 point;
  Pixel pixel;
};

/// R = R_roll(alpha) * R_pitch(beta) * R_yaw(gamma).
RotationMatrix rotation_matrix(const ExtrinsicParams& e);

CamPoint3 extrinsic_transform(const Point3& p, const ExtrinsicParams& e);
CamPoint3 extrinsic_transform(const Point3& p, const RotationMatrix& r,
                              const ExtrinsicParams& e);

/// Throws BehindCamera when c.w <= kEpsilonDepth.
Pixel project_pinhole(const CamPoint3& c, const PinholeIntrinsics& k);
Pixel project_fisheye(const CamPoint3& c, const FisheyeIntrinsics& k);

/// Non-throwing forms; nullopt means the point is behind the camera.
std::optional<Pixel> try_project_pinhole(const CamPoint3& c,
                                         const PinholeIntrinsics& k);
std::optional<Pixel> try_project_fisheye(const CamPoint3& c,
                                         const FisheyeIntrinsics& k);
std::optional<Pixel> try_project_intrinsic(const CamPoint3& c,
                                           const CameraModel& camera);

Pixel project(const Point3& p, const Calibration& cal);
std::optional<Pixel> try_project(const Point3& p, const Calibration& cal);

/// Mean Euclidean pixel distance between projected points and their pixels.
/// Points behind the camera count as kBehindCameraPenaltyPx.
/// Throws EmptyInput for an empty list.
double reprojection_error(std::span<const PointPixelPair> pairs,
                          const Calibration& cal);

/// Angle between the camera-frame ray of a point and the optical axis.
double angle_to_camera_normal(const CamPoint3& c);

struct AngleBin {
  double lower = 0.0;  // radians
  double upper = 0.0;  // radians
  std::size_t count = 0;
  std::optional<double> mean_error;  // empty for an unpopulated bin
};

/// Buckets pairs uniformly over [0, max angle] by angle to the camera normal
/// and reports the mean pixel error per bucket. The last bucket is closed.
std::vector<AngleBin> error_by_angle(std::span<const PointPixelPair> pairs,
                                     const Calibration& cal, std::size_t bins);

}  // namespace lcc
