#include "lcc/projection.hpp"

#include <algorithm>
#include <cmath>

#include "lcc/errors.hpp"

namespace lcc {

RotationMatrix rotation_matrix(const ExtrinsicParams& e) {
  const double ca = std::cos(e.alpha), sa = std::sin(e.alpha);
  const double cb = std::cos(e.beta), sb = std::sin(e.beta);
  const double cg = std::cos(e.gamma), sg = std::sin(e.gamma);

  RotationMatrix roll;
  roll << 1.0, 0.0, 0.0,
          0.0, ca, -sa,
          0.0, sa, ca;
  RotationMatrix pitch;
  pitch << cb, 0.0, sb,
           0.0, 1.0, 0.0,
           -sb, 0.0, cb;
  RotationMatrix yaw;
  yaw << cg, -sg, 0.0,
         sg, cg, 0.0,
         0.0, 0.0, 1.0;
  return roll * pitch * yaw;
}

CamPoint3 extrinsic_transform(const Point3& p, const RotationMatrix& r,
                              const ExtrinsicParams& e) {
  return {r(0, 0) * p.x + r(0, 1) * p.y + r(0, 2) * p.z + e.u0,
          r(1, 0) * p.x + r(1, 1) * p.y + r(1, 2) * p.z + e.v0,
          r(2, 0) * p.x + r(2, 1) * p.y + r(2, 2) * p.z + e.w0};
}

CamPoint3 extrinsic_transform(const Point3& p, const ExtrinsicParams& e) {
  return extrinsic_transform(p, rotation_matrix(e), e);
}

std::optional<Pixel> try_project_pinhole(const CamPoint3& c,
                                         const PinholeIntrinsics& k) {
  if (!(c.w > kEpsilonDepth)) {
    return std::nullopt;
  }
  const double un = c.u / c.w;
  const double vn = c.v / c.w;
  return Pixel{k.fx * un + k.i0, k.fy * vn + k.j0};
}

std::optional<Pixel> try_project_fisheye(const CamPoint3& c,
                                         const FisheyeIntrinsics& k) {
  if (!(c.w > kEpsilonDepth)) {
    return std::nullopt;
  }
  const double un = c.u / c.w;
  const double vn = c.v / c.w;
  const double r2 = un * un + vn * vn;
  const double radial = 1.0 + k.k1 * r2 + k.k2 * r2 * r2 + k.k5 * r2 * r2 * r2;

  const double xd = radial * un;
  const double yd = radial * vn;
  const double dx = 2.0 * k.k3 * un * vn + k.k4 * (r2 + 2.0 * un * un);
  const double dy = k.k3 * (r2 + 2.0 * vn * vn) + 2.0 * k.k4 * un * vn;

  const double x = xd + dx;
  const double y = yd + dy;
  return Pixel{k.fx * x + k.alpha_c * k.fx * y + k.i0, k.fy * y + k.j0};
}

std::optional<Pixel> try_project_intrinsic(const CamPoint3& c,
                                           const CameraModel& camera) {
  return std::visit(
      [&](const auto& k) -> std::optional<Pixel> {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, PinholeIntrinsics>) {
          return try_project_pinhole(c, k);
        } else {
          return try_project_fisheye(c, k);
        }
      },
      camera);
}

Pixel project_pinhole(const CamPoint3& c, const PinholeIntrinsics& k) {
  if (auto px = try_project_pinhole(c, k)) {
    return *px;
  }
  throw BehindCamera();
}

Pixel project_fisheye(const CamPoint3& c, const FisheyeIntrinsics& k) {
  if (auto px = try_project_fisheye(c, k)) {
    return *px;
  }
  throw BehindCamera();
}

std::optional<Pixel> try_project(const Point3& p, const Calibration& cal) {
  return try_project_intrinsic(extrinsic_transform(p, cal.extrinsic),
                               cal.camera);
}

Pixel project(const Point3& p, const Calibration& cal) {
  if (auto px = try_project(p, cal)) {
    return *px;
  }
  throw BehindCamera();
}

namespace {

template <typename Intrinsics, typename ProjectFn>
double mean_error(std::span<const PointPixelPair> pairs,
                  const ExtrinsicParams& e, const Intrinsics& k,
                  ProjectFn&& project_fn) {
  const RotationMatrix r = rotation_matrix(e);
  double total = 0.0;
  for (const auto& pair : pairs) {
    const auto px = project_fn(extrinsic_transform(pair.point, r, e), k);
    if (px) {
      total += std::hypot(px->i - pair.pixel.i, px->j - pair.pixel.j);
    } else {
      total += kBehindCameraPenaltyPx;
    }
  }
  return total / static_cast<double>(pairs.size());
}

}  // namespace

double reprojection_error(std::span<const PointPixelPair> pairs,
                          const Calibration& cal) {
  if (pairs.empty()) {
    throw EmptyInput("reprojection_error: no correspondences");
  }
  if (const auto* k = std::get_if<PinholeIntrinsics>(&cal.camera)) {
    return mean_error(pairs, cal.extrinsic, *k,
                      [](const CamPoint3& c, const PinholeIntrinsics& kk) {
                        return try_project_pinhole(c, kk);
                      });
  }
  return mean_error(pairs, cal.extrinsic,
                    std::get<FisheyeIntrinsics>(cal.camera),
                    [](const CamPoint3& c, const FisheyeIntrinsics& kk) {
                      return try_project_fisheye(c, kk);
                    });
}

double angle_to_camera_normal(const CamPoint3& c) {
  return std::atan2(std::hypot(c.u, c.v), c.w);
}

std::vector<AngleBin> error_by_angle(std::span<const PointPixelPair> pairs,
                                     const Calibration& cal,
                                     std::size_t bins) {
  if (pairs.empty()) {
    throw EmptyInput("error_by_angle: no correspondences");
  }
  if (bins == 0) {
    throw std::invalid_argument("error_by_angle: bins must be >= 1");
  }

  const RotationMatrix r = rotation_matrix(cal.extrinsic);
  std::vector<double> angles;
  std::vector<double> errors;
  angles.reserve(pairs.size());
  errors.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const CamPoint3 c = extrinsic_transform(pair.point, r, cal.extrinsic);
    angles.push_back(angle_to_camera_normal(c));
    const auto px = try_project_intrinsic(c, cal.camera);
    errors.push_back(px ? std::hypot(px->i - pair.pixel.i,
                                     px->j - pair.pixel.j)
                        : kBehindCameraPenaltyPx);
  }

  const double max_angle = *std::max_element(angles.begin(), angles.end());
  const double width = max_angle / static_cast<double>(bins);

  std::vector<AngleBin> out(bins);
  std::vector<double> sums(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lower = width * static_cast<double>(b);
    out[b].upper = b + 1 == bins ? max_angle : width * static_cast<double>(b + 1);
  }
  for (std::size_t n = 0; n < angles.size(); ++n) {
    std::size_t b = 0;
    if (max_angle > 0.0) {
      b = static_cast<std::size_t>(angles[n] / width);
      b = std::min(b, bins - 1);
    }
    out[b].count += 1;
    sums[b] += errors[n];
  }
  for (std::size_t b = 0; b < bins; ++b) {
    if (out[b].count > 0) {
      out[b].mean_error = sums[b] / static_cast<double>(out[b].count);
    }
  }
  return out;
}

}  // namespace lcc
