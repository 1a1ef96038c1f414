#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lcc/projection.hpp"

namespace lcc {

enum class CameraKind { pinhole, fisheye };

std::string_view to_string(CameraKind kind);
/// Accepts "pinhole" or "fisheye"; throws std::invalid_argument otherwise.
CameraKind parse_camera_kind(std::string_view text);

/// Canonical order: alpha, beta, gamma, u0, v0, w0, fx, fy, i0, j0, then for
/// fisheye alpha_c, k1, k2, k3, k4, k5.
using ParamVector = std::vector<double>;

std::size_t param_count(CameraKind kind);
std::span<const std::string_view> param_names(CameraKind kind);

/// Throws ModelMismatch if the length does not match `kind`.
Calibration unpack(CameraKind kind, std::span<const double> params);
ParamVector pack(const Calibration& cal);
CameraKind kind_of(const Calibration& cal);

struct ParamBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t size() const { return lower.size(); }
  /// Throws std::invalid_argument unless sizes agree and lower < upper.
  void validate() const;
  bool contains(std::span<const double> params) const;

  friend bool operator==(const ParamBounds&, const ParamBounds&) = default;
};

/// The hand-set search box for the reference LiDAR/camera rig.
ParamBounds default_bounds(CameraKind kind);

struct GaConfig {
  int slots = 5;
  int population = 800;
  int generations = 30;
  double bound_scale = 0.5;
  int max_iterations = 20;
  double convergence_epsilon = 1e-3;  // relative improvement between iterations
  std::uint64_t seed = 0;

  int tournament_size = 3;
  double crossover_probability = 0.8;
  double blend_low = -0.25;
  double blend_high = 1.25;
  double mutation_probability = 0.05;
  double mutation_scale = 0.1;  // sigma as a fraction of the bound width
  int elite_count = 2;

  /// 0 selects the per-model default (6 pinhole, 10 fisheye).
  std::size_t min_correspondences = 0;

  /// Threads used to run slots concurrently. Results do not depend on it.
  int workers = 1;

  void validate() const;
};

std::size_t default_min_correspondences(CameraKind kind);

/// A loss over a parameter vector. Must be safe to call concurrently when
/// GaConfig::workers > 1.
using Objective = std::function<double(std::span<const double>)>;

struct GaResult {
  ParamVector params;
  double error = 0.0;
  std::size_t evaluations = 0;
};

/// One GA slot: uniform initial population in `bounds`, then
/// `cfg.generations` rounds of tournament selection, blend crossover,
/// Gaussian mutation and elitism. Every candidate is clamped to `bounds`.
GaResult run_ga(const Objective& objective, const ParamBounds& bounds,
                const GaConfig& cfg, std::uint64_t slot_seed);

/// Mean reprojection error of `params` unpacked as `kind`.
double fitness(std::span<const double> params,
               std::span<const PointPixelPair> pairs, CameraKind kind);

GaResult ga_run(std::span<const PointPixelPair> pairs, CameraKind kind,
                const ParamBounds& bounds, const GaConfig& cfg,
                std::uint64_t slot_seed);

struct IterationTrace {
  int iteration = 0;
  ParamBounds bounds;                  // searched box, after clamping
  std::vector<double> half_width;      // before clamping
  std::vector<double> slot_errors;
  double best_error = 0.0;             // incumbent after this iteration

  friend bool operator==(const IterationTrace&, const IterationTrace&) = default;
};

struct SolveReport {
  ParamVector initial_params;  // midpoint of the initial bounds
  ParamVector best_params;
  double best_error_px = 0.0;
  std::vector<IterationTrace> trace;
  std::size_t evaluations_count = 0;
  bool converged = false;  // stopped on relative improvement, not the cap

  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

/// Seed used by slot `slot` of outer iteration `iteration` (both 1-based).
std::uint64_t derive_slot_seed(std::uint64_t seed, int iteration, int slot);

/// Iterative bound-narrowing search over a generic objective.
SolveReport solve_objective(const Objective& objective,
                            const ParamBounds& initial_bounds,
                            const GaConfig& cfg);

/// Throws TooFewCorrespondences below the configured minimum.
SolveReport solve(std::span<const PointPixelPair> pairs, CameraKind kind,
                  const ParamBounds& initial_bounds, const GaConfig& cfg);

}  // namespace lcc
