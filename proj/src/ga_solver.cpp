#include "lcc/ga_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "lcc/errors.hpp"

namespace lcc {

namespace {

constexpr std::array<std::string_view, 16> kParamNames = {
    "alpha", "beta", "gamma", "u0", "v0", "w0", "fx", "fy",
    "i0", "j0", "alpha_c", "k1", "k2", "k3", "k4", "k5"};

}  // namespace

std::string_view to_string(CameraKind kind) {
  return kind == CameraKind::pinhole ? "pinhole" : "fisheye";
}

CameraKind parse_camera_kind(std::string_view text) {
  if (text == "pinhole") {
    return CameraKind::pinhole;
  }
  if (text == "fisheye") {
    return CameraKind::fisheye;
  }
  throw std::invalid_argument("unknown camera model '" + std::string(text) +
                              "' (expected pinhole or fisheye)");
}

std::size_t param_count(CameraKind kind) {
  return kind == CameraKind::pinhole ? 10 : 16;
}

std::span<const std::string_view> param_names(CameraKind kind) {
  return std::span<const std::string_view>(kParamNames.data(),
                                           param_count(kind));
}

Calibration unpack(CameraKind kind, std::span<const double> p) {
  if (p.size() != param_count(kind)) {
    throw ModelMismatch(std::string(to_string(kind)) + " expects " +
                        std::to_string(param_count(kind)) +
                        " parameters, got " + std::to_string(p.size()));
  }
  Calibration cal;
  cal.extrinsic = {p[0], p[1], p[2], p[3], p[4], p[5]};
  if (kind == CameraKind::pinhole) {
    cal.camera = PinholeIntrinsics{p[6], p[7], p[8], p[9]};
  } else {
    cal.camera = FisheyeIntrinsics{p[6],  p[7],  p[8],  p[9],  p[10],
                                   p[11], p[12], p[13], p[14], p[15]};
  }
  return cal;
}

ParamVector pack(const Calibration& cal) {
  const auto& e = cal.extrinsic;
  ParamVector out = {e.alpha, e.beta, e.gamma, e.u0, e.v0, e.w0};
  if (const auto* k = std::get_if<PinholeIntrinsics>(&cal.camera)) {
    out.insert(out.end(), {k->fx, k->fy, k->i0, k->j0});
  } else {
    const auto& f = std::get<FisheyeIntrinsics>(cal.camera);
    out.insert(out.end(), {f.fx, f.fy, f.i0, f.j0, f.alpha_c, f.k1, f.k2, f.k3,
                           f.k4, f.k5});
  }
  return out;
}

CameraKind kind_of(const Calibration& cal) {
  return std::holds_alternative<PinholeIntrinsics>(cal.camera)
             ? CameraKind::pinhole
             : CameraKind::fisheye;
}

void ParamBounds::validate() const {
  if (lower.size() != upper.size() || lower.empty()) {
    throw std::invalid_argument("bounds: lower/upper sizes differ or are empty");
  }
  for (std::size_t k = 0; k < lower.size(); ++k) {
    if (!(lower[k] < upper[k])) {
      throw std::invalid_argument("bounds: lower >= upper at index " +
                                  std::to_string(k));
    }
  }
}

bool ParamBounds::contains(std::span<const double> params) const {
  if (params.size() != size()) {
    return false;
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (!(params[k] >= lower[k] && params[k] <= upper[k])) {
      return false;
    }
  }
  return true;
}

ParamBounds default_bounds(CameraKind kind) {
  constexpr double pi = std::numbers::pi;
  ParamBounds b;
  b.lower = {0.2 * pi, -0.8 * pi, -0.3 * pi, -1.0, -1.0, -1.0,
             300.0,    300.0,     300.0,     300.0};
  b.upper = {0.8 * pi, -0.2 * pi, 0.3 * pi, 1.0, 1.0, 1.0,
             900.0,    900.0,     900.0,    900.0};
  if (kind == CameraKind::fisheye) {
    b.lower.insert(b.lower.end(), {-0.1, -1.0, -1.0, -1.0, -1.0, -1.0});
    b.upper.insert(b.upper.end(), {0.1, 1.0, 1.0, 1.0, 1.0, 1.0});
  }
  return b;
}

void GaConfig::validate() const {
  if (slots < 1 || population < 1 || generations < 1 || max_iterations < 1 ||
      tournament_size < 1 || workers < 1) {
    throw std::invalid_argument("GA counts must all be >= 1");
  }
  if (!(bound_scale > 0.0 && bound_scale < 1.0)) {
    throw std::invalid_argument("bound_scale must lie in (0, 1)");
  }
  if (elite_count < 0 || elite_count >= population) {
    throw std::invalid_argument("elite_count must lie in [0, population)");
  }
  if (!(crossover_probability >= 0.0 && crossover_probability <= 1.0) ||
      !(mutation_probability >= 0.0 && mutation_probability <= 1.0)) {
    throw std::invalid_argument("GA probabilities must lie in [0, 1]");
  }
  if (!(blend_low <= blend_high) || !(mutation_scale >= 0.0) ||
      !(convergence_epsilon >= 0.0)) {
    throw std::invalid_argument("invalid GA variation parameters");
  }
}

std::size_t default_min_correspondences(CameraKind kind) {
  return kind == CameraKind::pinhole ? 6 : 10;
}

namespace {

// Population stored row-major: individual n occupies [n*dim, (n+1)*dim).
class Population {
 public:
  Population(std::size_t count, std::size_t dim)
      : dim_(dim), genes_(count * dim), fitness_(count) {}

  std::span<double> genes(std::size_t n) {
    return {genes_.data() + n * dim_, dim_};
  }
  std::span<const double> genes(std::size_t n) const {
    return {genes_.data() + n * dim_, dim_};
  }
  double& fitness(std::size_t n) { return fitness_[n]; }
  double fitness(std::size_t n) const { return fitness_[n]; }
  std::size_t size() const { return fitness_.size(); }

 private:
  std::size_t dim_;
  std::vector<double> genes_;
  std::vector<double> fitness_;
};

double evaluate(const Objective& objective, std::span<const double> x) {
  const double f = objective(x);
  return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
}

bool better(const Population& pop, std::size_t a, std::size_t b) {
  return pop.fitness(a) < pop.fitness(b) ||
         (pop.fitness(a) == pop.fitness(b) && a < b);
}

}  // namespace

GaResult run_ga(const Objective& objective, const ParamBounds& bounds,
                const GaConfig& cfg, std::uint64_t slot_seed) {
  bounds.validate();
  cfg.validate();

  const std::size_t dim = bounds.size();
  const auto pop_size = static_cast<std::size_t>(cfg.population);
  const auto elites = static_cast<std::size_t>(cfg.elite_count);

  std::mt19937_64 rng(slot_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> blend(cfg.blend_low, cfg.blend_high);
  std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> width(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    width[k] = bounds.upper[k] - bounds.lower[k];
  }
  auto clamp_into = [&](std::span<double> x) {
    for (std::size_t k = 0; k < dim; ++k) {
      x[k] = std::clamp(x[k], bounds.lower[k], bounds.upper[k]);
    }
  };

  GaResult best;
  best.error = std::numeric_limits<double>::infinity();
  auto consider = [&](const Population& pop, std::size_t n) {
    if (pop.fitness(n) < best.error || best.params.empty()) {
      best.error = pop.fitness(n);
      best.params.assign(pop.genes(n).begin(), pop.genes(n).end());
    }
  };

  Population pop(pop_size, dim);
  for (std::size_t n = 0; n < pop_size; ++n) {
    auto x = pop.genes(n);
    for (std::size_t k = 0; k < dim; ++k) {
      x[k] = bounds.lower[k] + unit(rng) * width[k];
    }
    clamp_into(x);
    pop.fitness(n) = evaluate(objective, x);
    ++best.evaluations;
    consider(pop, n);
  }

  std::vector<std::size_t> order(pop_size);
  auto tournament = [&]() {
    std::size_t winner = pick(rng);
    for (int t = 1; t < cfg.tournament_size; ++t) {
      const std::size_t challenger = pick(rng);
      if (better(pop, challenger, winner)) {
        winner = challenger;
      }
    }
    return winner;
  };

  for (int gen = 0; gen < cfg.generations; ++gen) {
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(),
                      order.begin() + static_cast<std::ptrdiff_t>(elites),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        return better(pop, a, b);
                      });

    Population next(pop_size, dim);
    std::size_t filled = 0;
    for (; filled < elites; ++filled) {
      const auto src = pop.genes(order[filled]);
      std::copy(src.begin(), src.end(), next.genes(filled).begin());
      next.fitness(filled) = pop.fitness(order[filled]);
    }

    while (filled < pop_size) {
      const auto p1 = pop.genes(tournament());
      const auto p2 = pop.genes(tournament());
      auto c1 = next.genes(filled);
      const bool has_second = filled + 1 < pop_size;
      std::vector<double> spare;
      std::span<double> c2;
      if (has_second) {
        c2 = next.genes(filled + 1);
      } else {
        spare.resize(dim);
        c2 = spare;
      }

      if (unit(rng) < cfg.crossover_probability) {
        for (std::size_t k = 0; k < dim; ++k) {
          const double b = blend(rng);
          c1[k] = b * p1[k] + (1.0 - b) * p2[k];
          c2[k] = (1.0 - b) * p1[k] + b * p2[k];
        }
      } else {
        std::copy(p1.begin(), p1.end(), c1.begin());
        std::copy(p2.begin(), p2.end(), c2.begin());
      }

      for (auto child : {c1, c2}) {
        for (std::size_t k = 0; k < dim; ++k) {
          if (unit(rng) < cfg.mutation_probability) {
            child[k] += gauss(rng) * cfg.mutation_scale * width[k];
          }
        }
        clamp_into(child);
      }

      next.fitness(filled) = evaluate(objective, c1);
      ++best.evaluations;
      consider(next, filled);
      ++filled;
      if (has_second) {
        next.fitness(filled) = evaluate(objective, c2);
        ++best.evaluations;
        consider(next, filled);
        ++filled;
      }
    }
    pop = std::move(next);
  }
  return best;
}

double fitness(std::span<const double> params,
               std::span<const PointPixelPair> pairs, CameraKind kind) {
  return reprojection_error(pairs, unpack(kind, params));
}

namespace {

Objective make_fitness(std::span<const PointPixelPair> pairs, CameraKind kind) {
  if (pairs.empty()) {
    throw EmptyInput("fitness: no correspondences");
  }
  return [pairs, kind](std::span<const double> params) {
    return fitness(params, pairs, kind);
  };
}

}  // namespace

GaResult ga_run(std::span<const PointPixelPair> pairs, CameraKind kind,
                const ParamBounds& bounds, const GaConfig& cfg,
                std::uint64_t slot_seed) {
  if (bounds.size() != param_count(kind)) {
    throw ModelMismatch("bounds length does not match the camera model");
  }
  return run_ga(make_fitness(pairs, kind), bounds, cfg, slot_seed);
}

std::uint64_t derive_slot_seed(std::uint64_t seed, int iteration, int slot) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(iteration),
                    static_cast<std::uint32_t>(slot)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

namespace {

std::vector<GaResult> run_slots(const Objective& objective,
                                const ParamBounds& bounds, const GaConfig& cfg,
                                int iteration) {
  const auto slots = static_cast<std::size_t>(cfg.slots);
  std::vector<GaResult> results(slots);
  auto run_one = [&](std::size_t s) {
    results[s] = run_ga(objective, bounds, cfg,
                        derive_slot_seed(cfg.seed, iteration,
                                         static_cast<int>(s) + 1));
  };

  const auto workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), slots);
  if (workers <= 1) {
    for (std::size_t s = 0; s < slots; ++s) {
      run_one(s);
    }
    return results;
  }

  // Static striping: worker w runs slots w, w + workers, ...
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t s = w; s < slots; s += workers) {
            run_one(s);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return results;
}

}  // namespace

SolveReport solve_objective(const Objective& objective,
                            const ParamBounds& initial_bounds,
                            const GaConfig& cfg) {
  initial_bounds.validate();
  cfg.validate();
  const std::size_t dim = initial_bounds.size();

  SolveReport report;
  std::vector<double> initial_half(dim);
  report.initial_params.resize(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    initial_half[k] = 0.5 * (initial_bounds.upper[k] - initial_bounds.lower[k]);
    report.initial_params[k] =
        initial_bounds.lower[k] + initial_half[k];
  }
  report.best_params = report.initial_params;
  report.best_error_px = std::numeric_limits<double>::infinity();

  std::vector<double> half = initial_half;
  double previous = std::numeric_limits<double>::infinity();

  for (int iteration = 1; iteration <= cfg.max_iterations; ++iteration) {
    IterationTrace trace;
    trace.iteration = iteration;
    if (iteration == 1) {
      trace.bounds = initial_bounds;
    } else {
      for (std::size_t k = 0; k < dim; ++k) {
        half[k] *= cfg.bound_scale;
      }
      trace.bounds.lower.resize(dim);
      trace.bounds.upper.resize(dim);
      for (std::size_t k = 0; k < dim; ++k) {
        trace.bounds.lower[k] = std::max(initial_bounds.lower[k],
                                         report.best_params[k] - half[k]);
        trace.bounds.upper[k] = std::min(initial_bounds.upper[k],
                                         report.best_params[k] + half[k]);
      }
    }
    trace.half_width = half;

    const auto results = run_slots(objective, trace.bounds, cfg, iteration);
    std::size_t winner = 0;
    for (std::size_t s = 0; s < results.size(); ++s) {
      trace.slot_errors.push_back(results[s].error);
      report.evaluations_count += results[s].evaluations;
      if (results[s].error < results[winner].error) {
        winner = s;
      }
    }
    // The incumbent competes with this iteration's slot winner.
    if (results[winner].error < report.best_error_px) {
      report.best_error_px = results[winner].error;
      report.best_params = results[winner].params;
    }
    trace.best_error = report.best_error_px;
    report.trace.push_back(std::move(trace));

    if (iteration > 1) {
      const double improvement =
          previous > 0.0 ? (previous - report.best_error_px) / previous : 0.0;
      if (!(improvement >= cfg.convergence_epsilon)) {
        report.converged = true;
        break;
      }
    }
    previous = report.best_error_px;
  }
  return report;
}

SolveReport solve(std::span<const PointPixelPair> pairs, CameraKind kind,
                  const ParamBounds& initial_bounds, const GaConfig& cfg) {
  const std::size_t minimum = cfg.min_correspondences > 0
                                  ? cfg.min_correspondences
                                  : default_min_correspondences(kind);
  if (pairs.size() < minimum) {
    throw TooFewCorrespondences(
        std::string(to_string(kind)) + " solve needs at least " +
        std::to_string(minimum) + " correspondences, got " +
        std::to_string(pairs.size()));
  }
  if (initial_bounds.size() != param_count(kind)) {
    throw ModelMismatch("bounds length does not match the camera model");
  }
  return solve_objective(make_fitness(pairs, kind), initial_bounds, cfg);
}

}  // namespace lcc
