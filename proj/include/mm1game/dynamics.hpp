#pragma once

// Best responses, best-response dynamics and equilibrium checks.

#include <cstddef>
#include <optional>
#include <vector>

#include "mm1game/core_model.hpp"

namespace mm1game {

enum class UpdateMode {
  /// Users revise one at a time against the latest rates (Gauss-Seidel).
  RoundRobin,
  /// Every user revises against the previous sweep's rates (Jacobi). No convergence guarantee.
  Simultaneous,
};

struct Trajectory {
  /// iterates[0] is the initial profile; iterates[k] the profile after sweep k.
  std::vector<RateProfile> iterates;
  /// Potential after every single-user revision, starting with the initial profile.
  std::vector<double> potential_series;
  bool converged = false;
  RateProfile final_profile;
  std::size_t sweeps = 0;
};

struct BestResponseOptions {
  /// Samples used to bracket the maximizer on the dropping segment.
  std::size_t bracket_points = 1000;
  double refine_tol = 1e-10;
};

/// Utility-maximizing rate of user i against a fixed `others_total`.
double best_response(std::size_t i, double others_total, const DropPolicy& policy,
                     const GameConfig& config, const BestResponseOptions& options = {});

Trajectory run_dynamics(const GameConfig& config, const DropPolicy& policy, const RateProfile& init,
                        UpdateMode mode = UpdateMode::RoundRobin, double tol = 1e-10,
                        std::size_t max_iter = 10000);

struct Deviation {
  std::size_t user;
  double rate;
  double utility;
  double gain;
};

struct ScanOptions {
  std::size_t grid_points = 10000;
  double tol = 1e-7;
};

/// Most profitable unilateral deviation found by a dense scan plus local refinement,
/// or nothing when no user gains more than `options.tol`.
std::optional<Deviation> find_profitable_deviation(const RateProfile& profile,
                                                   const DropPolicy& policy,
                                                   const GameConfig& config,
                                                   const ScanOptions& options = {});

bool verify_equilibrium(const RateProfile& profile, const DropPolicy& policy,
                        const GameConfig& config, double tol = 1e-7);

struct FieldVector {
  RateProfile point;
  RateProfile response;
  double d1;
  double d2;
};

/// Two-user best-response field: at each point, the move to (BR_1(lambda_2), BR_2(lambda_1)).
std::vector<FieldVector> response_field(const GameConfig& config, const DropPolicy& policy,
                                        const std::vector<RateProfile>& grid);

/// Grid points (i * step, j * step), i, j >= 1, with raw total below `limit`.
std::vector<RateProfile> lower_triangle_grid(double step, double limit);

}  // namespace mm1game
