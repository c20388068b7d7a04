#include "mm1game/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <variant>

#include "mm1game/errors.hpp"
#include "mm1game/numeric.hpp"

namespace mm1game {

namespace {

/// Unconstrained maximizer of lambda^a (mu - lambda - others) without dropping.
double drop_free_response(double alpha, double mu, double others_total) {
  if (others_total >= mu) return 0.0;
  return (mu - others_total) * alpha / (alpha + 1.0);
}

struct Candidate {
  double rate;
  double utility;
};

void keep_better(Candidate& best, Candidate c) {
  if (c.utility > best.utility || (c.utility == best.utility && c.rate > best.rate)) best = c;
}

/// dU/dx on the dropping segment, divided by the positive factor (x P)^(alpha - 1).
double linear_region_slope(double x, double others, double alpha, double mu, const LinearPolicy& p) {
  const double total = x + others;
  const double keep = p.slope() * total + p.intercept();
  return alpha * (keep + x * p.slope()) * (mu - total * keep) - x * keep * (keep + total * p.slope());
}

/// Golden section only resolves a flat peak to about sqrt(machine epsilon). When the
/// derivative changes sign around the estimate, its root is found by bisection instead.
double polish_peak(double x, double lo, double hi, double width, double others, double alpha, double mu,
                   const LinearPolicy& p) {
  const double a = std::max(lo, x - width), b = std::min(hi, x + width);
  auto g = [&](double t) { return linear_region_slope(t, others, alpha, mu, p); };
  if (!(a > 0.0) || !(g(a) > 0.0) || !(g(b) < 0.0)) return x;
  return numeric::bisect(g, a, b, 1e-15);
}

}  // namespace

double best_response(std::size_t i, double others_total, const DropPolicy& policy,
                     const GameConfig& config, const BestResponseOptions& options) {
  if (!(others_total >= 0.0)) throw InvalidArgument("others_total must be non-negative");
  if (!std::holds_alternative<NoDrop>(policy) && !config.is_homogeneous()) {
    throw Unsupported("best responses under a drop policy require equal alpha");
  }
  const double alpha = config.alpha(i);
  const double mu = config.mu();
  const double free = drop_free_response(alpha, mu, others_total);

  if (std::holds_alternative<NoDrop>(policy)) return free;

  if (const auto* step = std::get_if<StepPolicy>(&policy)) {
    if (others_total >= step->threshold) return 0.0;
    return std::min(free, step->threshold - others_total);
  }

  const auto& linear = std::get<LinearPolicy>(policy);
  auto u = [&](double rate) { return utility_against(i, rate, others_total, policy, config); };

  Candidate best{0.0, 0.0};
  if (others_total < linear.r1()) {
    // On [0, r1 - others] nothing is dropped and the utility is unimodal with peak `free`.
    const double rate = std::min(free, linear.r1() - others_total);
    keep_better(best, {rate, u(rate)});
  }
  if (linear.r2() > others_total) {
    const double lo = std::max(0.0, linear.r1() - others_total);
    const double hi = linear.r2() - others_total;
    const auto m = numeric::bracket_and_refine(u, lo, hi, options.bracket_points, options.refine_tol);
    const double width = (hi - lo) / static_cast<double>(std::max<std::size_t>(options.bracket_points, 2));
    const double polished = polish_peak(m.x, lo, hi, width, others_total, alpha, mu, linear);
    keep_better(best, {polished, polished == m.x ? m.value : u(polished)});
  }
  return best.utility > 0.0 ? best.rate : 0.0;
}

Trajectory run_dynamics(const GameConfig& config, const DropPolicy& policy, const RateProfile& init,
                        UpdateMode mode, double tol, std::size_t max_iter) {
  if (!feasible(init, policy, config)) {
    throw UnstableQueue("initial profile is infeasible");
  }
  Trajectory traj;
  traj.iterates.push_back(init);
  traj.potential_series.push_back(potential(init, policy, config));

  RateProfile current = init;
  for (std::size_t sweep = 1; sweep <= max_iter; ++sweep) {
    const RateProfile previous = current;
    double max_change = 0.0;
    for (std::size_t i = 0; i < config.m(); ++i) {
      const RateProfile& against = mode == UpdateMode::RoundRobin ? current : previous;
      const double next = best_response(i, against.others_total(i), policy, config);
      max_change = std::max(max_change, std::abs(next - previous[i]));
      current.set(i, next);
      if (mode == UpdateMode::RoundRobin) {
        traj.potential_series.push_back(potential(current, policy, config));
      }
    }
    if (mode == UpdateMode::Simultaneous) {
      if (!feasible(current, policy, config)) {
        throw UnstableQueue("simultaneous update left the feasible region");
      }
      traj.potential_series.push_back(potential(current, policy, config));
    }
    traj.iterates.push_back(current);
    traj.sweeps = sweep;
    if (max_change < tol) {
      traj.converged = true;
      break;
    }
  }
  traj.final_profile = current;
  return traj;
}

std::optional<Deviation> find_profitable_deviation(const RateProfile& profile,
                                                   const DropPolicy& policy,
                                                   const GameConfig& config,
                                                   const ScanOptions& options) {
  std::optional<Deviation> best;
  for (std::size_t i = 0; i < config.m(); ++i) {
    const double others = profile.others_total(i);
    const double current = utility(i, profile, policy, config);
    auto u = [&](double rate) { return utility_against(i, rate, others, policy, config); };

    double reach = config.mu();
    if (const auto* linear = std::get_if<LinearPolicy>(&policy)) reach = std::max(reach, linear->r2());
    const double hi = reach - others;
    if (!(hi > 0.0)) continue;

    auto found = numeric::bracket_and_refine(u, 0.0, hi, options.grid_points, 1e-12);
    // Kinks where the maximizer sits on a breakpoint of P.
    std::vector<double> kinks{drop_free_response(config.alpha(i), config.mu(), others)};
    if (const auto* step = std::get_if<StepPolicy>(&policy)) kinks.push_back(step->threshold - others);
    if (const auto* linear = std::get_if<LinearPolicy>(&policy)) kinks.push_back(linear->r1() - others);
    for (double x : kinks) {
      if (x > 0.0 && x < hi && u(x) > found.value) found = {x, u(x)};
    }

    const double gain = found.value - current;
    if (gain > options.tol && (!best || gain > best->gain)) {
      best = Deviation{i, found.x, found.value, gain};
    }
  }
  return best;
}

bool verify_equilibrium(const RateProfile& profile, const DropPolicy& policy,
                        const GameConfig& config, double tol) {
  return !find_profitable_deviation(profile, policy, config, {.grid_points = 10000, .tol = tol});
}

std::vector<FieldVector> response_field(const GameConfig& config, const DropPolicy& policy,
                                        const std::vector<RateProfile>& grid) {
  if (config.m() != 2) throw InvalidArgument("response field is defined for two users");
  std::vector<FieldVector> field;
  field.reserve(grid.size());
  for (const RateProfile& point : grid) {
    if (point.size() != 2) throw InvalidArgument("field grid points must have two rates");
    const double br1 = best_response(0, point[1], policy, config);
    const double br2 = best_response(1, point[0], policy, config);
    field.push_back({point, RateProfile{br1, br2}, br1 - point[0], br2 - point[1]});
  }
  return field;
}

std::vector<RateProfile> lower_triangle_grid(double step, double limit) {
  if (!(step > 0.0) || !(limit > 0.0)) throw InvalidArgument("grid step and limit must be positive");
  std::vector<RateProfile> grid;
  for (int i = 1; i * step < limit; ++i) {
    for (int j = 1; (i + j) * step < limit; ++j) {
      grid.push_back(RateProfile{i * step, j * step});
    }
  }
  return grid;
}

}  // namespace mm1game
