#include "mm1game/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mm1game/dynamics.hpp"
#include "mm1game/errors.hpp"
#include "mm1game/numeric.hpp"

namespace mm1game {

namespace {

// The target sits this fraction of epsilon inside the bound, so that the realized
// equilibrium (computed to ~1e-10) cannot land a rounding error above 1 + epsilon.
constexpr double kTargetMargin = 1e-6;

std::string fmt(double v) { return std::to_string(v); }

}  // namespace

StepPolicy step_policy(const GameConfig& config) { return StepPolicy{config.optimal_total_rate()}; }

double symmetric_poa(const GameConfig& config, double per_user_effective, WelfareKind kind) {
  const double a = config.common_alpha();
  const double mu = config.mu();
  const auto m = static_cast<double>(config.m());
  const double headroom = mu - m * per_user_effective;
  if (!(per_user_effective > 0.0) || !(headroom > 0.0)) return INFINITY;
  const double each = std::pow(per_user_effective, a) * headroom;
  if (kind == WelfareKind::SumUtility) {
    return social_optimum_sum(config).value / (m * each);
  }
  const double opt_total = config.optimal_total_rate();
  const double opt_each = std::pow(opt_total / m, a) * (mu - opt_total);
  return std::exp(m * (std::log(opt_each) - std::log(each)));
}

double target_effective_rate(const DesignSpec& spec) {
  if (!(spec.epsilon > 0.0)) {
    throw DesignInfeasible(
        "epsilon must be positive: no linear drop policy can make the equilibrium exactly "
        "optimal (PoA = 1 is unattainable)");
  }
  const GameConfig& config = spec.config;
  const double opt_total = config.optimal_total_rate();
  const auto m = static_cast<double>(config.m());
  const double target = 1.0 + spec.epsilon * (1.0 - kTargetMargin);

  const double best = symmetric_poa(config, opt_total / m, spec.welfare_kind);
  if (best >= target) {
    throw DesignInfeasible("even the optimal symmetric load has PoA " + fmt(best) + " under " +
                           std::string(to_string(spec.welfare_kind)) + "; epsilon " +
                           fmt(spec.epsilon) + " is out of reach");
  }
  auto excess = [&](double total) {
    return symmetric_poa(config, total / m, spec.welfare_kind) - target;
  };
  double lo = opt_total * 0.5;
  while (excess(lo) < 0.0) lo *= 0.5;
  return numeric::bisect(excess, lo, opt_total, 1e-15 * opt_total);
}

PolicyDesign design_linear(const DesignSpec& spec) {
  const GameConfig& config = spec.config;
  const double a = config.common_alpha();
  const double p = spec.p_tilde;
  if (!(p > a / (a + 1.0)) || !(p < 1.0)) {
    throw InvalidArgument("p_tilde must lie in (alpha / (alpha + 1), 1)");
  }
  const double opt_total = config.optimal_total_rate();
  const double eff_total = spec.lambda_e_tilde ? *spec.lambda_e_tilde : target_effective_rate(spec);
  if (!(eff_total > 0.0) || !(eff_total < opt_total)) {
    throw InvalidArgument("lambda_e_tilde must lie in (0, " + fmt(opt_total) + ")");
  }

  const auto m = static_cast<double>(config.m());
  const double raw_total = eff_total / p;
  const double own_eff = eff_total / m;
  const double others_eff = (m - 1.0) * eff_total / m;
  const double gap = opt_total - eff_total;

  // First-order condition at the symmetric target, written in effective rates,
  //   p^2 [(a+1)(opt - eff) + others_eff] = A own_eff (a+1)(eff - opt),
  // with A = p / (raw_total - r2), is affine in r2:
  //   lhs * (raw_total - r2) = p own_eff (a+1)(eff - opt).
  const double lhs = p * p * ((a + 1.0) * gap + others_eff);
  const double rhs = p * own_eff * (a + 1.0) * (eff_total - opt_total);
  if (!(lhs > 0.0) || rhs == 0.0) {
    throw DesignInfeasible("design equation is degenerate for these inputs");
  }
  const double r2 = raw_total - rhs / lhs;
  const double slope = p / (raw_total - r2);
  const double r1 = 1.0 / slope + r2;

  if (!(r1 > 0.0) || !(r1 < raw_total) || !(raw_total < r2)) {
    throw DesignInfeasible("design produced r1 = " + fmt(r1) + ", r2 = " + fmt(r2) +
                           " which does not bracket the target total " + fmt(raw_total));
  }

  return PolicyDesign{
      .policy = LinearPolicy(r1, r2),
      .lambda_e_tilde = eff_total,
      .lambda_tilde = raw_total,
      .predicted_ne = RateProfile::uniform(config.m(), raw_total / m),
      .predicted_poa = symmetric_poa(config, own_eff, spec.welfare_kind),
      .diagnostics = std::nullopt,
  };
}

SlopeCheck check_slope(const LinearPolicy& policy, const GameConfig& config) {
  const double a = config.common_alpha();
  const double opt_total = config.optimal_total_rate();
  SlopeCheck check{false, INFINITY, policy.r1() < config.mu()};
  if (policy.r1() > opt_total) {
    check.slope_bound = 1.0 / ((a + 1.0) * (policy.r1() - opt_total));
    check.steep_enough = std::abs(policy.slope()) > check.slope_bound;
  }
  return check;
}

DesignDiagnostics validate_design(const PolicyDesign& design, const DesignSpec& spec) {
  const GameConfig& config = spec.config;
  const SlopeCheck slope = check_slope(design.policy, config);

  DesignDiagnostics diag;
  diag.steep_enough = slope.steep_enough;
  diag.slope_bound = slope.slope_bound;
  diag.r1_below_mu = slope.r1_below_mu;

  const double start = 0.25 * config.optimal_total_rate() / static_cast<double>(config.m());
  const Trajectory traj = run_dynamics(config, design.policy, RateProfile::uniform(config.m(), start),
                                       UpdateMode::RoundRobin, 1e-11, 200000);
  diag.realized_ne = traj.final_profile;
  double max_diff = 0.0;
  for (std::size_t i = 0; i < config.m(); ++i) {
    max_diff = std::max(max_diff, std::abs(traj.final_profile[i] - design.predicted_ne[i]));
  }
  diag.ne_matches = traj.converged && max_diff < 1e-6 * std::max(1.0, design.lambda_tilde);
  diag.realized_poa = poa_of_equilibrium(traj.final_profile, design.policy, config, spec.welfare_kind);
  diag.poa_within_bound = diag.realized_poa <= 1.0 + spec.epsilon;
  return diag;
}

}  // namespace mm1game
