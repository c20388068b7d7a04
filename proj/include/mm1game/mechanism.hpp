#pragma once

// Synthesis of drop policies that steer selfish users toward the welfare optimum.
//
// The linear design picks a target equilibrium (every user's effective rate
// lambda_e / m, keep-probability p at that point) and places the affine segment of
// P through (lambda_e / p, p) with the slope that makes the target satisfy each
// user's first-order condition.

#include <optional>

#include "mm1game/analysis.hpp"
#include "mm1game/core_model.hpp"

namespace mm1game {

struct DesignSpec {
  GameConfig config;
  /// PoA slack: the design guarantees 1 < PoA <= 1 + epsilon.
  double epsilon = 0.05;
  /// Keep-probability at the target equilibrium, in (alpha / (alpha + 1), 1).
  double p_tilde = 0.9;
  WelfareKind welfare_kind = WelfareKind::SumLogUtility;
  /// Target effective total rate; derived from epsilon when absent.
  std::optional<double> lambda_e_tilde;
};

struct DesignDiagnostics {
  /// r1 > lambda_opt and |A| > 1 / ((alpha + 1)(r1 - lambda_opt)).
  bool steep_enough = false;
  double slope_bound = 0.0;
  bool r1_below_mu = false;
  bool ne_matches = false;
  RateProfile realized_ne;
  double realized_poa = 0.0;
  bool poa_within_bound = false;

  bool all_pass() const { return steep_enough && r1_below_mu && ne_matches && poa_within_bound; }
};

struct PolicyDesign {
  LinearPolicy policy;
  double lambda_e_tilde;
  /// Raw total rate at the target: lambda_e_tilde / p_tilde.
  double lambda_tilde;
  /// Every user at lambda_e_tilde / (m p_tilde).
  RateProfile predicted_ne;
  double predicted_poa;
  std::optional<DesignDiagnostics> diagnostics;
};

/// Keeps everything up to the optimal total mu alpha / (alpha + 1), drops everything above.
StepPolicy step_policy(const GameConfig& config);

/// PoA when every user has effective rate `per_user_effective` and no dropping happens.
double symmetric_poa(const GameConfig& config, double per_user_effective, WelfareKind kind);

/// Effective total rate whose symmetric profile sits at PoA = 1 + epsilon.
double target_effective_rate(const DesignSpec& spec);

PolicyDesign design_linear(const DesignSpec& spec);

/// Checks for the slope condition that makes the target the unique equilibrium.
struct SlopeCheck {
  bool steep_enough;
  double slope_bound;
  bool r1_below_mu;
};
SlopeCheck check_slope(const LinearPolicy& policy, const GameConfig& config);

/// Runs best-response dynamics on the design and compares with its predictions.
DesignDiagnostics validate_design(const PolicyDesign& design, const DesignSpec& spec);

}  // namespace mm1game
