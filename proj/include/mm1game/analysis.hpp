#pragma once

// Closed-form equilibrium and welfare analytics.

#include <string_view>

#include "mm1game/core_model.hpp"

namespace mm1game {

enum class WelfareKind {
  SumUtility,
  /// Sum of log-utilities; ratios are taken after exponentiation, so the
  /// welfare ratio becomes the product of per-user utility ratios.
  SumLogUtility,
};

std::string_view to_string(WelfareKind kind);
/// Accepts "sum" / "sum_utility" and "log" / "sum_log" / "sum_log_utility".
WelfareKind parse_welfare_kind(std::string_view name);

struct SocialOptimum {
  RateProfile profile;
  double value;
};

struct WelfareReport {
  RateProfile optimum_profile;
  double optimum_value;
  RateProfile ne_profile;
  double ne_value;
  double poa;
  double pos;
};

/// Unique equilibrium without dropping: lambda_i = mu alpha_i / (sum_k alpha_k + 1).
RateProfile ne_closed_form(const GameConfig& config);

/// Maximizer of the plain utility sum. For alpha > 1 the whole optimal load goes to user 0.
SocialOptimum social_optimum_sum(const GameConfig& config);

/// Maximizer of the log-utility sum: every user sends mu alpha / (m (alpha + 1)).
RateProfile social_optimum_log(const GameConfig& config);

/// Welfare of a feasible profile: sum of utilities, or sum of log-utilities (-inf if any is 0).
double welfare(const RateProfile& profile, const DropPolicy& policy, const GameConfig& config,
               WelfareKind kind);

/// PoA of the drop-free game in closed form.
double poa_closed_form(std::size_t m, double alpha, WelfareKind kind);

/// Drop-free cooperative optimum welfare over the welfare at `ne_profile` under `policy`.
/// Returns +infinity under SumLogUtility when some user has zero utility.
double poa_of_equilibrium(const RateProfile& ne_profile, const DropPolicy& policy,
                          const GameConfig& config, WelfareKind kind);

/// Optimum, equilibrium, PoA and PoS for a policy whose equilibrium is `ne_profile`.
/// Step policies have a continuum of equilibria; their worst and best cases are used.
WelfareReport welfare_report(const RateProfile& ne_profile, const DropPolicy& policy,
                             const GameConfig& config, WelfareKind kind);

}  // namespace mm1game
