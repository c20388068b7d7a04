#pragma once

// Game primitives for m selfish users sharing one M/M/1 server.
//
// User i sends at rate lambda_i and values the power (lambda_i^e)^alpha_i / delay,
// where lambda_i^e = lambda_i * P(total) is the rate that survives the server's
// drop policy and the M/M/1 delay is 1 / (mu - sum_j lambda_j^e).

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace mm1game {

class GameConfig {
 public:
  GameConfig(double mu, std::vector<double> alphas);

  static GameConfig homogeneous(double mu, double alpha, std::size_t m);

  double mu() const { return mu_; }
  std::size_t m() const { return alphas_.size(); }
  std::span<const double> alphas() const { return alphas_; }
  double alpha(std::size_t i) const { return alphas_.at(i); }

  bool is_homogeneous() const;
  /// Common exponent; throws Unsupported when users differ.
  double common_alpha() const;

  /// mu * alpha / (alpha + 1): the welfare-optimal total rate (homogeneous only).
  double optimal_total_rate() const;

 private:
  double mu_;
  std::vector<double> alphas_;
};

class RateProfile {
 public:
  RateProfile() = default;
  explicit RateProfile(std::vector<double> rates);
  RateProfile(std::initializer_list<double> rates) : RateProfile(std::vector<double>(rates)) {}

  static RateProfile uniform(std::size_t m, double rate);

  std::size_t size() const { return rates_.size(); }
  double operator[](std::size_t i) const { return rates_[i]; }
  std::span<const double> rates() const { return rates_; }

  double total() const;
  double others_total(std::size_t i) const;

  /// Copy with user i's rate replaced.
  RateProfile with(std::size_t i, double rate) const;
  void set(std::size_t i, double rate);

  bool operator==(const RateProfile&) const = default;

 private:
  std::vector<double> rates_;
};

struct NoDrop {
  bool operator==(const NoDrop&) const = default;
};

/// Keeps every packet while total <= threshold, drops everything beyond.
struct StepPolicy {
  double threshold;
  bool operator==(const StepPolicy&) const = default;
};

/// Keep-probability 1 on [0, r1], 0 on [r2, inf), affine in between.
class LinearPolicy {
 public:
  LinearPolicy(double r1, double r2);
  /// Builds the policy whose affine segment is slope * total + intercept.
  static LinearPolicy from_slope_intercept(double slope, double intercept);

  double r1() const { return r1_; }
  double r2() const { return r2_; }
  /// A = 1 / (r1 - r2) < 0
  double slope() const { return 1.0 / (r1_ - r2_); }
  /// D = -A * r2
  double intercept() const { return -slope() * r2_; }

  bool operator==(const LinearPolicy&) const = default;

 private:
  double r1_;
  double r2_;
};

using DropPolicy = std::variant<NoDrop, StepPolicy, LinearPolicy>;

struct EffectiveRates {
  std::vector<double> rates;
  double total = 0.0;
};

/// P(total) = 1 - P_d(total).
double keep_probability(const DropPolicy& policy, double total_rate);

/// dP/dtotal; throws NonDifferentiable at a breakpoint.
double keep_probability_slope(const DropPolicy& policy, double total_rate);

EffectiveRates effective_rates(const RateProfile& profile, const DropPolicy& policy);

/// True iff all rates are >= 0 and the effective load is strictly below mu.
bool feasible(const RateProfile& profile, const DropPolicy& policy, const GameConfig& config);

/// U_i = (lambda_i P)^alpha_i * (mu - total * P). Throws UnstableQueue when infeasible.
double utility(std::size_t i, const RateProfile& profile, const DropPolicy& policy,
               const GameConfig& config);

/// Utility of user i when it sends `rate` against `others_total`, with no
/// feasibility check: returns the raw formula, negative past saturation.
double utility_against(std::size_t i, double rate, double others_total, const DropPolicy& policy,
                       const GameConfig& config);

/// Ordinal potential of the game: phi = P(T)^alpha * (mu - T P(T)) * prod_i lambda_i^alpha_i.
/// Any unilateral change moves phi and the mover's utility in the same direction.
/// Linear policies require equal alpha (throws Unsupported otherwise).
double potential(const RateProfile& profile, const DropPolicy& policy, const GameConfig& config);

/// Analytic dU_i / dlambda_i.
double marginal_utility(std::size_t i, const RateProfile& profile, const DropPolicy& policy,
                        const GameConfig& config);

}  // namespace mm1game
