#include <cmath>

#include "doctest.h"
#include "mm1game/analysis.hpp"
#include "mm1game/errors.hpp"
#include "mm1game/mechanism.hpp"

using namespace mm1game;
using doctest::Approx;

namespace {

const GameConfig kSmall = GameConfig::homogeneous(6, 2, 2);

DesignSpec small_spec(double lambda_e) {
  return DesignSpec{.config = kSmall, .lambda_e_tilde = lambda_e};
}

// Symmetric log-welfare PoA evaluated from scratch: product of per-user ratios.
double direct_log_poa(double per_user_effective) {
  const double u_opt = 2.0 * 2.0 * (6.0 - 4.0);
  const double u = per_user_effective * per_user_effective * (6.0 - 2 * per_user_effective);
  return std::pow(u_opt / u, 2);
}

double bisect_oracle(double target) {
  double lo = 0.5, hi = 2.0;  // per-user effective rate; PoA falls on this interval
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (direct_log_poa(mid) > target ? lo : hi) = mid;
  }
  return 2 * lo;
}

}  // namespace

TEST_CASE("step policy threshold") {
  CHECK(step_policy(kSmall).threshold == Approx(4.0));
  CHECK(step_policy(GameConfig::homogeneous(10, 1, 3)).threshold == Approx(5.0));
  CHECK(step_policy(GameConfig::homogeneous(1, 100, 2)).threshold == Approx(100.0 / 101.0));
  CHECK_THROWS_AS(step_policy(GameConfig(6, {1, 2})), Unsupported);
}

TEST_CASE("target effective rate solves the PoA equation") {
  const DesignSpec spec{.config = kSmall, .epsilon = 0.05};
  const double x = target_effective_rate(spec);
  CHECK(x == Approx(3.62988816).epsilon(1e-7));
  CHECK(x == Approx(bisect_oracle(1.05)).epsilon(1e-5));
  CHECK(symmetric_poa(kSmall, 3.9 / 2, WelfareKind::SumLogUtility) == Approx(direct_log_poa(1.95)));
  CHECK(symmetric_poa(kSmall, 3.9 / 2, WelfareKind::SumLogUtility) == Approx(1.003698).epsilon(1e-6));
}

TEST_CASE("target rate approaches the optimum as epsilon shrinks") {
  double previous = 0.0;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const double x = target_effective_rate({.config = kSmall, .epsilon = eps});
    CHECK(x > previous);
    CHECK(x < 4.0);
    previous = x;
  }
  CHECK(previous == Approx(4.0).epsilon(1e-2));
}

TEST_CASE("zero slack is impossible") {
  CHECK_THROWS_AS(target_effective_rate({.config = kSmall, .epsilon = 0.0}), DesignInfeasible);
  CHECK_THROWS_AS(design_linear({.config = kSmall, .epsilon = 0.0}), DesignInfeasible);
}

TEST_CASE("worked design example") {
  const auto d = design_linear(small_spec(3.9));
  CHECK(d.policy.r1() == Approx(4.3012).epsilon(0.01 / 4.3));
  CHECK(d.policy.r2() == Approx(4.622).epsilon(0.01 / 4.6));
  CHECK(d.policy.r1() == Approx(4.301235).epsilon(1e-6));
  CHECK(d.policy.r2() == Approx(4.622222).epsilon(1e-6));
  CHECK(d.policy.slope() == Approx(-3.115385).epsilon(1e-6));
  CHECK(d.policy.intercept() == Approx(14.4));
  CHECK(std::abs(d.policy.r1() - (1.0 / d.policy.slope() + d.policy.r2())) < 1e-9);
  CHECK(std::abs(d.policy.slope() * d.lambda_tilde + d.policy.intercept() - 0.9) < 1e-9);
  CHECK(keep_probability(d.policy, d.lambda_tilde) == Approx(0.9).epsilon(1e-6));
  CHECK(d.predicted_ne[0] == Approx(3.9 / 1.8));
  CHECK(d.predicted_poa <= 1.05);
}

TEST_CASE("predicted equilibrium is a stationary point of each user's utility") {
  for (double lambda_e : {3.0, 3.5, 3.9}) {
    const auto d = design_linear(small_spec(lambda_e));
    const double own = d.predicted_ne[0], others = d.predicted_ne.others_total(0);
    const double h = 1e-6;
    const double fd = (utility_against(0, own + h, others, d.policy, kSmall) -
                       utility_against(0, own - h, others, d.policy, kSmall)) / (2 * h);
    CHECK(std::abs(fd) < 1e-5);
  }
}

TEST_CASE("slope magnitude grows as the target approaches the optimum") {
  double previous = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double lambda_e = 3.3 + 0.6 * k / 19.0;
    const auto d = design_linear(small_spec(lambda_e));
    CHECK(std::abs(d.policy.slope()) > previous);
    previous = std::abs(d.policy.slope());
  }
}

TEST_CASE("epsilon guarantee holds at the dynamics equilibrium") {
  for (double eps : {0.2, 0.1, 0.05, 0.01}) {
    const DesignSpec spec{.config = kSmall, .epsilon = eps};
    const auto d = design_linear(spec);
    const auto diag = validate_design(d, spec);
    CAPTURE(eps);
    CHECK(diag.ne_matches);
    CHECK(diag.r1_below_mu);
    CHECK(diag.realized_poa > 1.0);
    CHECK(diag.realized_poa <= 1.0 + eps);
    CHECK(effective_rates(diag.realized_ne, d.policy).total < kSmall.optimal_total_rate());
  }
}

TEST_CASE("worked design passes every check") {
  const auto spec = small_spec(3.9);
  const auto diag = validate_design(design_linear(spec), spec);
  CHECK(diag.all_pass());
  CHECK(diag.realized_ne[0] == Approx(2.1667).epsilon(1e-4));
}

TEST_CASE("slope checks") {
  const auto g = GameConfig::homogeneous(10, 2, 2);
  const auto fig7 = check_slope(LinearPolicy(7.0321, 7.8222), g);
  CHECK(fig7.steep_enough);
  CHECK(fig7.r1_below_mu);
  const auto flat = check_slope(LinearPolicy(7.0, 40.0), g);
  CHECK_FALSE(flat.steep_enough);
  CHECK(flat.slope_bound == Approx(1.0 / (3.0 * (7.0 - 20.0 / 3.0))));
}

TEST_CASE("design input validation") {
  CHECK_THROWS_AS(design_linear({.config = kSmall, .p_tilde = 0.6, .lambda_e_tilde = 3.9}), InvalidArgument);
  CHECK_THROWS_AS(design_linear({.config = kSmall, .p_tilde = 1.0, .lambda_e_tilde = 3.9}), InvalidArgument);
  CHECK_THROWS_AS(design_linear(small_spec(4.0)), InvalidArgument);
  CHECK_THROWS_AS(design_linear(small_spec(0.0)), InvalidArgument);
  CHECK_THROWS_AS(design_linear({.config = GameConfig(6, {1, 2}), .lambda_e_tilde = 3.0}), Unsupported);
}
