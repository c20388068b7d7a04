#include "mm1game/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mm1game/errors.hpp"

namespace mm1game {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void require_index(std::size_t i, std::size_t m) {
  if (i >= m) {
    throw InvalidArgument("user index " + std::to_string(i) + " out of range for " +
                          std::to_string(m) + " users");
  }
}

void require_matching(const RateProfile& profile, const GameConfig& config) {
  if (profile.size() != config.m()) {
    throw InvalidArgument("rate profile has " + std::to_string(profile.size()) +
                          " entries, game has " + std::to_string(config.m()) + " users");
  }
}

}  // namespace

GameConfig::GameConfig(double mu, std::vector<double> alphas) : mu_(mu), alphas_(std::move(alphas)) {
  if (!(mu_ > 0.0) || !std::isfinite(mu_)) {
    throw InvalidArgument("mu must be a finite positive rate");
  }
  if (alphas_.empty()) {
    throw InvalidArgument("at least one user is required");
  }
  for (double a : alphas_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw InvalidArgument("every alpha must be finite and positive");
    }
  }
}

GameConfig GameConfig::homogeneous(double mu, double alpha, std::size_t m) {
  return GameConfig(mu, std::vector<double>(m, alpha));
}

bool GameConfig::is_homogeneous() const {
  return std::all_of(alphas_.begin(), alphas_.end(), [&](double a) { return a == alphas_.front(); });
}

double GameConfig::common_alpha() const {
  if (!is_homogeneous()) {
    throw Unsupported("operation requires equal alpha for all users");
  }
  return alphas_.front();
}

double GameConfig::optimal_total_rate() const {
  const double a = common_alpha();
  return mu_ * a / (a + 1.0);
}

RateProfile::RateProfile(std::vector<double> rates) : rates_(std::move(rates)) {
  for (double r : rates_) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw InvalidArgument("rates must be finite and non-negative");
    }
  }
}

RateProfile RateProfile::uniform(std::size_t m, double rate) {
  return RateProfile(std::vector<double>(m, rate));
}

double RateProfile::total() const { return std::accumulate(rates_.begin(), rates_.end(), 0.0); }

double RateProfile::others_total(std::size_t i) const {
  double sum = 0.0;
  for (std::size_t j = 0; j < rates_.size(); ++j) {
    if (j != i) sum += rates_[j];
  }
  return sum;
}

RateProfile RateProfile::with(std::size_t i, double rate) const {
  RateProfile copy = *this;
  copy.set(i, rate);
  return copy;
}

void RateProfile::set(std::size_t i, double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw InvalidArgument("rates must be finite and non-negative");
  }
  rates_.at(i) = rate;
}

LinearPolicy::LinearPolicy(double r1, double r2) : r1_(r1), r2_(r2) {
  if (!(r1_ > 0.0) || !(r2_ > r1_) || !std::isfinite(r2_)) {
    throw InvalidArgument("linear policy needs 0 < r1 < r2");
  }
}

LinearPolicy LinearPolicy::from_slope_intercept(double slope, double intercept) {
  if (!(slope < 0.0) || !(intercept > 1.0)) {
    throw InvalidArgument("linear policy needs slope < 0 and intercept > 1");
  }
  const double r2 = -intercept / slope;
  return LinearPolicy(r2 + 1.0 / slope, r2);
}

double keep_probability(const DropPolicy& policy, double total_rate) {
  return std::visit(
      Overloaded{
          [](const NoDrop&) { return 1.0; },
          [&](const StepPolicy& p) { return total_rate <= p.threshold ? 1.0 : 0.0; },
          [&](const LinearPolicy& p) {
            if (total_rate <= p.r1()) return 1.0;
            if (total_rate >= p.r2()) return 0.0;
            return p.slope() * (total_rate - p.r2());
          },
      },
      policy);
}

double keep_probability_slope(const DropPolicy& policy, double total_rate) {
  return std::visit(
      Overloaded{
          [](const NoDrop&) { return 0.0; },
          [&](const StepPolicy& p) {
            if (total_rate == p.threshold) {
              throw NonDifferentiable("keep-probability jumps at the step threshold");
            }
            return 0.0;
          },
          [&](const LinearPolicy& p) {
            if (total_rate == p.r1() || total_rate == p.r2()) {
              throw NonDifferentiable("keep-probability has a kink at r1 and r2");
            }
            return (total_rate > p.r1() && total_rate < p.r2()) ? p.slope() : 0.0;
          },
      },
      policy);
}

EffectiveRates effective_rates(const RateProfile& profile, const DropPolicy& policy) {
  const double total = profile.total();
  const double keep = keep_probability(policy, total);
  EffectiveRates out;
  out.rates.reserve(profile.size());
  for (double r : profile.rates()) out.rates.push_back(r * keep);
  out.total = total * keep;
  return out;
}

bool feasible(const RateProfile& profile, const DropPolicy& policy, const GameConfig& config) {
  if (profile.size() != config.m()) return false;
  const double total = profile.total();
  return total * keep_probability(policy, total) < config.mu();
}

double utility_against(std::size_t i, double rate, double others_total, const DropPolicy& policy,
                       const GameConfig& config) {
  const double total = rate + others_total;
  const double keep = keep_probability(policy, total);
  return std::pow(rate * keep, config.alpha(i)) * (config.mu() - total * keep);
}

double utility(std::size_t i, const RateProfile& profile, const DropPolicy& policy,
               const GameConfig& config) {
  require_matching(profile, config);
  require_index(i, config.m());
  if (!feasible(profile, policy, config)) {
    throw UnstableQueue("effective load reaches the service rate; the queue is unstable");
  }
  return utility_against(i, profile[i], profile.others_total(i), policy, config);
}

double potential(const RateProfile& profile, const DropPolicy& policy, const GameConfig& config) {
  require_matching(profile, config);
  if (!feasible(profile, policy, config)) {
    throw UnstableQueue("effective load reaches the service rate; the queue is unstable");
  }
  // log U_i = alpha log lambda_i + [alpha log P(T) + log(mu - T P(T))]. The bracket
  // depends on lambda_i only through T, so sum_j alpha log lambda_j + bracket is an
  // exact potential of the log-utilities. P enters with power alpha, not m * alpha.
  // Step and NoDrop keep P in {0, 1}, where any positive exponent gives the same value.
  const double exponent = std::holds_alternative<LinearPolicy>(policy) ? config.common_alpha() : 1.0;
  const double total = profile.total();
  const double keep = keep_probability(policy, total);
  double value = (config.mu() - keep * total) * std::pow(keep, exponent);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    value *= std::pow(profile[i], config.alpha(i));
  }
  return value;
}

double marginal_utility(std::size_t i, const RateProfile& profile, const DropPolicy& policy,
                        const GameConfig& config) {
  require_matching(profile, config);
  require_index(i, config.m());
  if (!feasible(profile, policy, config)) {
    throw UnstableQueue("effective load reaches the service rate; the queue is unstable");
  }
  const double total = profile.total();
  const double keep = keep_probability(policy, total);
  const double dkeep = keep_probability_slope(policy, total);
  const double own = profile[i];
  const double alpha = config.alpha(i);
  const double own_eff = own * keep;
  // d/dlambda_i of (lambda_i P)^a (mu - T P), with dP/dlambda_i = P'.
  const double d_own_eff = keep + own * dkeep;
  const double d_load = keep + total * dkeep;
  const double headroom = config.mu() - total * keep;
  const double throughput_term =
      own_eff == 0.0 ? (alpha == 1.0 ? 1.0 : (alpha < 1.0 ? INFINITY : 0.0))
                     : alpha * std::pow(own_eff, alpha - 1.0);
  const double first = d_own_eff == 0.0 ? 0.0 : throughput_term * d_own_eff * headroom;
  return first - std::pow(own_eff, alpha) * d_load;
}

}  // namespace mm1game
