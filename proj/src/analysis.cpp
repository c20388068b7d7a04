#include "mm1game/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <variant>

#include "mm1game/errors.hpp"

namespace mm1game {

std::string_view to_string(WelfareKind kind) {
  switch (kind) {
    case WelfareKind::SumUtility:
      return "sum_utility";
    case WelfareKind::SumLogUtility:
      return "sum_log_utility";
  }
  return "unknown";
}

WelfareKind parse_welfare_kind(std::string_view name) {
  if (name == "sum" || name == "sum_utility") return WelfareKind::SumUtility;
  if (name == "log" || name == "sum_log" || name == "sum_log_utility") {
    return WelfareKind::SumLogUtility;
  }
  throw InvalidArgument("unknown welfare kind '" + std::string(name) +
                        "' (expected sum_utility or sum_log_utility)");
}

RateProfile ne_closed_form(const GameConfig& config) {
  const auto alphas = config.alphas();
  const double denom = std::accumulate(alphas.begin(), alphas.end(), 0.0) + 1.0;
  std::vector<double> rates;
  rates.reserve(alphas.size());
  for (double a : alphas) rates.push_back(config.mu() * a / denom);
  return RateProfile(std::move(rates));
}

SocialOptimum social_optimum_sum(const GameConfig& config) {
  const double a = config.common_alpha();
  const double mu = config.mu();
  const auto m = static_cast<double>(config.m());
  const double total = config.optimal_total_rate();
  const double single = std::pow(a, a) * std::pow(mu, a + 1.0) / std::pow(a + 1.0, a + 1.0);
  if (a > 1.0) {
    std::vector<double> rates(config.m(), 0.0);
    rates.front() = total;
    return {RateProfile(std::move(rates)), single};
  }
  return {RateProfile::uniform(config.m(), total / m), std::pow(m, 1.0 - a) * single};
}

RateProfile social_optimum_log(const GameConfig& config) {
  const double total = config.optimal_total_rate();
  return RateProfile::uniform(config.m(), total / static_cast<double>(config.m()));
}

double welfare(const RateProfile& profile, const DropPolicy& policy, const GameConfig& config,
               WelfareKind kind) {
  double sum = 0.0;
  for (std::size_t i = 0; i < config.m(); ++i) {
    const double u = utility(i, profile, policy, config);
    if (kind == WelfareKind::SumUtility) {
      sum += u;
    } else {
      if (u <= 0.0) return -INFINITY;
      sum += std::log(u);
    }
  }
  return sum;
}

double poa_closed_form(std::size_t m, double alpha, WelfareKind kind) {
  if (m == 0 || !(alpha > 0.0)) {
    throw InvalidArgument("poa_closed_form needs m >= 1 and alpha > 0");
  }
  const auto md = static_cast<double>(m);
  const double head = std::pow(alpha * md + 1.0, alpha + 1.0) / std::pow(alpha + 1.0, alpha + 1.0);
  if (kind == WelfareKind::SumUtility) {
    return alpha > 1.0 ? head / md : head / std::pow(md, alpha);
  }
  return std::pow(head / std::pow(md, alpha), md);
}

namespace {

double optimum_welfare(const GameConfig& config, WelfareKind kind) {
  if (kind == WelfareKind::SumUtility) return social_optimum_sum(config).value;
  return welfare(social_optimum_log(config), NoDrop{}, config, kind);
}

double ratio_from(double optimum, double at_ne, WelfareKind kind) {
  if (kind == WelfareKind::SumUtility) {
    return at_ne > 0.0 ? optimum / at_ne : INFINITY;
  }
  if (at_ne == -INFINITY) return INFINITY;
  return std::exp(optimum - at_ne);
}

}  // namespace

double poa_of_equilibrium(const RateProfile& ne_profile, const DropPolicy& policy,
                          const GameConfig& config, WelfareKind kind) {
  return ratio_from(optimum_welfare(config, kind), welfare(ne_profile, policy, config, kind), kind);
}

WelfareReport welfare_report(const RateProfile& ne_profile, const DropPolicy& policy,
                             const GameConfig& config, WelfareKind kind) {
  WelfareReport report{
      .optimum_profile = kind == WelfareKind::SumUtility ? social_optimum_sum(config).profile
                                                         : social_optimum_log(config),
      .optimum_value = optimum_welfare(config, kind),
      .ne_profile = ne_profile,
      .ne_value = welfare(ne_profile, policy, config, kind),
      .poa = 0.0,
      .pos = 0.0,
  };
  report.poa = ratio_from(report.optimum_value, report.ne_value, kind);
  report.pos = report.poa;

  if (const auto* step = std::get_if<StepPolicy>(&policy)) {
    // Every profile summing to the threshold is an equilibrium. Welfare over that
    // simplex is extremal at its centre or at a vertex.
    std::vector<double> vertex(config.m(), 0.0);
    vertex.front() = step->threshold;
    for (const RateProfile& candidate :
         {RateProfile::uniform(config.m(), step->threshold / static_cast<double>(config.m())),
          RateProfile(vertex)}) {
      if (!feasible(candidate, policy, config)) continue;
      const double ratio = ratio_from(report.optimum_value, welfare(candidate, policy, config, kind), kind);
      report.poa = std::max(report.poa, ratio);
      report.pos = std::min(report.pos, ratio);
    }
  }
  return report;
}

}  // namespace mm1game
