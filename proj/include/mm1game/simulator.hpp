#pragma once

// Slotted stochastic simulation of the shared queue. The server does not know
// the true offered load: each slot it estimates the total arrival rate from the
// preceding window of slots and drops with P_d(estimate).

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mm1game/analysis.hpp"
#include "mm1game/core_model.hpp"

namespace mm1game {

enum class QueueMode {
  /// Each slot's accepted packets see delay 1 / (mu - accepted_in_slot).
  AnalyticDelay,
  /// Packets are served FIFO with exponential service; sojourn times are measured.
  EventQueue,
};

std::string_view to_string(QueueMode mode);
QueueMode parse_queue_mode(std::string_view name);

struct SimConfig {
  GameConfig game;
  DropPolicy policy;
  /// Poisson arrival rate of each user, in packets per slot.
  RateProfile input_rates;
  std::uint64_t slots = 100000;
  std::uint64_t window = 1;
  std::uint64_t seed = 1;
  QueueMode queue_mode = QueueMode::EventQueue;
  /// EventQueue only: backlog beyond this many packets aborts the run.
  std::uint64_t queue_cap = 10'000'000;
  bool record_slots = true;
};

struct UserStats {
  double input_rate = 0.0;
  double goodput = 0.0;
  double mean_delay = 0.0;
  double power = 0.0;
  std::uint64_t arrived = 0;
  std::uint64_t accepted = 0;

  bool operator==(const UserStats&) const = default;
};

struct SlotRecord {
  std::uint64_t slot;
  double estimated_rate;
  double drop_probability;
  std::uint64_t arrivals;
  std::uint64_t accepted;

  bool operator==(const SlotRecord&) const = default;
};

struct SimReport {
  std::vector<UserStats> users;
  /// Slots counted after the warm-up window.
  std::uint64_t measured_slots = 0;
  double sum_welfare = 0.0;
  double log_welfare = 0.0;
  double empirical_poa_sum = 0.0;
  double empirical_poa_log = 0.0;
  /// Mean of the rate estimates over measured slots.
  double mean_estimated_rate = 0.0;
  std::vector<SlotRecord> slots;

  bool operator==(const SimReport&) const = default;
};

/// Mean of the last min(window, history.size()) entries.
double estimate_rate(std::span<const std::uint64_t> history, std::uint64_t window);

SimReport run(const SimConfig& sim);

/// No-drop optimum welfare over the welfare measured in `report`.
double empirical_poa(const SimReport& report, const GameConfig& config, WelfareKind kind);

struct SweepOptions {
  double p_tilde = 0.9;
  WelfareKind welfare_kind = WelfareKind::SumLogUtility;
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

struct SweepRow {
  double desired_poa;
  double mu;
  std::uint64_t window;
  double mean_poa = 0.0;
  double std_poa = 0.0;
  std::uint64_t replications = 0;
  /// Empty on success; otherwise the error that stopped the cell.
  std::string error;
};

/// Designs the linear policy for each desired PoA, feeds its target rates into
/// `replications` seeded runs (seed = base.seed + k) and aggregates the achieved PoA.
/// Rows are ordered desired_poa-major, then mu, then window.
std::vector<SweepRow> sweep(const SimConfig& base, std::span<const double> desired_poas,
                            std::span<const double> mus, std::span<const std::uint64_t> windows,
                            std::uint64_t replications, const SweepOptions& options = {});

}  // namespace mm1game
