#include "mm1game/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include "mm1game/errors.hpp"
#include "mm1game/mechanism.hpp"

namespace mm1game {

std::string_view to_string(QueueMode mode) {
  return mode == QueueMode::AnalyticDelay ? "analytic" : "event";
}

QueueMode parse_queue_mode(std::string_view name) {
  if (name == "analytic" || name == "analytic_delay") return QueueMode::AnalyticDelay;
  if (name == "event" || name == "event_queue") return QueueMode::EventQueue;
  throw InvalidArgument("unknown queue mode '" + std::string(name) + "' (expected analytic or event)");
}

double estimate_rate(std::span<const std::uint64_t> history, std::uint64_t window) {
  if (history.empty()) throw InvalidArgument("rate estimate needs at least one slot of history");
  if (window == 0) throw InvalidArgument("estimation window must be at least one slot");
  const std::size_t n = std::min<std::size_t>(window, history.size());
  std::uint64_t sum = 0;
  for (std::size_t k = history.size() - n; k < history.size(); ++k) sum += history[k];
  return static_cast<double>(sum) / static_cast<double>(n);
}

namespace {

using Rng = std::mt19937_64;

std::uint64_t draw_poisson(Rng& rng, double mean) {
  if (mean <= 0.0) return 0;
  return std::poisson_distribution<std::uint64_t>(mean)(rng);
}

std::uint64_t draw_kept(Rng& rng, std::uint64_t arrivals, double keep) {
  if (arrivals == 0 || keep <= 0.0) return 0;
  if (keep >= 1.0) return arrivals;
  return std::binomial_distribution<std::uint64_t>(arrivals, keep)(rng);
}

/// FIFO single server with exponential service; carries its backlog across slots.
class FifoServer {
 public:
  FifoServer(double mu, std::uint64_t cap) : service_(mu), cap_(cap) {}

  /// Admits a packet at `time` and returns its sojourn time.
  double admit(double time, Rng& rng) {
    while (!departures_.empty() && departures_.front() <= time) departures_.pop_front();
    if (departures_.size() >= cap_) {
      throw Overload("queue backlog exceeded " + std::to_string(cap_) +
                     " packets; offered load overwhelms the server");
    }
    const double start = std::max(time, last_departure_);
    last_departure_ = start + service_(rng);
    departures_.push_back(last_departure_);
    return last_departure_ - time;
  }

 private:
  std::exponential_distribution<double> service_;
  std::uint64_t cap_;
  std::deque<double> departures_;
  double last_departure_ = 0.0;
};

void validate(const SimConfig& sim) {
  if (sim.input_rates.size() != sim.game.m()) {
    throw InvalidArgument("input_rates must have one entry per user");
  }
  if (sim.window == 0) throw InvalidArgument("window must be at least 1");
  if (sim.slots <= sim.window) throw InvalidArgument("slots must exceed the warm-up window");
  if (sim.queue_cap == 0) throw InvalidArgument("queue_cap must be positive");
}

}  // namespace

SimReport run(const SimConfig& sim) {
  validate(sim);
  const std::size_t m = sim.game.m();
  const double mu = sim.game.mu();
  Rng rng(sim.seed);
  std::uniform_real_distribution<double> within_slot(0.0, 1.0);
  FifoServer server(mu, sim.queue_cap);

  std::vector<std::uint64_t> window(sim.window, 0);
  std::uint64_t window_sum = 0;
  std::uint64_t window_fill = 0;

  std::vector<std::uint64_t> arrived(m, 0), accepted(m, 0);
  std::vector<double> delay_sum(m, 0.0);
  std::vector<std::uint64_t> slot_arrivals(m), slot_accepted(m);
  std::vector<std::pair<double, std::size_t>> arrivals_in_slot;
  double estimate_sum = 0.0;

  SimReport report;
  if (sim.record_slots) report.slots.reserve(sim.slots);

  for (std::uint64_t t = 0; t < sim.slots; ++t) {
    const bool measured = t >= sim.window;
    const double estimate =
        window_fill == 0 ? 0.0 : static_cast<double>(window_sum) / static_cast<double>(window_fill);
    // No estimate exists before the first slot completes; nothing is dropped then.
    const double keep = window_fill == 0 ? 1.0 : keep_probability(sim.policy, estimate);

    std::uint64_t total_arrivals = 0, total_accepted = 0;
    for (std::size_t i = 0; i < m; ++i) {
      slot_arrivals[i] = draw_poisson(rng, sim.input_rates[i]);
      slot_accepted[i] = draw_kept(rng, slot_arrivals[i], keep);
      total_arrivals += slot_arrivals[i];
      total_accepted += slot_accepted[i];
    }

    if (sim.queue_mode == QueueMode::AnalyticDelay) {
      if (static_cast<double>(total_accepted) >= mu) {
        throw Overload("slot " + std::to_string(t) + " accepted " + std::to_string(total_accepted) +
                       " packets against service rate " + std::to_string(mu));
      }
      const double delay = 1.0 / (mu - static_cast<double>(total_accepted));
      if (measured) {
        for (std::size_t i = 0; i < m; ++i) delay_sum[i] += static_cast<double>(slot_accepted[i]) * delay;
      }
    } else {
      arrivals_in_slot.clear();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::uint64_t k = 0; k < slot_accepted[i]; ++k) {
          arrivals_in_slot.emplace_back(static_cast<double>(t) + within_slot(rng), i);
        }
      }
      std::sort(arrivals_in_slot.begin(), arrivals_in_slot.end());
      for (const auto& [time, user] : arrivals_in_slot) {
        const double sojourn = server.admit(time, rng);
        if (measured) delay_sum[user] += sojourn;
      }
    }

    if (measured) {
      for (std::size_t i = 0; i < m; ++i) {
        arrived[i] += slot_arrivals[i];
        accepted[i] += slot_accepted[i];
      }
      estimate_sum += estimate;
    }
    if (sim.record_slots) {
      report.slots.push_back({t, estimate, 1.0 - keep, total_arrivals, total_accepted});
    }

    const std::size_t pos = t % sim.window;
    window_sum = window_sum - window[pos] + total_arrivals;
    window[pos] = total_arrivals;
    window_fill = std::min<std::uint64_t>(window_fill + 1, sim.window);
  }

  report.measured_slots = sim.slots - sim.window;
  const auto measured_slots = static_cast<double>(report.measured_slots);
  report.mean_estimated_rate = estimate_sum / measured_slots;
  report.users.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    UserStats& u = report.users[i];
    u.input_rate = sim.input_rates[i];
    u.arrived = arrived[i];
    u.accepted = accepted[i];
    u.goodput = static_cast<double>(accepted[i]) / measured_slots;
    if (accepted[i] > 0) {
      u.mean_delay = delay_sum[i] / static_cast<double>(accepted[i]);
      u.power = std::pow(u.goodput, sim.game.alpha(i)) / u.mean_delay;
    }
    report.sum_welfare += u.power;
    report.log_welfare += u.power > 0.0 ? std::log(u.power) : -INFINITY;
  }
  if (sim.game.is_homogeneous()) {
    report.empirical_poa_sum = empirical_poa(report, sim.game, WelfareKind::SumUtility);
    report.empirical_poa_log = empirical_poa(report, sim.game, WelfareKind::SumLogUtility);
  } else {
    report.empirical_poa_sum = report.empirical_poa_log = NAN;
  }
  return report;
}

double empirical_poa(const SimReport& report, const GameConfig& config, WelfareKind kind) {
  if (report.users.size() != config.m()) {
    throw InvalidArgument("report and game disagree on the number of users");
  }
  if (kind == WelfareKind::SumUtility) {
    double sum = 0.0;
    for (const auto& u : report.users) sum += u.power;
    return sum > 0.0 ? social_optimum_sum(config).value / sum : INFINITY;
  }
  const double opt_total = config.optimal_total_rate();
  const double opt_each =
      std::log(std::pow(opt_total / static_cast<double>(config.m()), config.common_alpha()) *
               (config.mu() - opt_total));
  double log_ratio = 0.0;
  for (const auto& u : report.users) {
    if (!(u.power > 0.0)) return INFINITY;
    log_ratio += opt_each - std::log(u.power);
  }
  return std::exp(log_ratio);
}

std::vector<SweepRow> sweep(const SimConfig& base, std::span<const double> desired_poas,
                            std::span<const double> mus, std::span<const std::uint64_t> windows,
                            std::uint64_t replications, const SweepOptions& options) {
  if (desired_poas.empty() || mus.empty() || windows.empty() || replications == 0) {
    throw InvalidArgument("sweep axes and replication count must be non-empty");
  }
  struct Cell {
    SweepRow row;
    std::optional<SimConfig> sim;
  };
  std::vector<Cell> cells;
  for (double desired : desired_poas) {
    for (double mu : mus) {
      for (std::uint64_t w : windows) {
        Cell cell{SweepRow{desired, mu, w, 0.0, 0.0, 0, {}}, std::nullopt};
        try {
          GameConfig game(mu, {base.game.alphas().begin(), base.game.alphas().end()});
          const DesignSpec spec{.config = game,
                                .epsilon = desired - 1.0,
                                .p_tilde = options.p_tilde,
                                .welfare_kind = options.welfare_kind,
                                .lambda_e_tilde = std::nullopt};
          const PolicyDesign design = design_linear(spec);
          SimConfig sim = base;
          sim.game = game;
          sim.policy = design.policy;
          sim.input_rates = design.predicted_ne;
          sim.window = w;
          sim.record_slots = false;
          validate(sim);
          cell.sim = std::move(sim);
        } catch (const std::exception& e) {
          cell.row.error = e.what();
        }
        cells.push_back(std::move(cell));
      }
    }
  }

  struct Outcome {
    double poa = NAN;
    std::string error;
  };
  const std::size_t tasks = cells.size() * replications;
  std::vector<Outcome> outcomes(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t task = next++; task < tasks; task = next++) {
      const Cell& cell = cells[task / replications];
      if (!cell.sim) continue;
      SimConfig sim = *cell.sim;
      sim.seed = base.seed + task % replications;
      try {
        outcomes[task].poa = empirical_poa(run(sim), sim.game, options.welfare_kind);
      } catch (const std::exception& e) {
        outcomes[task].error = e.what();
      }
    }
  };
  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(tasks)));
  std::vector<std::thread> pool;
  for (unsigned k = 0; k + 1 < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<SweepRow> rows;
  rows.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    SweepRow row = cells[c].row;
    if (cells[c].sim) {
      std::vector<double> values;
      for (std::uint64_t k = 0; k < replications; ++k) {
        const Outcome& o = outcomes[c * replications + k];
        if (!o.error.empty()) {
          row.error = o.error;
          break;
        }
        values.push_back(o.poa);
      }
      if (row.error.empty()) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        row.mean_poa = mean;
        row.std_poa = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
        row.replications = values.size();
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mm1game
