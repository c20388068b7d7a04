#pragma once

// Config-driven command-line front end.
//
//   mm1game <analyze|design|dynamics|field|simulate|sweep> [--config FILE]
//           [--out PATH] [--format csv|json] [--seed N] [--<section>.<key> VALUE ...]
//
// The config file is a JSON object with the sections game, policy, design,
// dynamics, field, simulate, sweep and output. Every leaf can be overridden on the
// command line with a flag of the same dotted name, e.g. --game.mu 6 or
// --game.alpha "[1, 2]". Unknown keys are rejected.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mm1game/analysis.hpp"
#include "mm1game/core_model.hpp"
#include "mm1game/dynamics.hpp"
#include "mm1game/simulator.hpp"

namespace mm1game::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kNumericalFailure = 3,
  kIoError = 4,
};

/// Name of the environment variable holding the default output directory.
inline constexpr const char* kOutputDirEnv = "MM1GAME_OUTPUT_DIR";

enum class Format { Csv, Json };

struct PolicyConfig {
  /// none, step, linear or designed.
  std::string type = "none";
  std::optional<double> threshold;
  std::optional<double> r1, r2;
  std::optional<double> slope, intercept;
};

struct ExperimentConfig {
  std::string command;
  GameConfig game{1.0, {1.0}};
  PolicyConfig policy;

  double epsilon = 0.05;
  double p_tilde = 0.9;
  WelfareKind welfare = WelfareKind::SumLogUtility;
  std::optional<double> lambda_e_tilde;

  std::optional<std::vector<double>> init;
  double tol = 1e-10;
  std::size_t max_iter = 10000;
  UpdateMode mode = UpdateMode::RoundRobin;

  std::optional<double> field_step;
  std::optional<double> field_limit;

  std::optional<std::vector<double>> rates;
  std::uint64_t slots = 100000;
  std::uint64_t window = 1;
  std::uint64_t seed = 1;
  QueueMode queue_mode = QueueMode::EventQueue;
  std::uint64_t queue_cap = 10'000'000;
  std::optional<std::string> slot_log;

  std::vector<double> sweep_desired_poa;
  std::vector<double> sweep_mu;
  std::vector<std::uint64_t> sweep_window;
  std::uint64_t sweep_replications = 10;
  std::uint64_t sweep_slots = 10000;
  QueueMode sweep_queue_mode = QueueMode::AnalyticDelay;
  unsigned sweep_threads = 0;

  std::optional<std::string> out_path;
  Format format = Format::Csv;
};

/// Validates a raw JSON config for `command`; throws InvalidArgument naming the bad field.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& command);

/// Builds the drop policy named by the config (running the design for "designed").
DropPolicy resolve_policy(const ExperimentConfig& config);

/// Full CLI entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mm1game::cli
