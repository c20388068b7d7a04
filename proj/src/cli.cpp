#include "mm1game/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "mm1game/errors.hpp"
#include "mm1game/mechanism.hpp"
#include "mm1game/report.hpp"

namespace mm1game::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

/// Raised when the run finished but did not reach its numerical goal (e.g. no convergence).
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class IoFailure : public Error {
 public:
  using Error::Error;
};

enum class Kind { Number, Integer, String, NumberOrList, NumberList, IntegerList };

const std::map<std::string, std::map<std::string, Kind>>& schema() {
  static const std::map<std::string, std::map<std::string, Kind>> s{
      {"game", {{"mu", Kind::Number}, {"alpha", Kind::NumberOrList}, {"m", Kind::Integer}}},
      {"policy",
       {{"type", Kind::String},
        {"threshold", Kind::Number},
        {"r1", Kind::Number},
        {"r2", Kind::Number},
        {"slope", Kind::Number},
        {"intercept", Kind::Number}}},
      {"design",
       {{"epsilon", Kind::Number},
        {"p_tilde", Kind::Number},
        {"welfare", Kind::String},
        {"lambda_e_tilde", Kind::Number}}},
      {"dynamics",
       {{"init", Kind::NumberList},
        {"tol", Kind::Number},
        {"max_iter", Kind::Integer},
        {"mode", Kind::String}}},
      {"field", {{"step", Kind::Number}, {"limit", Kind::Number}}},
      {"simulate",
       {{"rates", Kind::NumberList},
        {"slots", Kind::Integer},
        {"window", Kind::Integer},
        {"seed", Kind::Integer},
        {"queue_mode", Kind::String},
        {"queue_cap", Kind::Integer},
        {"slot_log", Kind::String}}},
      {"sweep",
       {{"desired_poa", Kind::NumberList},
        {"mu", Kind::NumberList},
        {"window", Kind::IntegerList},
        {"replications", Kind::Integer},
        {"slots", Kind::Integer},
        {"seed", Kind::Integer},
        {"queue_mode", Kind::String},
        {"threads", Kind::Integer}}},
      {"output", {{"path", Kind::String}, {"format", Kind::String}}},
  };
  return s;
}

const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"analyze", "design", "dynamics", "field", "simulate", "sweep"};
  return c;
}

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw InvalidArgument("config field '" + field + "': " + why);
}

bool is_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0) ||
         (v.is_number_float() && v.get<double>() >= 0 && v.get<double>() == std::floor(v.get<double>()));
}

void check_kind(const std::string& field, const json& v, Kind kind) {
  auto number_list = [&](bool integers) {
    if (!v.is_array() || v.empty()) bad(field, "expected a non-empty list");
    for (const auto& e : v) {
      if (integers ? !is_integer(e) : !e.is_number()) {
        bad(field, integers ? "expected non-negative integers" : "expected numbers");
      }
    }
  };
  switch (kind) {
    case Kind::Number:
      if (!v.is_number()) bad(field, "expected a number");
      break;
    case Kind::Integer:
      if (!is_integer(v)) bad(field, "expected a non-negative integer");
      break;
    case Kind::String:
      if (!v.is_string()) bad(field, "expected a string");
      break;
    case Kind::NumberOrList:
      if (!v.is_number()) number_list(false);
      break;
    case Kind::NumberList:
      number_list(false);
      break;
    case Kind::IntegerList:
      number_list(true);
      break;
  }
}

void validate_schema(const json& doc) {
  if (!doc.is_object()) throw InvalidArgument("config must be a JSON object");
  for (const auto& [section, body] : doc.items()) {
    if (section == "schema_version") {
      if (body != report::kSchemaVersion) bad(section, "unsupported schema version");
      continue;
    }
    if (section == "command") {
      if (!body.is_string()) bad(section, "expected a string");
      continue;
    }
    const auto it = schema().find(section);
    if (it == schema().end()) bad(section, "unknown section");
    if (!body.is_object()) bad(section, "expected an object");
    for (const auto& [key, value] : body.items()) {
      const auto k = it->second.find(key);
      if (k == it->second.end()) bad(section + "." + key, "unknown key");
      check_kind(section + "." + key, value, k->second);
    }
  }
}

const json* find(const json& doc, const std::string& section, const std::string& key) {
  const auto s = doc.find(section);
  if (s == doc.end()) return nullptr;
  const auto k = s->find(key);
  return k == s->end() ? nullptr : &*k;
}

template <class T>
void read(const json& doc, const std::string& section, const std::string& key, T& target) {
  if (const json* v = find(doc, section, key)) target = v->get<T>();
}

template <class T>
void read(const json& doc, const std::string& section, const std::string& key, std::optional<T>& target) {
  if (const json* v = find(doc, section, key)) target = v->get<T>();
}

void positive(const std::string& field, double v) {
  if (!(v > 0.0)) bad(field, "must be positive");
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const std::string& command) {
  validate_schema(doc);
  if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
    bad("command", "unknown command '" + command + "'");
  }
  ExperimentConfig c;
  c.command = command;

  const json* mu = find(doc, "game", "mu");
  const json* alpha = find(doc, "game", "alpha");
  if (!mu) bad("game.mu", "required");
  if (!alpha) bad("game.alpha", "required");
  std::vector<double> alphas;
  if (alpha->is_array()) {
    alphas = alpha->get<std::vector<double>>();
    if (const json* m = find(doc, "game", "m"); m && m->get<std::size_t>() != alphas.size()) {
      bad("game.m", "does not match the length of game.alpha");
    }
  } else {
    const json* m = find(doc, "game", "m");
    if (!m) bad("game.m", "required when game.alpha is a single number");
    if (m->get<std::size_t>() < 1) bad("game.m", "must be at least 1");
    alphas.assign(m->get<std::size_t>(), alpha->get<double>());
  }
  positive("game.mu", mu->get<double>());
  for (double a : alphas) positive("game.alpha", a);
  c.game = GameConfig(mu->get<double>(), alphas);

  read(doc, "policy", "type", c.policy.type);
  read(doc, "policy", "threshold", c.policy.threshold);
  read(doc, "policy", "r1", c.policy.r1);
  read(doc, "policy", "r2", c.policy.r2);
  read(doc, "policy", "slope", c.policy.slope);
  read(doc, "policy", "intercept", c.policy.intercept);
  const auto& t = c.policy.type;
  if (t != "none" && t != "step" && t != "linear" && t != "designed") {
    bad("policy.type", "expected none, step, linear or designed");
  }
  if (t == "linear") {
    const bool by_breaks = c.policy.r1 && c.policy.r2;
    const bool by_line = c.policy.slope && c.policy.intercept;
    if (by_breaks == by_line) bad("policy", "linear needs either r1 and r2, or slope and intercept");
    if (by_breaks && !(*c.policy.r1 > 0.0 && *c.policy.r2 > *c.policy.r1)) bad("policy.r1", "need 0 < r1 < r2");
    if (by_line && !(*c.policy.slope < 0.0 && *c.policy.intercept > 1.0)) {
      bad("policy.slope", "need slope < 0 and intercept > 1");
    }
  }
  if (c.policy.threshold) positive("policy.threshold", *c.policy.threshold);

  read(doc, "design", "epsilon", c.epsilon);
  read(doc, "design", "p_tilde", c.p_tilde);
  read(doc, "design", "lambda_e_tilde", c.lambda_e_tilde);
  if (const json* w = find(doc, "design", "welfare")) {
    try {
      c.welfare = parse_welfare_kind(w->get<std::string>());
    } catch (const InvalidArgument& e) {
      bad("design.welfare", e.what());
    }
  }
  if (c.epsilon < 0.0) bad("design.epsilon", "must be non-negative");
  if (!(c.p_tilde > 0.0 && c.p_tilde < 1.0)) bad("design.p_tilde", "must lie in (0, 1)");
  if ((c.policy.type == "designed" || command == "design") && c.game.is_homogeneous()) {
    const double a = c.game.common_alpha();
    if (!(c.p_tilde > a / (a + 1.0))) bad("design.p_tilde", "must exceed alpha / (alpha + 1)");
    if (c.lambda_e_tilde &&
        !(*c.lambda_e_tilde > 0.0 && *c.lambda_e_tilde < c.game.optimal_total_rate())) {
      bad("design.lambda_e_tilde", "must lie in (0, mu alpha / (alpha + 1))");
    }
  }

  read(doc, "dynamics", "init", c.init);
  read(doc, "dynamics", "tol", c.tol);
  read(doc, "dynamics", "max_iter", c.max_iter);
  if (const json* m = find(doc, "dynamics", "mode")) {
    const auto s = m->get<std::string>();
    if (s == "round_robin") c.mode = UpdateMode::RoundRobin;
    else if (s == "simultaneous") c.mode = UpdateMode::Simultaneous;
    else bad("dynamics.mode", "expected round_robin or simultaneous");
  }
  positive("dynamics.tol", c.tol);
  if (c.max_iter == 0) bad("dynamics.max_iter", "must be at least 1");
  if (c.init) {
    if (c.init->size() != c.game.m()) bad("dynamics.init", "needs one rate per user");
    for (double r : *c.init) if (r < 0.0) bad("dynamics.init", "rates must be non-negative");
  }

  read(doc, "field", "step", c.field_step);
  read(doc, "field", "limit", c.field_limit);
  if (c.field_step) positive("field.step", *c.field_step);
  if (c.field_limit) positive("field.limit", *c.field_limit);
  if (command == "field" && c.game.m() != 2) bad("game.m", "field needs exactly two users");

  auto queue_mode = [&](const std::string& field, QueueMode& target) {
    const auto dot = field.find('.');
    if (const json* q = find(doc, field.substr(0, dot), field.substr(dot + 1))) {
      try {
        target = parse_queue_mode(q->get<std::string>());
      } catch (const InvalidArgument& e) {
        bad(field, e.what());
      }
    }
  };
  read(doc, "simulate", "rates", c.rates);
  read(doc, "simulate", "slots", c.slots);
  read(doc, "simulate", "window", c.window);
  read(doc, "simulate", "seed", c.seed);
  read(doc, "simulate", "queue_cap", c.queue_cap);
  read(doc, "simulate", "slot_log", c.slot_log);
  queue_mode("simulate.queue_mode", c.queue_mode);
  if (c.window == 0) bad("simulate.window", "must be at least 1");
  if (c.slots <= c.window) bad("simulate.slots", "must exceed simulate.window");
  if (c.queue_cap == 0) bad("simulate.queue_cap", "must be positive");
  if (c.rates) {
    if (c.rates->size() != c.game.m()) bad("simulate.rates", "needs one rate per user");
    for (double r : *c.rates) if (r < 0.0) bad("simulate.rates", "rates must be non-negative");
  }

  read(doc, "sweep", "desired_poa", c.sweep_desired_poa);
  read(doc, "sweep", "mu", c.sweep_mu);
  read(doc, "sweep", "window", c.sweep_window);
  read(doc, "sweep", "replications", c.sweep_replications);
  read(doc, "sweep", "slots", c.sweep_slots);
  read(doc, "sweep", "threads", c.sweep_threads);
  if (const json* s = find(doc, "sweep", "seed")) c.seed = s->get<std::uint64_t>();
  queue_mode("sweep.queue_mode", c.sweep_queue_mode);
  if (command == "sweep") {
    if (c.sweep_desired_poa.empty()) bad("sweep.desired_poa", "required");
    for (double d : c.sweep_desired_poa) if (!(d >= 1.0)) bad("sweep.desired_poa", "entries must be >= 1");
    if (c.sweep_mu.empty()) c.sweep_mu = {c.game.mu()};
    for (double m : c.sweep_mu) positive("sweep.mu", m);
    if (c.sweep_window.empty()) c.sweep_window = {c.window};
    for (auto w : c.sweep_window) {
      if (w == 0) bad("sweep.window", "entries must be at least 1");
      if (c.sweep_slots <= w) bad("sweep.slots", "must exceed every sweep.window");
    }
    if (c.sweep_replications == 0) bad("sweep.replications", "must be at least 1");
    if (!c.game.is_homogeneous()) bad("game.alpha", "sweep needs equal alpha for all users");
  }

  read(doc, "output", "path", c.out_path);
  if (const json* f = find(doc, "output", "format")) {
    const auto s = f->get<std::string>();
    if (s == "csv") c.format = Format::Csv;
    else if (s == "json") c.format = Format::Json;
    else bad("output.format", "expected csv or json");
  }
  return c;
}

namespace {

DesignSpec design_spec(const ExperimentConfig& c) {
  return DesignSpec{.config = c.game,
                    .epsilon = c.epsilon,
                    .p_tilde = c.p_tilde,
                    .welfare_kind = c.welfare,
                    .lambda_e_tilde = c.lambda_e_tilde};
}

}  // namespace

DropPolicy resolve_policy(const ExperimentConfig& c) {
  const auto& p = c.policy;
  if (p.type == "none") return NoDrop{};
  if (p.type == "step") return p.threshold ? StepPolicy{*p.threshold} : step_policy(c.game);
  if (p.type == "linear") {
    if (p.r1 && p.r2) return LinearPolicy(*p.r1, *p.r2);
    return LinearPolicy::from_slope_intercept(*p.slope, *p.intercept);
  }
  return design_linear(design_spec(c)).policy;
}

namespace {

std::string policy_name(const DropPolicy& policy) {
  if (std::holds_alternative<NoDrop>(policy)) return "none";
  if (const auto* s = std::get_if<StepPolicy>(&policy)) return "step:" + report::format_number(s->threshold);
  const auto& l = std::get<LinearPolicy>(policy);
  return "linear:" + report::format_number(l.r1()) + ":" + report::format_number(l.r2());
}

ordered_json header(const ExperimentConfig& c) {
  ordered_json j;
  j["schema_version"] = report::kSchemaVersion;
  j["command"] = c.command;
  j["game"] = {{"mu", report::json_number(c.game.mu())},
               {"alpha", report::json_list(c.game.alphas())}};
  return j;
}

void emit_json(std::ostream& out, const ordered_json& j) { out << j.dump(2) << '\n'; }

void cmd_analyze(const ExperimentConfig& c, std::ostream& out) {
  struct Row {
    std::string policy;
    WelfareKind kind;
    std::string status;
    RateProfile ne;
    std::optional<WelfareReport> report;
    double closed_form = NAN;
  };
  std::vector<Row> rows;
  const RateProfile ne = ne_closed_form(c.game);
  for (WelfareKind kind : {WelfareKind::SumUtility, WelfareKind::SumLogUtility}) {
    if (!c.game.is_homogeneous()) {
      rows.push_back({"none", kind, "unsupported", ne, std::nullopt});
      continue;
    }
    const double a = c.game.common_alpha();
    rows.push_back({"none", kind, "ok", ne, welfare_report(ne, NoDrop{}, c.game, kind),
                    poa_closed_form(c.game.m(), a, kind)});
    const StepPolicy step = step_policy(c.game);
    const RateProfile symmetric = RateProfile::uniform(c.game.m(), step.threshold / c.game.m());
    rows.push_back({policy_name(step), kind, "ok", symmetric, welfare_report(symmetric, step, c.game, kind)});
  }

  if (c.format == Format::Json) {
    ordered_json j = header(c);
    j["rows"] = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json row{{"policy", r.policy}, {"welfare", std::string(to_string(r.kind))}, {"status", r.status},
                       {"ne_profile", report::json_list(r.ne.rates())}};
      if (r.report) {
        row["ne_value"] = report::json_number(r.report->ne_value);
        row["optimum_profile"] = report::json_list(r.report->optimum_profile.rates());
        row["optimum_value"] = report::json_number(r.report->optimum_value);
        row["poa"] = report::json_number(r.report->poa);
        row["pos"] = report::json_number(r.report->pos);
        row["poa_closed_form"] = report::json_number(r.closed_form);
      }
      j["rows"].push_back(row);
    }
    emit_json(out, j);
    return;
  }
  report::CsvWriter w(out, {"policy", "welfare", "status", "ne_profile", "ne_value", "optimum_profile",
                            "optimum_value", "poa", "pos", "poa_closed_form"});
  for (const auto& r : rows) {
    w.cell(r.policy).cell(std::string(to_string(r.kind))).cell(r.status).cell(r.ne.rates());
    if (r.report) {
      w.cell(r.report->ne_value).cell(r.report->optimum_profile.rates()).cell(r.report->optimum_value);
      w.cell(r.report->poa).cell(r.report->pos).cell(r.closed_form);
    } else {
      for (int k = 0; k < 6; ++k) w.cell(std::string());
    }
    w.end_row();
  }
}

void cmd_design(const ExperimentConfig& c, std::ostream& out) {
  const DesignSpec spec = design_spec(c);
  const PolicyDesign d = design_linear(spec);
  const DesignDiagnostics diag = validate_design(d, spec);
  if (c.format == Format::Json) {
    ordered_json j = header(c);
    j["inputs"] = {{"epsilon", report::json_number(c.epsilon)},
                   {"p_tilde", report::json_number(c.p_tilde)},
                   {"welfare", std::string(to_string(c.welfare))}};
    j["policy"] = {{"r1", report::json_number(d.policy.r1())},
                   {"r2", report::json_number(d.policy.r2())},
                   {"slope", report::json_number(d.policy.slope())},
                   {"intercept", report::json_number(d.policy.intercept())}};
    j["lambda_e_tilde"] = report::json_number(d.lambda_e_tilde);
    j["lambda_tilde"] = report::json_number(d.lambda_tilde);
    j["predicted_ne"] = report::json_list(d.predicted_ne.rates());
    j["predicted_poa"] = report::json_number(d.predicted_poa);
    j["diagnostics"] = {{"steep_enough", diag.steep_enough},
                        {"slope_bound", report::json_number(diag.slope_bound)},
                        {"r1_below_mu", diag.r1_below_mu},
                        {"ne_matches", diag.ne_matches},
                        {"realized_ne", report::json_list(diag.realized_ne.rates())},
                        {"realized_poa", report::json_number(diag.realized_poa)},
                        {"poa_within_bound", diag.poa_within_bound}};
    emit_json(out, j);
    return;
  }
  report::CsvWriter w(out, {"epsilon", "p_tilde", "welfare", "r1", "r2", "slope", "intercept", "lambda_e_tilde",
                            "lambda_tilde", "predicted_ne", "predicted_poa", "steep_enough", "r1_below_mu",
                            "ne_matches", "realized_ne", "realized_poa", "poa_within_bound"});
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  w.cell(c.epsilon).cell(c.p_tilde).cell(std::string(to_string(c.welfare)));
  w.cell(d.policy.r1()).cell(d.policy.r2()).cell(d.policy.slope()).cell(d.policy.intercept());
  w.cell(d.lambda_e_tilde).cell(d.lambda_tilde).cell(d.predicted_ne.rates()).cell(d.predicted_poa);
  w.cell(flag(diag.steep_enough)).cell(flag(diag.r1_below_mu)).cell(flag(diag.ne_matches));
  w.cell(diag.realized_ne.rates()).cell(diag.realized_poa).cell(flag(diag.poa_within_bound));
  w.end_row();
}

void cmd_dynamics(const ExperimentConfig& c, std::ostream& out) {
  const DropPolicy policy = resolve_policy(c);
  const RateProfile init = c.init ? RateProfile(*c.init) : RateProfile::uniform(c.game.m(), 0.1);
  const Trajectory traj = run_dynamics(c.game, policy, init, c.mode, c.tol, c.max_iter);
  // One potential value per sweep, taken after the sweep's last revision.
  const std::size_t per_sweep = c.mode == UpdateMode::RoundRobin ? c.game.m() : 1;
  if (c.format == Format::Json) {
    ordered_json j = header(c);
    j["policy"] = policy_name(policy);
    j["converged"] = traj.converged;
    j["sweeps"] = traj.sweeps;
    j["final"] = report::json_list(traj.final_profile.rates());
    j["iterates"] = ordered_json::array();
    for (std::size_t k = 0; k < traj.iterates.size(); ++k) {
      j["iterates"].push_back({{"sweep", k},
                               {"rates", report::json_list(traj.iterates[k].rates())},
                               {"potential", report::json_number(traj.potential_series[k * per_sweep])}});
    }
    emit_json(out, j);
  } else {
    std::vector<std::string> cols{"sweep"};
    for (std::size_t i = 0; i < c.game.m(); ++i) cols.push_back("lambda_" + std::to_string(i + 1));
    cols.push_back("potential");
    report::CsvWriter w(out, cols);
    for (std::size_t k = 0; k < traj.iterates.size(); ++k) {
      w.cell(static_cast<std::uint64_t>(k));
      for (double r : traj.iterates[k].rates()) w.cell(r);
      w.cell(traj.potential_series[k * per_sweep]);
      w.end_row();
    }
  }
  if (!traj.converged) {
    throw NumericalFailure("best-response dynamics did not converge within " + std::to_string(c.max_iter) +
                           " sweeps");
  }
}

void cmd_field(const ExperimentConfig& c, std::ostream& out) {
  const DropPolicy policy = resolve_policy(c);
  const double limit = c.field_limit.value_or(c.game.mu());
  const double step = c.field_step.value_or(limit / 20.0);
  auto grid = lower_triangle_grid(step, limit);
  // The equilibrium rarely sits on the grid; append it so the fixed point shows up in the output.
  const RateProfile start = c.init ? RateProfile(*c.init) : RateProfile::uniform(2, 0.1);
  const Trajectory traj = run_dynamics(c.game, policy, start, c.mode, c.tol, c.max_iter);
  if (!traj.converged) throw NumericalFailure("could not locate the equilibrium for the field");
  grid.push_back(traj.final_profile);
  const auto field = response_field(c.game, policy, grid);
  auto kind = [&](std::size_t k) { return std::string(k + 1 == field.size() ? "equilibrium" : "grid"); };
  if (c.format == Format::Json) {
    ordered_json j = header(c);
    j["policy"] = policy_name(policy);
    j["vectors"] = ordered_json::array();
    for (std::size_t k = 0; k < field.size(); ++k) {
      const auto& f = field[k];
      j["vectors"].push_back({{"kind", kind(k)},
                              {"point", report::json_list(f.point.rates())},
                              {"response", report::json_list(f.response.rates())},
                              {"d", {report::json_number(f.d1), report::json_number(f.d2)}}});
    }
    emit_json(out, j);
    return;
  }
  report::CsvWriter w(out, {"kind", "lambda_1", "lambda_2", "br_1", "br_2", "d_1", "d_2"});
  for (std::size_t k = 0; k < field.size(); ++k) {
    const auto& f = field[k];
    w.cell(kind(k)).cell(f.point[0]).cell(f.point[1]).cell(f.response[0]).cell(f.response[1]).cell(f.d1).cell(f.d2);
    w.end_row();
  }
}

void write_slot_log(const std::string& path, const SimReport& r) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open slot log '" + path + "' for writing");
  report::CsvWriter w(f, {"slot", "estimated_rate", "drop_probability", "arrivals", "accepted"});
  for (const auto& s : r.slots) {
    w.cell(s.slot).cell(s.estimated_rate).cell(s.drop_probability).cell(s.arrivals).cell(s.accepted);
    w.end_row();
  }
  if (!f) throw IoFailure("failed writing slot log '" + path + "'");
}

void cmd_simulate(const ExperimentConfig& c, std::ostream& out) {
  DropPolicy policy = NoDrop{};
  RateProfile rates;
  if (c.policy.type == "designed") {
    const PolicyDesign d = design_linear(design_spec(c));
    policy = d.policy;
    rates = c.rates ? RateProfile(*c.rates) : d.predicted_ne;
  } else {
    policy = resolve_policy(c);
    if (c.rates) rates = RateProfile(*c.rates);
    else if (std::holds_alternative<NoDrop>(policy)) rates = ne_closed_form(c.game);
    else bad("simulate.rates", "required unless the policy is none or designed");
  }
  const SimConfig sim{.game = c.game,
                      .policy = policy,
                      .input_rates = rates,
                      .slots = c.slots,
                      .window = c.window,
                      .seed = c.seed,
                      .queue_mode = c.queue_mode,
                      .queue_cap = c.queue_cap,
                      .record_slots = c.slot_log.has_value()};
  const SimReport r = run(sim);
  if (c.slot_log) write_slot_log(*c.slot_log, r);

  if (c.format == Format::Json) {
    ordered_json j = header(c);
    j["policy"] = policy_name(policy);
    j["seed"] = c.seed;
    j["slots"] = c.slots;
    j["window"] = c.window;
    j["queue_mode"] = std::string(to_string(c.queue_mode));
    j["measured_slots"] = r.measured_slots;
    j["mean_estimated_rate"] = report::json_number(r.mean_estimated_rate);
    j["users"] = ordered_json::array();
    for (const auto& u : r.users) {
      j["users"].push_back({{"input_rate", report::json_number(u.input_rate)},
                            {"goodput", report::json_number(u.goodput)},
                            {"mean_delay", report::json_number(u.mean_delay)},
                            {"power", report::json_number(u.power)},
                            {"arrived", u.arrived},
                            {"accepted", u.accepted}});
    }
    j["sum_welfare"] = report::json_number(r.sum_welfare);
    j["log_welfare"] = report::json_number(r.log_welfare);
    j["empirical_poa_sum"] = report::json_number(r.empirical_poa_sum);
    j["empirical_poa_log"] = report::json_number(r.empirical_poa_log);
    emit_json(out, j);
    return;
  }
  report::CsvWriter w(out, {"user", "input_rate", "goodput", "mean_delay", "power", "arrived", "accepted",
                            "empirical_poa_sum", "empirical_poa_log"});
  for (std::size_t i = 0; i < r.users.size(); ++i) {
    const auto& u = r.users[i];
    w.cell(static_cast<std::uint64_t>(i + 1)).cell(u.input_rate).cell(u.goodput).cell(u.mean_delay);
    w.cell(u.power).cell(u.arrived).cell(u.accepted).cell(r.empirical_poa_sum).cell(r.empirical_poa_log);
    w.end_row();
  }
}

void cmd_sweep(const ExperimentConfig& c, std::ostream& out) {
  SimConfig base{.game = c.game,
                 .policy = NoDrop{},
                 .input_rates = RateProfile::uniform(c.game.m(), 0.0),
                 .slots = c.sweep_slots,
                 .window = 1,
                 .seed = c.seed,
                 .queue_mode = c.sweep_queue_mode,
                 .queue_cap = c.queue_cap,
                 .record_slots = false};
  const auto rows = sweep(base, c.sweep_desired_poa, c.sweep_mu, c.sweep_window, c.sweep_replications,
                          {.p_tilde = c.p_tilde, .welfare_kind = c.welfare, .threads = c.sweep_threads});
  if (c.format == Format::Json) {
    ordered_json j = header(c);
    j["welfare"] = std::string(to_string(c.welfare));
    j["rows"] = ordered_json::array();
    for (const auto& r : rows) {
      j["rows"].push_back({{"desired_poa", report::json_number(r.desired_poa)},
                           {"mu", report::json_number(r.mu)},
                           {"window", r.window},
                           {"mean_poa", report::json_number(r.mean_poa)},
                           {"std_poa", report::json_number(r.std_poa)},
                           {"replications", r.replications},
                           {"error", r.error}});
    }
    emit_json(out, j);
    return;
  }
  report::CsvWriter w(out, {"desired_poa", "mu", "window", "mean_poa", "std_poa", "replications", "error"});
  for (const auto& r : rows) {
    w.cell(r.desired_poa).cell(r.mu).cell(r.window).cell(r.mean_poa).cell(r.std_poa).cell(r.replications);
    w.cell(r.error);
    w.end_row();
  }
}

void dispatch(const ExperimentConfig& c, std::ostream& out) {
  if (c.command == "analyze") cmd_analyze(c, out);
  else if (c.command == "design") cmd_design(c, out);
  else if (c.command == "dynamics") cmd_dynamics(c, out);
  else if (c.command == "field") cmd_field(c, out);
  else if (c.command == "simulate") cmd_simulate(c, out);
  else cmd_sweep(c, out);
}

json parse_override(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

std::optional<std::filesystem::path> output_path(const ExperimentConfig& c) {
  if (c.out_path) return std::filesystem::path(*c.out_path);
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) {
    return std::filesystem::path(dir) / (c.command + (c.format == Format::Json ? ".json" : ".csv"));
  }
  return std::nullopt;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Selfish M/M/1 queueing game toolkit: analysis, drop-policy design, dynamics, simulation"};
  std::string command, config_path, out_path, format;
  std::optional<std::uint64_t> seed;
  app.add_option("command", command, "analyze | design | dynamics | field | simulate | sweep")
      ->required()
      ->check(CLI::IsMember(commands()));
  app.add_option("--config", config_path, "JSON experiment configuration");
  app.add_option("--out", out_path, "output file (default: stdout or $" + std::string(kOutputDirEnv) + ")");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", seed, "random seed for simulate and sweep");
  std::map<std::string, std::string> overrides;
  for (const auto& [section, keys] : schema()) {
    for (const auto& [key, kind] : keys) {
      const std::string name = section + "." + key;
      app.add_option("--" + name, overrides[name], "overrides " + name)->group("Config overrides");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  ExperimentConfig config;
  try {
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        err << "error: cannot read config file '" << config_path << "'\n";
        return kIoError;
      }
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        err << "error: config file '" << config_path << "' is not valid JSON: " << e.what() << '\n';
        return kConfigError;
      }
    }
    if (doc.is_object()) {
      for (const auto& [name, value] : overrides) {
        if (app.get_option("--" + name)->count() == 0) continue;
        const auto dot = name.find('.');
        doc[name.substr(0, dot)][name.substr(dot + 1)] = parse_override(value);
      }
      if (!out_path.empty()) doc["output"]["path"] = out_path;
      if (!format.empty()) doc["output"]["format"] = format;
      if (seed) {
        doc["simulate"]["seed"] = *seed;
        doc["sweep"]["seed"] = *seed;
      }
    }
    config = parse_config(doc, command);
  } catch (const json::exception& e) {
    err << "error: invalid config value: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Unsupported& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  const auto path = output_path(config);
  std::ofstream file;
  if (path) {
    file.open(*path, std::ios::binary);
    if (!file) {
      err << "error: cannot open output '" << path->string() << "' for writing\n";
      return kIoError;
    }
  }
  std::ostream& sink = path ? static_cast<std::ostream&>(file) : out;

  int code = kOk;
  try {
    dispatch(config, sink);
  } catch (const IoFailure& e) {
    err << "error: " << e.what() << '\n';
    code = kIoError;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    code = kConfigError;
  } catch (const Unsupported& e) {
    err << "error: " << e.what() << '\n';
    code = kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = kNumericalFailure;
  }
  sink.flush();
  if (path && !file) {
    err << "error: failed writing '" << path->string() << "'\n";
    return kIoError;
  }
  return code;
}

}  // namespace mm1game::cli
