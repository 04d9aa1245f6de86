#include <cmath>
#include <ostream>

#include "bufmanet/harness.hpp"
#include "json.hpp"

namespace bufmanet {

using nlohmann::json;

namespace {

json number(double v) {
  if (std::isfinite(v)) return v;
  return csv::format_double(v);
}

json numbers(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) out.push_back(number(v));
  return out;
}

json probs_json(const SchedProbs& p) {
  return {{"psd", number(p.psd)}, {"psr", number(p.psr)}, {"prd", number(p.prd)}};
}

json params_json(const NetworkParams& p) {
  return {
      {"n", p.n},
      {"m", p.m},
      {"Bs", p.source_buffer},
      {"Br", p.relay_buffer},
      {"lambda_s", number(p.lambda)},
      {"feedback", p.feedback},
      {"mac", std::string(to_string(p.mac))},
      {"nu", p.nu},
      {"delta", number(p.delta)},
      {"mobility", std::string(to_string(p.mobility))},
  };
}

json theory_object(const TheoryReport& r) {
  json out = {
      {"inputs", params_json(r.params)},
      {"sched_probs", probs_json(r.probs)},
      {"throughput", number(r.throughput)},
      {"delay", number(r.delay)},
      {"capacity", number(r.capacity)},
      {"mean_source_len", number(r.mean_source_len)},
      {"mean_relay_len", number(r.mean_relay_len)},
      {"pi_s0", number(r.pi_s0)},
      {"pi_rBr", number(r.pi_rBr)},
      {"mu_s", number(r.mu_s)},
      {"tau", number(r.tau)},
      {"pi_s", numbers(r.pi_s)},
      {"pi_r", numbers(r.pi_r)},
      {"fixed_point", {{"iterations", r.fixed_point_iterations},
                       {"residual", number(r.fixed_point_residual)}}},
  };
  if (r.params.mac == Mac::EC) {
    const auto g = ec_geometry(r.params.m, r.params.nu, r.params.delta);
    out["ec_geometry"] = {{"epsilon", g.epsilon}, {"gamma", g.gamma}};
  }
  return out;
}

json accounting_json(const Accounting& a) {
  return {{"generated", a.generated},           {"delivered", a.delivered},
          {"dropped_source", a.dropped_source}, {"dropped_relay", a.dropped_relay},
          {"in_flight", a.in_flight}};
}

json simulation_object(const SimReport& r) {
  json reps = json::array();
  for (const auto& rep : r.replications)
    reps.push_back({{"id", rep.id},
                    {"seed", rep.seed},
                    {"throughput", number(rep.throughput)},
                    {"mean_delay", number(rep.mean_delay)},
                    {"delay_samples", rep.delay_samples},
                    {"accounting", accounting_json(rep.accounting)}});
  return {
      {"inputs", params_json(r.params)},
      {"options", {{"slots", r.options.slots},
                   {"replications", r.options.replications},
                   {"warmup_fraction", number(r.options.warmup_fraction)},
                   {"seed", r.options.seed},
                   {"random_derangement", r.options.random_derangement}}},
      {"slots_run", r.slots_run},
      {"warmup_slots", r.warmup_slots},
      {"accounting", accounting_json(r.accounting)},
      {"throughput", number(r.throughput)},
      {"throughput_ci", number(r.throughput_ci)},
      {"mean_delay", number(r.mean_delay)},
      {"delay_ci", number(r.delay_ci)},
      {"flow_throughput", numbers(r.flow_throughput)},
      {"empirical_pi_s", numbers(r.empirical_pi_s)},
      {"empirical_pi_r", numbers(r.empirical_pi_r)},
      {"opportunities", probs_json(r.opportunities)},
      {"opportunities_ci", probs_json(r.opportunities_ci)},
      {"replications", reps},
  };
}

double relative_error(double sim, double theory) {
  const double diff = std::abs(sim - theory);
  if (theory == 0.0) return diff;
  if (std::isinf(theory)) return std::isinf(sim) && sim == theory ? 0.0 : INFINITY;
  return diff / std::abs(theory);
}

std::string sweep_param(const ExperimentConfig& config) {
  return config.sweep ? config.sweep->param : std::string();
}

/// Swept value of each scenario, aligned with expand_scenarios().
std::vector<double> scenario_values(const ExperimentConfig& config) {
  std::vector<double> values = config.sweep ? config.sweep->values : std::vector<double>{0.0};
  if (!config.both_feedback) return values;
  std::vector<double> out;
  for (double v : values) out.insert(out.end(), {v, v});
  return out;
}

std::string flag(bool b) { return b ? "1" : "0"; }

bool parse_flag(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw std::invalid_argument("expected 0 or 1, got '" + s + "'");
}

}  // namespace

std::string_view to_string(RowStatus status) {
  switch (status) {
    case RowStatus::Pass: return "pass";
    case RowStatus::Fail: return "fail";
    case RowStatus::Inconclusive: return "inconclusive";
  }
  return "fail";
}

RowStatus parse_row_status(std::string_view text) {
  if (text == "pass") return RowStatus::Pass;
  if (text == "fail") return RowStatus::Fail;
  if (text == "inconclusive") return RowStatus::Inconclusive;
  throw std::invalid_argument("unknown row status '" + std::string(text) + "'");
}

RowStatus classify(const ComparisonRow& row, double tolerance, double delay_tolerance) {
  struct Metric {
    double theory, sim, rel, ci, tol;
  };
  const Metric metrics[] = {
      {row.t_theory, row.t_sim, row.t_rel_err, row.t_ci, tolerance},
      {row.ed_theory, row.ed_sim, row.ed_rel_err, row.ed_ci, delay_tolerance},
  };
  bool all_ok = true;
  bool conclusive_failure = false;
  for (const auto& m : metrics) {
    const bool ok = m.rel <= m.tol || std::abs(m.sim - m.theory) <= m.ci;
    if (ok) continue;
    all_ok = false;
    const bool ci_too_wide = !(m.ci <= m.tol * std::abs(m.theory));
    if (!ci_too_wide) conclusive_failure = true;
  }
  if (all_ok) return RowStatus::Pass;
  return conclusive_failure ? RowStatus::Fail : RowStatus::Inconclusive;
}

std::vector<ComparisonRow> validate_rows(const ExperimentConfig& config, const TheoryFn& theory) {
  config.validate();
  const TheoryFn model =
      theory ? theory : [&](const NetworkParams& p) { return analyze(p, config.fixed_point); };
  const auto scenarios = expand_scenarios(config);
  const auto values = scenario_values(config);
  std::vector<ComparisonRow> rows;
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const auto& p = scenarios[k];
    const auto th = model(p);
    const auto sim = run(p, config.sim);
    ComparisonRow row;
    row.param = sweep_param(config);
    row.value = values[k];
    row.feedback = p.feedback;
    row.t_theory = th.throughput;
    row.t_sim = sim.throughput;
    row.t_rel_err = relative_error(sim.throughput, th.throughput);
    row.t_ci = sim.throughput_ci;
    row.ed_theory = th.delay;
    row.ed_sim = sim.mean_delay;
    row.ed_rel_err = relative_error(sim.mean_delay, th.delay);
    row.ed_ci = sim.delay_ci;
    row.status = classify(row, config.tolerance, config.delay_tolerance);
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> sweep_rows(const ExperimentConfig& config) {
  config.validate();
  if (!config.sweep) throw ConfigError("the sweep command needs a sweep");
  const auto scenarios = expand_scenarios(config);
  const auto values = scenario_values(config);
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const auto& p = scenarios[k];
    const auto th = analyze(p, config.fixed_point);
    SweepRow row;
    row.param = config.sweep->param;
    row.value = values[k];
    row.feedback = p.feedback;
    row.throughput = th.throughput;
    row.delay = th.delay;
    row.capacity = th.capacity;
    row.pi_s0 = th.pi_s0;
    row.pi_rBr = th.pi_rBr;
    row.mu_s = th.mu_s;
    if (config.with_sim) {
      const auto sim = run(p, config.sim);
      row.t_sim = sim.throughput;
      row.t_ci = sim.throughput_ci;
      row.ed_sim = sim.mean_delay;
      row.ed_ci = sim.delay_ci;
    }
    rows.push_back(row);
  }
  return rows;
}

csv::Table to_table(const std::vector<ComparisonRow>& rows) {
  using csv::format_double;
  csv::Table t;
  t.header = {"param",  "value",      "feedback", "T_theory",   "T_sim", "T_rel_err",
              "T_ci",   "ED_theory",  "ED_sim",   "ED_rel_err", "ED_ci", "status"};
  for (const auto& r : rows)
    t.rows.push_back({r.param, format_double(r.value), flag(r.feedback), format_double(r.t_theory),
                      format_double(r.t_sim), format_double(r.t_rel_err), format_double(r.t_ci),
                      format_double(r.ed_theory), format_double(r.ed_sim),
                      format_double(r.ed_rel_err), format_double(r.ed_ci),
                      std::string(to_string(r.status))});
  return t;
}

std::vector<ComparisonRow> comparison_rows_from(const csv::Table& t) {
  using csv::parse_double;
  const auto col = [&](const char* name) { return t.column(name); };
  std::vector<ComparisonRow> rows;
  for (const auto& f : t.rows) {
    ComparisonRow r;
    r.param = f[col("param")];
    r.value = parse_double(f[col("value")]);
    r.feedback = parse_flag(f[col("feedback")]);
    r.t_theory = parse_double(f[col("T_theory")]);
    r.t_sim = parse_double(f[col("T_sim")]);
    r.t_rel_err = parse_double(f[col("T_rel_err")]);
    r.t_ci = parse_double(f[col("T_ci")]);
    r.ed_theory = parse_double(f[col("ED_theory")]);
    r.ed_sim = parse_double(f[col("ED_sim")]);
    r.ed_rel_err = parse_double(f[col("ED_rel_err")]);
    r.ed_ci = parse_double(f[col("ED_ci")]);
    r.status = parse_row_status(f[col("status")]);
    rows.push_back(r);
  }
  return rows;
}

csv::Table to_table(const std::vector<SweepRow>& rows) {
  using csv::format_double;
  bool with_sim = false;
  for (const auto& r : rows) with_sim = with_sim || r.t_sim.has_value();

  csv::Table t;
  t.header = {"param", "value", "feedback", "T", "ED", "Tc", "pi_s0", "pi_rBr", "mu_s"};
  if (with_sim) t.header.insert(t.header.end(), {"T_sim", "T_ci", "ED_sim", "ED_ci"});
  const auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("nan");
  };
  for (const auto& r : rows) {
    std::vector<std::string> f = {r.param,
                                  format_double(r.value),
                                  flag(r.feedback),
                                  format_double(r.throughput),
                                  format_double(r.delay),
                                  format_double(r.capacity),
                                  format_double(r.pi_s0),
                                  format_double(r.pi_rBr),
                                  format_double(r.mu_s)};
    if (with_sim) f.insert(f.end(), {opt(r.t_sim), opt(r.t_ci), opt(r.ed_sim), opt(r.ed_ci)});
    t.rows.push_back(std::move(f));
  }
  return t;
}

std::vector<SweepRow> sweep_rows_from(const csv::Table& t) {
  using csv::parse_double;
  const auto col = [&](const char* name) { return t.column(name); };
  bool with_sim = false;
  for (const auto& h : t.header) with_sim = with_sim || h == "T_sim";
  const auto opt = [](const std::string& s) -> std::optional<double> {
    if (s == "nan") return std::nullopt;
    return parse_double(s);
  };
  std::vector<SweepRow> rows;
  for (const auto& f : t.rows) {
    SweepRow r;
    r.param = f[col("param")];
    r.value = parse_double(f[col("value")]);
    r.feedback = parse_flag(f[col("feedback")]);
    r.throughput = parse_double(f[col("T")]);
    r.delay = parse_double(f[col("ED")]);
    r.capacity = parse_double(f[col("Tc")]);
    r.pi_s0 = parse_double(f[col("pi_s0")]);
    r.pi_rBr = parse_double(f[col("pi_rBr")]);
    r.mu_s = parse_double(f[col("mu_s")]);
    if (with_sim) {
      r.t_sim = opt(f[col("T_sim")]);
      r.t_ci = opt(f[col("T_ci")]);
      r.ed_sim = opt(f[col("ED_sim")]);
      r.ed_ci = opt(f[col("ED_ci")]);
    }
    rows.push_back(r);
  }
  return rows;
}

std::string theory_json(const TheoryReport& report) { return theory_object(report).dump(2); }

std::string simulation_json(const SimReport& report) { return simulation_object(report).dump(2); }

int cmd_theory(const ExperimentConfig& config, Format format, std::ostream& out) {
  config.validate();
  const auto scenarios = expand_scenarios(config);
  std::vector<TheoryReport> reports;
  for (const auto& p : scenarios) reports.push_back(analyze(p, config.fixed_point));

  if (format == Format::Json) {
    if (reports.size() == 1) {
      out << theory_json(reports.front()) << '\n';
    } else {
      json all = json::array();
      for (const auto& r : reports) all.push_back(theory_object(r));
      out << all.dump(2) << '\n';
    }
    return kExitPass;
  }
  std::vector<SweepRow> rows;
  const auto values = scenario_values(config);
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    SweepRow row;
    row.param = sweep_param(config);
    row.value = values[k];
    row.feedback = r.params.feedback;
    row.throughput = r.throughput;
    row.delay = r.delay;
    row.capacity = r.capacity;
    row.pi_s0 = r.pi_s0;
    row.pi_rBr = r.pi_rBr;
    row.mu_s = r.mu_s;
    rows.push_back(row);
  }
  csv::write(out, to_table(rows));
  return kExitPass;
}

int cmd_simulate(const ExperimentConfig& config, Format format, std::ostream& out) {
  config.validate();
  const auto scenarios = expand_scenarios(config);
  const auto values = scenario_values(config);
  std::vector<SimReport> reports;
  for (const auto& p : scenarios) reports.push_back(run(p, config.sim));

  if (format == Format::Json) {
    if (reports.size() == 1) {
      out << simulation_json(reports.front()) << '\n';
    } else {
      json all = json::array();
      for (const auto& r : reports) all.push_back(simulation_object(r));
      out << all.dump(2) << '\n';
    }
    return kExitPass;
  }
  using csv::format_double;
  csv::Table t;
  t.header = {"param",     "value",     "feedback",       "T_sim",         "T_ci",     "ED_sim",
              "ED_ci",     "generated", "delivered",      "dropped_source", "dropped_relay",
              "in_flight"};
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    const auto& a = r.accounting;
    t.rows.push_back({sweep_param(config), format_double(values[k]), flag(r.params.feedback),
                      format_double(r.throughput), format_double(r.throughput_ci),
                      format_double(r.mean_delay), format_double(r.delay_ci),
                      std::to_string(a.generated), std::to_string(a.delivered),
                      std::to_string(a.dropped_source), std::to_string(a.dropped_relay),
                      std::to_string(a.in_flight)});
  }
  csv::write(out, t);
  return kExitPass;
}

int cmd_validate(const ExperimentConfig& config, Format format, std::ostream& out,
                 const TheoryFn& theory) {
  const auto rows = validate_rows(config, theory);
  if (format == Format::Json) {
    json all = json::array();
    for (const auto& r : rows)
      all.push_back({{"param", r.param},
                     {"value", number(r.value)},
                     {"feedback", r.feedback},
                     {"T_theory", number(r.t_theory)},
                     {"T_sim", number(r.t_sim)},
                     {"T_rel_err", number(r.t_rel_err)},
                     {"T_ci", number(r.t_ci)},
                     {"ED_theory", number(r.ed_theory)},
                     {"ED_sim", number(r.ed_sim)},
                     {"ED_rel_err", number(r.ed_rel_err)},
                     {"ED_ci", number(r.ed_ci)},
                     {"status", std::string(to_string(r.status))}});
    out << all.dump(2) << '\n';
  } else {
    csv::write(out, to_table(rows));
  }
  for (const auto& r : rows)
    if (r.status == RowStatus::Fail) return kExitToleranceFailure;
  return kExitPass;
}

int cmd_sweep(const ExperimentConfig& config, Format format, std::ostream& out) {
  const auto rows = sweep_rows(config);
  if (format == Format::Json) {
    json all = json::array();
    for (const auto& r : rows) {
      json o = {{"param", r.param},
                {"value", number(r.value)},
                {"feedback", r.feedback},
                {"T", number(r.throughput)},
                {"ED", number(r.delay)},
                {"Tc", number(r.capacity)},
                {"pi_s0", number(r.pi_s0)},
                {"pi_rBr", number(r.pi_rBr)},
                {"mu_s", number(r.mu_s)}};
      if (r.t_sim) {
        o["T_sim"] = number(*r.t_sim);
        o["T_ci"] = number(*r.t_ci);
        o["ED_sim"] = number(*r.ed_sim);
        o["ED_ci"] = number(*r.ed_ci);
      }
      all.push_back(o);
    }
    out << all.dump(2) << '\n';
  } else {
    csv::write(out, to_table(rows));
  }
  return kExitPass;
}

}  // namespace bufmanet
