#include <fstream>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "bufmanet/harness.hpp"

namespace bufmanet {

namespace {

/// Every flag that can override a config-file value. Unset means "keep".
struct Overrides {
  std::string config_path;
  std::string out_path;
  std::string format;

  std::optional<int> n, m, bs, br, nu, reps, threads, fp_max_iterations;
  std::optional<double> lambda, delta, tolerance, delay_tolerance, warmup, density, fp_tolerance;
  std::optional<std::string> mac, mobility, sweep_param;
  std::optional<std::int64_t> slots;
  std::optional<std::uint64_t> seed;
  std::vector<double> sweep_values;

  bool feedback = false;
  bool with_sim = false;
  bool both_feedback = false;
  bool random_derangement = false;
};

void add_common(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config_path, "JSON config file");
  cmd.add_option("--out", o.out_path, "Write output here instead of stdout");
  cmd.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  cmd.add_option("--n", o.n, "Number of nodes");
  cmd.add_option("--m", o.m, "Cells per side of the torus");
  cmd.add_option("--Bs", o.bs, "Source buffer size");
  cmd.add_option("--Br", o.br, "Relay buffer size");
  cmd.add_option("--lambda_s,--lambda", o.lambda, "Packet generating probability");
  cmd.add_flag("--feedback,!--no-feedback", o.feedback, "Relay-full feedback");
  cmd.add_option("--mac", o.mac, "LS or EC");
  cmd.add_option("--nu", o.nu, "EC transmission range");
  cmd.add_option("--delta", o.delta, "EC guard factor");
  cmd.add_option("--mobility", o.mobility, "IID or RW");

  cmd.add_option("--seed", o.seed, "Base RNG seed");
  cmd.add_option("--slots", o.slots, "Slots per replication");
  cmd.add_option("--reps", o.reps, "Replications");
  cmd.add_option("--warmup", o.warmup, "Fraction of slots discarded as warm-up");
  cmd.add_option("--threads", o.threads, "Worker threads, 0 for all cores");
  cmd.add_flag("--random-derangement", o.random_derangement, "Random source-destination pairing");
  cmd.add_option("--tolerance", o.tolerance, "Relative error gate for throughput");
  cmd.add_option("--delay-tolerance", o.delay_tolerance, "Relative error gate for delay");
  cmd.add_option("--fp-tolerance", o.fp_tolerance, "Fixed-point residual bound");
  cmd.add_option("--fp-max-iterations", o.fp_max_iterations, "Fixed-point iteration budget");

  cmd.add_option("--sweep-param", o.sweep_param, "Field to sweep");
  cmd.add_option("--sweep-values", o.sweep_values, "Comma-separated sweep values")->delimiter(',');
  cmd.add_option("--density", o.density, "Nodes per cell for an n sweep");
  cmd.add_flag("--with-sim", o.with_sim, "Add simulation columns to a sweep");
  cmd.add_flag("--both-feedback", o.both_feedback, "Run every point with and without feedback");
}

ExperimentConfig build_config(const Overrides& o, const CLI::App& cmd) {
  const auto given = [&](const char* name) { return cmd.count(name) > 0; };
  ExperimentConfig c = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  auto& p = c.params;
  if (o.n) p.n = *o.n;
  if (o.m) p.m = *o.m;
  if (o.bs) p.source_buffer = *o.bs;
  if (o.br) p.relay_buffer = *o.br;
  if (o.lambda) p.lambda = *o.lambda;
  if (given("--feedback")) p.feedback = o.feedback;
  if (o.mac) p.mac = parse_mac(*o.mac);
  if (o.nu) p.nu = *o.nu;
  if (o.delta) p.delta = *o.delta;
  if (o.mobility) p.mobility = parse_mobility(*o.mobility);
  if (o.seed) c.sim.seed = *o.seed;
  if (o.slots) c.sim.slots = *o.slots;
  if (o.reps) c.sim.replications = *o.reps;
  if (o.warmup) c.sim.warmup_fraction = *o.warmup;
  if (o.threads) c.sim.threads = *o.threads;
  if (given("--random-derangement")) c.sim.random_derangement = o.random_derangement;
  if (o.tolerance) c.tolerance = *o.tolerance;
  if (o.delay_tolerance) c.delay_tolerance = *o.delay_tolerance;
  if (o.fp_tolerance) c.fixed_point.tolerance = *o.fp_tolerance;
  if (o.fp_max_iterations) c.fixed_point.max_iterations = *o.fp_max_iterations;
  if (given("--with-sim")) c.with_sim = o.with_sim;
  if (given("--both-feedback")) c.both_feedback = o.both_feedback;

  if (o.sweep_param || given("--sweep-values") || o.density) {
    Sweep s = c.sweep.value_or(Sweep{});
    if (o.sweep_param) s.param = *o.sweep_param;
    if (given("--sweep-values")) s.values = o.sweep_values;
    if (o.density) s.density = *o.density;
    if (s.param.empty()) throw ConfigError("--sweep-param is required for a sweep");
    c.sweep = s;
  }
  return c;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Buffer-limited two-hop relay MANET: theory, simulation and validation"};
  app.require_subcommand(1);
  Overrides o;

  struct Command {
    const char* name;
    const char* help;
    Format default_format;
    CLI::App* app = nullptr;
  };
  Command commands[] = {
      {"theory", "Closed-form report for one scenario or a sweep", Format::Json},
      {"simulate", "Monte Carlo simulation", Format::Json},
      {"validate", "Compare simulation against theory", Format::Csv},
      {"sweep", "Theory (and optionally simulation) across a parameter sweep", Format::Csv},
  };
  for (auto& c : commands) {
    c.app = app.add_subcommand(c.name, c.help);
    add_common(*c.app, o);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitPass : kExitConfigError;
  }

  try {
    const Command* chosen = nullptr;
    for (const auto& c : commands)
      if (c.app->parsed()) chosen = &c;
    const ExperimentConfig config = build_config(o, *chosen->app);

    Format format = chosen->default_format;
    if (o.format == "csv") format = Format::Csv;
    if (o.format == "json") format = Format::Json;

    std::ofstream file;
    if (!o.out_path.empty()) {
      file.open(o.out_path);
      if (!file) throw ConfigError("cannot write '" + o.out_path + "'");
    }
    std::ostream& sink = o.out_path.empty() ? out : file;

    const std::string name = chosen->name;
    if (name == "theory") return cmd_theory(config, format, sink);
    if (name == "simulate") return cmd_simulate(config, format, sink);
    if (name == "validate") return cmd_validate(config, format, sink);
    return cmd_sweep(config, format, sink);
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << " (residual " << e.residual() << " after " << e.iterations()
        << " iterations)\n";
    return kExitNonConvergence;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

}  // namespace bufmanet
