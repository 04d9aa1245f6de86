#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bufmanet/analytic.hpp"
#include "bufmanet/csv.hpp"
#include "bufmanet/simulator.hpp"
#include "bufmanet/types.hpp"

namespace bufmanet {

/// Malformed configuration: unknown key, wrong type, bad sweep.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exit statuses shared by every subcommand.
enum ExitCode : int {
  kExitPass = 0,
  kExitToleranceFailure = 1,
  kExitConfigError = 2,
  kExitNonConvergence = 3,
};

struct Sweep {
  std::string param;           // a NetworkParams field name: n, m, Bs, Br, lambda_s, nu, delta
  std::vector<double> values;
  std::optional<double> density;  // n sweep only: m = sqrt(n / density)

  bool operator==(const Sweep&) const = default;
};

struct ExperimentConfig {
  NetworkParams params;
  SimOptions sim;
  std::optional<Sweep> sweep;
  double tolerance = 0.05;        // relative error gate for throughput
  double delay_tolerance = 0.08;  // relative error gate for mean delay
  bool both_feedback = false;     // validate/sweep run each point with and without feedback
  bool with_sim = false;          // sweep adds simulation columns
  FixedPointOptions fixed_point;  // budget is capped at 10^4 iterations

  /// Throws ConfigError / ParameterError.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: every key must be a known field of the right type.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

/// Copy of `params` with the swept field set to `value`.
NetworkParams apply_sweep_value(const NetworkParams& params, const Sweep& sweep, double value);

/// Every scenario the config expands to, in sweep order; feedback off
/// before on when both modes are requested.
std::vector<NetworkParams> expand_scenarios(const ExperimentConfig& config);

enum class RowStatus { Pass, Fail, Inconclusive };
std::string_view to_string(RowStatus status);
RowStatus parse_row_status(std::string_view text);

struct ComparisonRow {
  std::string param;  // swept field, empty for a single point
  double value = 0.0;
  bool feedback = false;
  double t_theory = 0.0;
  double t_sim = 0.0;
  double t_rel_err = 0.0;
  double t_ci = 0.0;
  double ed_theory = 0.0;
  double ed_sim = 0.0;
  double ed_rel_err = 0.0;
  double ed_ci = 0.0;
  RowStatus status = RowStatus::Fail;

  bool operator==(const ComparisonRow&) const = default;
};

struct SweepRow {
  std::string param;
  double value = 0.0;
  bool feedback = false;
  double throughput = 0.0;
  double delay = 0.0;
  double capacity = 0.0;
  double pi_s0 = 0.0;
  double pi_rBr = 0.0;
  double mu_s = 0.0;
  std::optional<double> t_sim;
  std::optional<double> t_ci;
  std::optional<double> ed_sim;
  std::optional<double> ed_ci;

  bool operator==(const SweepRow&) const = default;
};

/// Pass when both metrics are within tolerance or the theory value is inside
/// the simulation CI. A failing row whose CI is itself wider than the
/// tolerance is inconclusive.
RowStatus classify(const ComparisonRow& row, double tolerance, double delay_tolerance);

using TheoryFn = std::function<TheoryReport(const NetworkParams&)>;

std::vector<ComparisonRow> validate_rows(const ExperimentConfig& config, const TheoryFn& theory = {});
std::vector<SweepRow> sweep_rows(const ExperimentConfig& config);

csv::Table to_table(const std::vector<ComparisonRow>& rows);
csv::Table to_table(const std::vector<SweepRow>& rows);
std::vector<ComparisonRow> comparison_rows_from(const csv::Table& table);
std::vector<SweepRow> sweep_rows_from(const csv::Table& table);

std::string theory_json(const TheoryReport& report);
std::string simulation_json(const SimReport& report);

enum class Format { Csv, Json };

/// Subcommands. Each writes its result to `out` and returns an ExitCode;
/// exceptions propagate to the caller.
int cmd_theory(const ExperimentConfig& config, Format format, std::ostream& out);
int cmd_simulate(const ExperimentConfig& config, Format format, std::ostream& out);
int cmd_validate(const ExperimentConfig& config, Format format, std::ostream& out,
                 const TheoryFn& theory = {});
int cmd_sweep(const ExperimentConfig& config, Format format, std::ostream& out);

/// Full command-line entry point: parses argv, dispatches, maps exceptions
/// to exit codes and reports diagnostics on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bufmanet
