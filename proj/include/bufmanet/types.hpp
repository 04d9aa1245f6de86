#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bufmanet {

enum class Mac { LS, EC };
enum class Mobility { IID, RW };

std::string_view to_string(Mac mac);
std::string_view to_string(Mobility mobility);
Mac parse_mac(std::string_view text);
Mobility parse_mobility(std::string_view text);

/// Raised for any parameter combination outside the model's domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when the overflow fixed point cannot be reached within budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Complete description of one cell-partitioned network scenario.
///
/// Defaults follow the reference setting: 72 nodes on a 6x6 torus with
/// five-packet source and relay buffers.
struct NetworkParams {
  int n = 72;               // nodes
  int m = 6;                // cells per side
  int source_buffer = 5;    // Bs, packets
  int relay_buffer = 5;     // Br, packets (0 disables relaying)
  double lambda = 0.05;     // packet generating probability per slot
  bool feedback = false;    // receiver reports relay-buffer fullness
  Mac mac = Mac::LS;
  int nu = 1;               // EC transmission range, in cells
  double delta = 1.0;       // EC guard factor
  Mobility mobility = Mobility::IID;

  /// Throws ParameterError on the first violated constraint.
  void validate() const;

  bool operator==(const NetworkParams&) const = default;
};

/// Per-slot probabilities that a node gets the chance to execute the
/// Source-to-Destination, Source-to-Relay and Relay-to-Destination
/// operations. A chance is not a transmission.
struct SchedProbs {
  double psd = 0.0;
  double psr = 0.0;
  double prd = 0.0;

  void validate() const;

  bool operator==(const SchedProbs&) const = default;
};

}  // namespace bufmanet
