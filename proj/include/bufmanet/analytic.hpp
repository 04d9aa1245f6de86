#pragma once

#include <vector>

#include "bufmanet/mac_models.hpp"
#include "bufmanet/types.hpp"

namespace bufmanet {

/// |lambda - mu| below which the source queue is treated as balanced (tau = 1).
inline constexpr double kBalancedTolerance = 1e-9;

/// Stationary occupancy of the Bernoulli/Bernoulli/1/Bs source queue,
/// observed after the slot's arrival and before its service.
struct SourceOSD {
  std::vector<double> pi;  // length Bs + 1
  double mu = 0.0;
  double tau = 0.0;        // +inf when lambda == 1
};

/// Stationary occupancy of the shared relay buffer.
struct RelayOSD {
  std::vector<double> pi;  // length Br + 1
};

/// One-step probabilities of the relay birth-death chain.
/// up[i] = p(i, i+1) with up[Br] = 0; down[i] = p(i, i-1) with down[0] = 0.
struct BirthDeath {
  std::vector<double> up;
  std::vector<double> down;

  double stay(std::size_t i) const { return 1.0 - up[i] - down[i]; }
};

struct FixedPointOptions {
  double tolerance = 1e-12;
  int max_iterations = 10000;

  bool operator==(const FixedPointOptions&) const = default;
};

struct FixedPointResult {
  double overflow = 0.0;  // pi_r(Br) with |x - F(x)| < tolerance
  double mu_s = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool damped = false;
};

/// Every closed-form output of the model for one scenario.
struct TheoryReport {
  NetworkParams params;
  SchedProbs probs;
  double throughput = 0.0;  // T, packets/slot per flow
  double delay = 0.0;       // E{D}, slots
  double capacity = 0.0;    // Tc, packets/slot
  double mean_source_len = 0.0;  // Ls
  double mean_relay_len = 0.0;   // Lr
  double pi_s0 = 0.0;
  double pi_rBr = 0.0;
  double mu_s = 0.0;
  double tau = 0.0;
  std::vector<double> pi_s;
  std::vector<double> pi_r;
  int fixed_point_iterations = 0;
  double fixed_point_residual = 0.0;
};

enum class ThroughputLimit { BsInf, BrInf, BothInf };
enum class DelayLimit { BsInfSaturated, BsInfStable, BrInf, BothInfStable };

/// Source service rate: psd + psr without feedback, psd + psr (1 - overflow) with it.
double service_rate(const SchedProbs& probs, bool feedback, double overflow);

/// Throws ParameterError for lambda == mu == 1 or arguments outside (0, 1].
SourceOSD source_osd(double lambda, double mu, int source_buffer);

/// Mean source occupancy seen by an admitted packet (Ls).
double mean_source_queue_seen(double tau, int source_buffer);

BirthDeath relay_transition_probs(const SchedProbs& probs, double pi_s0, int n, int relay_buffer);

/// Binomial-weighted relay law; weights are built in log space so large n
/// and Br stay finite. A zero psr (no relay traffic) yields the empty buffer.
RelayOSD relay_osd(int n, int relay_buffer, double pi_s0, double psr);

/// Mean relay occupancy conditioned on the buffer not being full (Lr).
double mean_relay_queue_not_full(const RelayOSD& relay);

/// One evaluation of the overflow self-map F(x) under feedback.
double overflow_map(const NetworkParams& params, const SchedProbs& probs, double overflow);

/// Solves x = F(x) starting from x = 0. Plain iteration first; switches to
/// x <- (x + F(x)) / 2 on oscillation or after half the budget.
/// Throws ConvergenceError when the budget runs out.
FixedPointResult overflow_fixed_point(const NetworkParams& params, const SchedProbs& probs,
                                      const FixedPointOptions& options = {});

double throughput(double pi_s0, double pi_rBr, const SchedProbs& probs);

double expected_delay(double pi_rBr, double mu_s, double mean_source_len, double mean_relay_len,
                      const SchedProbs& probs, int n);

double throughput_capacity(const SchedProbs& probs, int n, int relay_buffer);

double limiting_throughput(const NetworkParams& params, const SchedProbs& probs,
                           ThroughputLimit regime);

/// Returns +inf for the saturated regime. Throws ParameterError when the
/// regime contradicts the lambda/mu comparison.
double limiting_delay(const NetworkParams& params, const SchedProbs& probs, DelayLimit regime);

/// Probability that a relay buffer holding i packets has exactly l
/// non-empty per-destination queues.
double relay_substate_dist(int n, int occupancy, int nonempty);

TheoryReport analyze(const NetworkParams& params, const FixedPointOptions& options = {});
TheoryReport analyze(const NetworkParams& params, const SchedProbs& probs,
                     const FixedPointOptions& options = {});
TheoryReport analyze(const NetworkParams& params, const MacProvider& mac,
                     const FixedPointOptions& options = {});

}  // namespace bufmanet
