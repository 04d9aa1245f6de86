#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bufmanet/types.hpp"

// Reference computations used only by the tests. None of them calls into
// the analytic engine.
namespace oracle {

struct Stationary {
  std::vector<double> pi;
  bool irreducible = false;
  bool aperiodic = false;
};

/// Dense linear solve of pi P = pi, sum(pi) = 1. Flags reducible and
/// periodic chains. Throws std::invalid_argument if P is not stochastic.
Stationary stationary_oracle(const Eigen::MatrixXd& P);

/// Source buffer chain built from slot dynamics: state is the occupancy
/// seen after the slot's arrival; next slot serves one packet with
/// probability mu (if any), then admits an arrival with probability lambda
/// unless the buffer is full.
Eigen::MatrixXd source_chain(double lambda, double mu, int source_buffer);

/// Number of ways to spread i identical packets over `queues` queues with
/// exactly l non-empty, for l = 0..i. Counted by dynamic programming.
std::vector<double> composition_counts(int queues, int packets);

/// P(l non-empty queues | i packets) under uniform multiset allocation.
std::vector<double> substate_by_counting(int n, int packets);

/// Relay chain: arrivals at psr (1 - pi_s0); a departure needs the relay to
/// hold a packet for the destination it meets, averaged over the sub-state law.
Eigen::MatrixXd relay_chain(int n, int relay_buffer, double pi_s0, double psr);

/// Opportunity probabilities by direct summation over binomial occupancy.
bufmanet::SchedProbs ls_probs_by_summation(int n, int m);
bufmanet::SchedProbs ec_probs_by_summation(int n, int m, int nu, double delta);

double binomial_pmf(int trials, int k, double p);

}  // namespace oracle
