#pragma once

#include <functional>

#include "bufmanet/types.hpp"

namespace bufmanet {

/// Equivalence-class layout of an EC-MAC network.
struct EcGeometry {
  int epsilon = 1;  // partition period; each class is active once every epsilon^2 slots
  int gamma = 1;    // cells covered by one transmitter, (2nu-1)^2
};

struct EcProbs {
  SchedProbs probs;
  EcGeometry geometry;
};

/// Anything mapping a scenario to its scheduling probabilities can drive
/// the analytic pipeline.
using MacProvider = std::function<SchedProbs(const NetworkParams&)>;

/// Local-scheduling MAC: one transmitter per non-empty cell, coverage is the
/// transmitter's own cell.
SchedProbs ls_mac_probs(int n, int m);

/// Partition period and coverage size for the given range and guard factor.
/// Throws ParameterError when the coverage does not fit in the network.
EcGeometry ec_geometry(int m, int nu, double delta);

/// Equivalence-class MAC probabilities together with the layout used.
EcProbs ec_mac_probs(int n, int m, int nu, double delta);

/// Built-in provider dispatching on params.mac.
SchedProbs sched_probs(const NetworkParams& params);

}  // namespace bufmanet
