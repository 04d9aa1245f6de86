#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "bufmanet/buffers.hpp"
#include "bufmanet/mac_models.hpp"
#include "bufmanet/types.hpp"

namespace bufmanet {

/// One stream per replication. Within a slot draws are consumed in the
/// order: mobility, generation, scheduling, protocol coin, receiver choice.
using Rng = std::mt19937_64;

struct SimOptions {
  std::int64_t slots = 2'000'000;
  double warmup_fraction = 0.2;
  std::uint64_t seed = 1;
  int replications = 10;
  int threads = 0;  // 0 = hardware concurrency
  bool random_derangement = false;

  void validate() const;
  bool operator==(const SimOptions&) const = default;
};

struct NodeState {
  int cell = 0;  // row * m + col
  SourceQueue source;
  RelayBuffer relay;  // indexed by destination node id
};

/// A scheduled transmitter and the cell its coverage is centred on.
struct Transmission {
  int transmitter = 0;
  int cell = 0;
};

enum class Operation { None, SourceToDestination, SourceToRelay, RelayToDestination };

/// What a transmitter did with its chance. `op` is the chance it got;
/// `transmitted` says whether a packet actually left.
struct Outcome {
  Operation op = Operation::None;
  int receiver = -1;
  bool transmitted = false;
  bool delivered = false;        // packet reached its destination this slot
  bool dropped_at_relay = false; // no-feedback S-R into a full relay
  bool blocked = false;          // feedback reported a full relay
  Packet packet;
};

/// Counters that must satisfy generated = delivered + dropped + in flight.
struct Accounting {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_source = 0;
  std::uint64_t dropped_relay = 0;
  std::uint64_t in_flight = 0;

  bool balanced() const {
    return generated == delivered + dropped_source + dropped_relay + in_flight;
  }
  bool operator==(const Accounting&) const = default;
};

/// Slotted cell-partitioned network: node positions, buffers and the 2HR
/// protocol. Owns no RNG; every stochastic step takes one.
class Network {
 public:
  Network(const NetworkParams& params, std::vector<int> destination);

  const NetworkParams& params() const { return params_; }
  int destination(int node) const { return destination_[static_cast<std::size_t>(node)]; }
  std::span<const NodeState> nodes() const { return nodes_; }
  NodeState& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Accounting& accounting() const { return accounting_; }
  int epsilon() const { return epsilon_; }

  void place_uniformly(Rng& rng);
  void mobility_step(Rng& rng);

  /// Bernoulli generation at every node. Full source buffers drop the packet.
  void generate(std::int64_t slot, Rng& rng);

  /// Transmitters for this slot, ordered by cell index.
  std::span<const Transmission> schedule(std::int64_t slot, Rng& rng);

  bool covers(int center_cell, int cell) const;

  /// Runs the two-hop relay protocol for one scheduled transmitter.
  Outcome execute(const Transmission& tx, std::int64_t slot, Rng& rng);

  /// Throws std::logic_error if a buffer bound or the accounting identity
  /// is violated.
  void check_invariants() const;

  /// Occupants of a cell as of the last schedule() call.
  std::span<const int> occupants(int cell) const;

 private:
  void rebuild_cell_index();

  NetworkParams params_;
  std::vector<int> destination_;
  std::vector<NodeState> nodes_;
  int cells_ = 1;
  int epsilon_ = 1;
  int reach_ = 0;  // coverage radius in cells (nu - 1 for EC, 0 for LS)

  std::vector<int> cell_start_;
  std::vector<int> cell_nodes_;
  std::vector<int> cell_fill_;
  std::vector<Transmission> scheduled_;
  std::vector<int> candidates_;
  std::uint64_t next_packet_id_ = 0;
  Accounting accounting_;
};

/// phi(i) = i + 1 mod n.
std::vector<int> cyclic_derangement(int n);
std::vector<int> random_derangement(int n, Rng& rng);

struct ReplicationResult {
  int id = 0;
  std::uint64_t seed = 0;
  Accounting accounting;
  std::vector<std::uint64_t> delivered;  // per flow, inside the window
  double throughput = 0.0;               // mean per flow, packets/slot
  double mean_delay = 0.0;
  std::uint64_t delay_samples = 0;
  std::vector<double> empirical_pi_s;
  std::vector<double> empirical_pi_r;
  SchedProbs opportunities;
  std::vector<std::vector<std::uint64_t>> substate;  // [i][l] counts
  std::vector<std::uint64_t> relay_occupancy;        // [i] node-slot counts

  bool operator==(const ReplicationResult&) const = default;
};

struct SimReport {
  NetworkParams params;
  SimOptions options;
  std::int64_t slots_run = 0;
  std::int64_t warmup_slots = 0;
  std::vector<ReplicationResult> replications;

  Accounting accounting;                 // summed over replications
  std::vector<std::uint64_t> delivered;  // per flow, summed over replications
  std::vector<double> flow_throughput;   // per flow, mean over replications
  double throughput = 0.0;
  double throughput_ci = 0.0;  // 95% normal half-width over replications
  double mean_delay = 0.0;
  double delay_ci = 0.0;
  std::vector<double> empirical_pi_s;
  std::vector<double> empirical_pi_r;
  SchedProbs opportunities;
  SchedProbs opportunities_ci;
  std::vector<std::vector<std::uint64_t>> substate;

  bool operator==(const SimReport&) const = default;
};

ReplicationResult run_replication(const NetworkParams& params, const SimOptions& options, int id);

/// Runs all replications (possibly concurrently) and merges them in id order.
SimReport run(const NetworkParams& params, const SimOptions& options);

/// 95% normal-approximation half-width of the mean; +inf for fewer than two samples.
double ci_halfwidth(std::span<const double> samples);

}  // namespace bufmanet
