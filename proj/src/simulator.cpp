#include "bufmanet/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>

namespace bufmanet {
namespace {

int uniform_index(Rng& rng, int count) {
  return std::uniform_int_distribution<int>(0, count - 1)(rng);
}

int torus_distance(int a, int b, int side) {
  const int d = std::abs(a - b);
  return std::min(d, side - d);
}

Rng replication_rng(std::uint64_t seed, int id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id)};
  return Rng(seq);
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

std::vector<double> normalized(const std::vector<std::uint64_t>& counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), 0ULL));
  std::vector<double> out(counts.size(), 0.0);
  if (total == 0.0) return out;
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(counts[i]) / total;
  return out;
}

}  // namespace

void SimOptions::validate() const {
  if (slots < 10'000) throw ParameterError("slots must be at least 10^4");
  if (!(warmup_fraction >= 0.0 && warmup_fraction <= 0.5))
    throw ParameterError("warmup_fraction must lie in [0, 0.5]");
  if (replications < 1) throw ParameterError("replications must be at least 1");
  if (threads < 0) throw ParameterError("threads must be non-negative");
}

std::vector<int> cyclic_derangement(int n) {
  std::vector<int> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = (i + 1) % n;
  return out;
}

std::vector<int> random_derangement(int n, Rng& rng) {
  std::vector<int> out(static_cast<std::size_t>(n));
  std::iota(out.begin(), out.end(), 0);
  for (;;) {
    std::shuffle(out.begin(), out.end(), rng);
    bool fixed = false;
    for (int i = 0; i < n && !fixed; ++i) fixed = out[static_cast<std::size_t>(i)] == i;
    if (!fixed) return out;
  }
}

Network::Network(const NetworkParams& params, std::vector<int> destination)
    : params_(params), destination_(std::move(destination)) {
  params_.validate();
  const int n = params_.n;
  if (static_cast<int>(destination_.size()) != n)
    throw ParameterError("destination map must have one entry per node");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const int d = destination_[static_cast<std::size_t>(i)];
    if (d < 0 || d >= n || d == i || seen[static_cast<std::size_t>(d)])
      throw ParameterError("destination map must be a derangement");
    seen[static_cast<std::size_t>(d)] = true;
  }

  cells_ = params_.m * params_.m;
  if (params_.mac == Mac::EC) {
    epsilon_ = ec_geometry(params_.m, params_.nu, params_.delta).epsilon;
    reach_ = params_.nu - 1;
  }

  nodes_.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    nodes_.push_back(NodeState{0, SourceQueue(params_.source_buffer),
                               RelayBuffer(params_.relay_buffer, n)});
  cell_start_.assign(static_cast<std::size_t>(cells_) + 1, 0);
  cell_nodes_.assign(static_cast<std::size_t>(n), 0);
  scheduled_.reserve(static_cast<std::size_t>(cells_));
  candidates_.reserve(static_cast<std::size_t>(n));
}

void Network::place_uniformly(Rng& rng) {
  for (auto& node : nodes_) node.cell = uniform_index(rng, cells_);
}

void Network::mobility_step(Rng& rng) {
  if (params_.mobility == Mobility::IID) {
    place_uniformly(rng);
    return;
  }
  const int m = params_.m;
  for (auto& node : nodes_) {
    const int move = uniform_index(rng, 9);
    const int row = (node.cell / m + move / 3 - 1 + m) % m;
    const int col = (node.cell % m + move % 3 - 1 + m) % m;
    node.cell = row * m + col;
  }
}

void Network::generate(std::int64_t slot, Rng& rng) {
  std::bernoulli_distribution arrival(params_.lambda);
  for (int i = 0; i < params_.n; ++i) {
    if (!arrival(rng)) continue;
    ++accounting_.generated;
    ++accounting_.in_flight;
    const Packet packet{next_packet_id_++, i, destination(i), slot};
    if (!nodes_[static_cast<std::size_t>(i)].source.push(packet)) {
      ++accounting_.dropped_source;
      --accounting_.in_flight;
    }
  }
}

void Network::rebuild_cell_index() {
  std::fill(cell_start_.begin(), cell_start_.end(), 0);
  for (const auto& node : nodes_) ++cell_start_[static_cast<std::size_t>(node.cell) + 1];
  std::partial_sum(cell_start_.begin(), cell_start_.end(), cell_start_.begin());
  std::vector<int>& fill = cell_fill_;
  fill.assign(cell_start_.begin(), cell_start_.end() - 1);
  for (int i = 0; i < params_.n; ++i) {
    const auto cell = static_cast<std::size_t>(nodes_[static_cast<std::size_t>(i)].cell);
    cell_nodes_[static_cast<std::size_t>(fill[cell]++)] = i;
  }
}

std::span<const int> Network::occupants(int cell) const {
  const auto c = static_cast<std::size_t>(cell);
  return std::span<const int>(cell_nodes_).subspan(
      static_cast<std::size_t>(cell_start_[c]),
      static_cast<std::size_t>(cell_start_[c + 1] - cell_start_[c]));
}

std::span<const Transmission> Network::schedule(std::int64_t slot, Rng& rng) {
  rebuild_cell_index();
  scheduled_.clear();
  const int m = params_.m;
  const auto period = static_cast<std::int64_t>(epsilon_) * epsilon_;
  const int active = static_cast<int>(slot % period);
  const int active_row = active / epsilon_;
  const int active_col = active % epsilon_;
  for (int cell = 0; cell < cells_; ++cell) {
    if (params_.mac == Mac::EC &&
        ((cell / m) % epsilon_ != active_row || (cell % m) % epsilon_ != active_col))
      continue;
    const auto here = occupants(cell);
    if (here.empty()) continue;
    const int pick = here.size() == 1 ? 0 : uniform_index(rng, static_cast<int>(here.size()));
    scheduled_.push_back({here[static_cast<std::size_t>(pick)], cell});
  }
  return scheduled_;
}

bool Network::covers(int center_cell, int cell) const {
  const int m = params_.m;
  return torus_distance(center_cell / m, cell / m, m) <= reach_ &&
         torus_distance(center_cell % m, cell % m, m) <= reach_;
}

Outcome Network::execute(const Transmission& tx, std::int64_t /*slot*/, Rng& rng) {
  Outcome out;
  const int s = tx.transmitter;
  const int d = destination(s);
  NodeState& sender = nodes_[static_cast<std::size_t>(s)];

  if (covers(tx.cell, nodes_[static_cast<std::size_t>(d)].cell)) {
    out.op = Operation::SourceToDestination;
    out.receiver = d;
    if (auto packet = sender.source.pop()) {
      out.transmitted = out.delivered = true;
      out.packet = *packet;
      ++accounting_.delivered;
      --accounting_.in_flight;
    }
    return out;
  }

  candidates_.clear();
  const int m = params_.m;
  const int row = tx.cell / m;
  const int col = tx.cell % m;
  for (int dr = -reach_; dr <= reach_; ++dr) {
    for (int dc = -reach_; dc <= reach_; ++dc) {
      const int cell = ((row + dr + m) % m) * m + (col + dc + m) % m;
      for (int other : occupants(cell))
        if (other != s) candidates_.push_back(other);
    }
  }
  if (candidates_.empty()) return out;

  const bool to_relay = std::bernoulli_distribution(0.5)(rng);
  const int r = candidates_[static_cast<std::size_t>(
      uniform_index(rng, static_cast<int>(candidates_.size())))];
  out.receiver = r;

  if (to_relay) {
    out.op = Operation::SourceToRelay;
    if (sender.source.empty()) return out;
    RelayBuffer& relay = nodes_[static_cast<std::size_t>(r)].relay;
    if (relay.full() && params_.feedback) {
      out.blocked = true;
      return out;
    }
    out.packet = *sender.source.pop();
    out.transmitted = true;
    if (!relay.push(out.packet)) {
      out.dropped_at_relay = true;
      ++accounting_.dropped_relay;
      --accounting_.in_flight;
    }
    return out;
  }

  out.op = Operation::RelayToDestination;
  if (auto packet = sender.relay.pop(r)) {
    out.transmitted = out.delivered = true;
    out.packet = *packet;
    ++accounting_.delivered;
    --accounting_.in_flight;
  }
  return out;
}

void Network::check_invariants() const {
  std::uint64_t held = 0;
  for (int i = 0; i < params_.n; ++i) {
    const NodeState& node = nodes_[static_cast<std::size_t>(i)];
    if (node.source.size() > params_.source_buffer)
      throw std::logic_error("source buffer bound violated at node " + std::to_string(i));
    if (node.relay.size() > params_.relay_buffer)
      throw std::logic_error("relay buffer bound violated at node " + std::to_string(i));
    if (node.relay.queue_length(i) != 0 || node.relay.queue_length(destination(i)) != 0)
      throw std::logic_error("relay queue holds a packet of the node's own flows");
    held += static_cast<std::uint64_t>(node.source.size() + node.relay.size());
  }
  if (held != accounting_.in_flight || !accounting_.balanced())
    throw std::logic_error("packet accounting identity violated");
}

ReplicationResult run_replication(const NetworkParams& params, const SimOptions& options, int id) {
  params.validate();
  options.validate();

  std::vector<int> destination;
  if (options.random_derangement) {
    Rng perm_rng = replication_rng(options.seed, -1);
    destination = random_derangement(params.n, perm_rng);
  } else {
    destination = cyclic_derangement(params.n);
  }

  Network net(params, std::move(destination));
  Rng rng = replication_rng(options.seed, id);
  net.place_uniformly(rng);

  const auto n = static_cast<std::size_t>(params.n);
  const auto warmup =
      static_cast<std::int64_t>(std::llround(static_cast<double>(options.slots) * options.warmup_fraction));
  const auto window = options.slots - warmup;

  ReplicationResult res;
  res.id = id;
  res.seed = options.seed;
  res.delivered.assign(n, 0);
  std::vector<std::uint64_t> source_hist(static_cast<std::size_t>(params.source_buffer) + 1, 0);
  std::vector<std::uint64_t> relay_hist(static_cast<std::size_t>(params.relay_buffer) + 1, 0);
  res.substate.assign(relay_hist.size(), std::vector<std::uint64_t>(relay_hist.size(), 0));
  std::uint64_t sd = 0, sr = 0, rd = 0;
  double delay_sum = 0.0;

#ifdef NDEBUG
  constexpr std::int64_t kCheckEvery = 4096;
#else
  constexpr std::int64_t kCheckEvery = 1;
#endif

  for (std::int64_t slot = 0; slot < options.slots; ++slot) {
    const bool measuring = slot >= warmup;
    net.mobility_step(rng);
    net.generate(slot, rng);
    if (measuring)
      for (const auto& node : net.nodes()) ++source_hist[static_cast<std::size_t>(node.source.size())];

    for (const Transmission& tx : net.schedule(slot, rng)) {
      const Outcome out = net.execute(tx, slot, rng);
      if (!measuring && !out.delivered) continue;
      if (measuring) {
        sd += out.op == Operation::SourceToDestination;
        sr += out.op == Operation::SourceToRelay;
        rd += out.op == Operation::RelayToDestination;
      }
      if (out.delivered) {
        if (measuring) ++res.delivered[static_cast<std::size_t>(out.packet.src)];
        if (out.packet.gen_slot >= warmup) {
          delay_sum += static_cast<double>(slot - out.packet.gen_slot);
          ++res.delay_samples;
        }
      }
    }

    if (measuring) {
      for (const auto& node : net.nodes()) {
        const auto occ = static_cast<std::size_t>(node.relay.size());
        ++relay_hist[occ];
        if (occ > 0) ++res.substate[occ][static_cast<std::size_t>(node.relay.nonempty_queues())];
      }
    }
    if (slot % kCheckEvery == 0) net.check_invariants();
  }
  net.check_invariants();

  res.accounting = net.accounting();
  const double node_slots = static_cast<double>(window) * static_cast<double>(n);
  const std::uint64_t total_delivered =
      std::accumulate(res.delivered.begin(), res.delivered.end(), 0ULL);
  res.throughput = static_cast<double>(total_delivered) / node_slots;
  res.mean_delay = res.delay_samples ? delay_sum / static_cast<double>(res.delay_samples) : 0.0;
  res.empirical_pi_s = normalized(source_hist);
  res.empirical_pi_r = normalized(relay_hist);
  res.relay_occupancy = relay_hist;
  res.opportunities = {static_cast<double>(sd) / node_slots, static_cast<double>(sr) / node_slots,
                       static_cast<double>(rd) / node_slots};
  return res;
}

double ci_halfwidth(std::span<const double> samples) {
  if (samples.size() < 2) return std::numeric_limits<double>::infinity();
  const double mean = mean_of(samples);
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(samples.size()));
}

SimReport run(const NetworkParams& params, const SimOptions& options) {
  params.validate();
  options.validate();

  SimReport report;
  report.params = params;
  report.options = options;
  report.slots_run = options.slots;
  report.warmup_slots = static_cast<std::int64_t>(
      std::llround(static_cast<double>(options.slots) * options.warmup_fraction));
  report.replications.resize(static_cast<std::size_t>(options.replications));

  unsigned workers = options.threads > 0 ? static_cast<unsigned>(options.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, static_cast<unsigned>(options.replications));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int id = next++; id < options.replications; id = next++) {
      try {
        report.replications[static_cast<std::size_t>(id)] = run_replication(params, options, id);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  const auto n = static_cast<std::size_t>(params.n);
  const double reps = options.replications;
  const double window = static_cast<double>(report.slots_run - report.warmup_slots);
  report.delivered.assign(n, 0);
  report.flow_throughput.assign(n, 0.0);
  report.empirical_pi_s.assign(static_cast<std::size_t>(params.source_buffer) + 1, 0.0);
  report.empirical_pi_r.assign(static_cast<std::size_t>(params.relay_buffer) + 1, 0.0);
  report.substate.assign(report.empirical_pi_r.size(),
                         std::vector<std::uint64_t>(report.empirical_pi_r.size(), 0));

  std::vector<double> tput, delay, psd, psr, prd;
  for (const auto& rep : report.replications) {
    report.accounting.generated += rep.accounting.generated;
    report.accounting.delivered += rep.accounting.delivered;
    report.accounting.dropped_source += rep.accounting.dropped_source;
    report.accounting.dropped_relay += rep.accounting.dropped_relay;
    report.accounting.in_flight += rep.accounting.in_flight;
    for (std::size_t f = 0; f < n; ++f) {
      report.delivered[f] += rep.delivered[f];
      report.flow_throughput[f] += static_cast<double>(rep.delivered[f]) / window / reps;
    }
    for (std::size_t i = 0; i < report.empirical_pi_s.size(); ++i)
      report.empirical_pi_s[i] += rep.empirical_pi_s[i] / reps;
    for (std::size_t i = 0; i < report.empirical_pi_r.size(); ++i) {
      report.empirical_pi_r[i] += rep.empirical_pi_r[i] / reps;
      for (std::size_t l = 0; l < report.substate[i].size(); ++l)
        report.substate[i][l] += rep.substate[i][l];
    }
    tput.push_back(rep.throughput);
    delay.push_back(rep.mean_delay);
    psd.push_back(rep.opportunities.psd);
    psr.push_back(rep.opportunities.psr);
    prd.push_back(rep.opportunities.prd);
  }
  report.throughput = mean_of(tput);
  report.throughput_ci = ci_halfwidth(tput);
  report.mean_delay = mean_of(delay);
  report.delay_ci = ci_halfwidth(delay);
  report.opportunities = {mean_of(psd), mean_of(psr), mean_of(prd)};
  report.opportunities_ci = {ci_halfwidth(psd), ci_halfwidth(psr), ci_halfwidth(prd)};
  return report;
}

}  // namespace bufmanet
