#include "bufmanet/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace bufmanet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// exp(w - max) normalized; entries of -inf map to exact zeros.
std::vector<double> normalize_log_weights(const std::vector<double>& log_w) {
  const double top = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> out(log_w.size());
  std::transform(log_w.begin(), log_w.end(), out.begin(),
                 [top](double w) { return std::exp(w - top); });
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& p : out) p /= total;
  return out;
}

double log_choose(double top, double k) {
  return std::lgamma(top + 1.0) - std::lgamma(k + 1.0) - std::lgamma(top - k + 1.0);
}

bool is_balanced(double lambda, double mu) { return std::abs(lambda - mu) < kBalancedTolerance; }

// Generic x <- F(x) driver shared by the finite and infinite-source solvers.
template <typename Map>
FixedPointResult iterate_to_fixed_point(Map&& map, const FixedPointOptions& options) {
  FixedPointResult result;
  double x = 0.0;
  double previous_step = 0.0;
  int sign_flips = 0;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const double fx = map(x);
    const double step = fx - x;
    result.iterations = it;
    result.residual = std::abs(step);
    if (result.residual < options.tolerance) {
      result.overflow = x;
      return result;
    }
    if (previous_step != 0.0 && (step > 0.0) != (previous_step > 0.0)) ++sign_flips;
    if (!result.damped && (sign_flips >= 2 || it > options.max_iterations / 2))
      result.damped = true;
    previous_step = step;
    x = result.damped ? 0.5 * (x + fx) : fx;
  }
  throw ConvergenceError("overflow fixed point did not converge after " +
                             std::to_string(result.iterations) +
                             " iterations (residual " + std::to_string(result.residual) + ")",
                         result.residual, result.iterations);
}

// Service rate with an infinite source buffer under feedback, and the
// matching relay overflow.
struct InfiniteSourceState {
  double mu = 0.0;
  double rho = 0.0;
  RelayOSD relay;
};

InfiniteSourceState infinite_source_state(const NetworkParams& params, const SchedProbs& probs) {
  const auto relay_for = [&](double mu) {
    const double rho = std::min(params.lambda / mu, 1.0);
    return relay_osd(params.n, params.relay_buffer, 1.0 - rho, probs.psr);
  };
  double mu = service_rate(probs, false, 0.0);
  if (params.feedback) {
    if (params.relay_buffer == 0) {
      mu = service_rate(probs, true, 1.0);
    } else {
      const auto map = [&](double x) {
        return relay_for(service_rate(probs, true, x)).pi.back();
      };
      mu = service_rate(probs, true, iterate_to_fixed_point(map, FixedPointOptions{}).overflow);
    }
  }
  if (!(mu > 0.0)) throw ParameterError("source service rate is zero");
  return {mu, std::min(params.lambda / mu, 1.0), relay_for(mu)};
}

}  // namespace

double service_rate(const SchedProbs& probs, bool feedback, double overflow) {
  if (!feedback) return probs.psd + probs.psr;
  if (!(overflow >= 0.0 && overflow <= 1.0))
    throw ParameterError("overflow probability outside [0, 1]");
  return probs.psd + probs.psr * (1.0 - overflow);
}

SourceOSD source_osd(double lambda, double mu, int source_buffer) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ParameterError("lambda must lie in (0, 1]");
  if (!(mu > 0.0 && mu <= 1.0)) throw ParameterError("mu must lie in (0, 1]");
  if (source_buffer < 1) throw ParameterError("Bs must be at least 1");
  if (lambda == 1.0 && mu == 1.0) throw ParameterError("lambda = mu = 1 leaves tau undefined");

  SourceOSD out;
  out.mu = mu;
  const auto size = static_cast<std::size_t>(source_buffer) + 1;

  if (lambda == 1.0) {
    // Arrivals every slot: the buffer is pinned at Bs.
    out.tau = kInf;
    out.pi.assign(size, 0.0);
    out.pi.back() = 1.0;
    return out;
  }

  double log_tau = 0.0;
  double log_first = 0.0;  // log pi(1)/pi(0)
  if (is_balanced(lambda, mu)) {
    out.tau = 1.0;
    log_first = -std::log1p(-mu);
  } else {
    log_tau = std::log(lambda) + std::log1p(-mu) - std::log(mu) - std::log1p(-lambda);
    out.tau = std::exp(log_tau);
    log_first = std::log(lambda) - std::log(mu) - std::log1p(-lambda);
  }

  std::vector<double> log_w(size);
  log_w[0] = 0.0;
  log_w[1] = log_first;
  for (std::size_t i = 2; i < size; ++i) log_w[i] = log_w[i - 1] + log_tau;
  out.pi = normalize_log_weights(log_w);
  return out;
}

double mean_source_queue_seen(double tau, int source_buffer) {
  if (source_buffer < 1) throw ParameterError("Bs must be at least 1");
  if (source_buffer == 1 || tau == 0.0) return 0.0;
  if (std::isinf(tau)) return source_buffer - 1.0;
  if (tau == 1.0) return 0.5 * (source_buffer - 1.0);

  // Admitted packets see i in [0, Bs-1] with weight tau^i.
  const double log_tau = std::log(tau);
  std::vector<double> log_w(static_cast<std::size_t>(source_buffer));
  for (std::size_t i = 0; i < log_w.size(); ++i) log_w[i] = static_cast<double>(i) * log_tau;
  const auto w = normalize_log_weights(log_w);
  double mean = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) mean += static_cast<double>(i) * w[i];
  return mean;
}

BirthDeath relay_transition_probs(const SchedProbs& probs, double pi_s0, int n, int relay_buffer) {
  if (n < 4) throw ParameterError("n must be at least 4");
  if (relay_buffer < 1) throw ParameterError("Br must be at least 1 for a relay chain");
  const auto size = static_cast<std::size_t>(relay_buffer) + 1;
  BirthDeath chain{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)};
  const double arrival = probs.psr * (1.0 - pi_s0);
  for (std::size_t i = 0; i + 1 < size; ++i) chain.up[i] = arrival;
  for (std::size_t i = 1; i < size; ++i) {
    const double occ = static_cast<double>(i);
    chain.down[i] = probs.prd * occ / (n - 3.0 + occ);
  }
  return chain;
}

RelayOSD relay_osd(int n, int relay_buffer, double pi_s0, double psr) {
  if (n < 4) throw ParameterError("n must be at least 4");
  if (relay_buffer < 0) throw ParameterError("Br must be non-negative");
  if (!(pi_s0 >= 0.0 && pi_s0 <= 1.0)) throw ParameterError("pi_s(0) outside [0, 1]");

  const auto size = static_cast<std::size_t>(relay_buffer) + 1;
  RelayOSD out;
  if (psr == 0.0 || pi_s0 == 1.0) {
    out.pi.assign(size, 0.0);
    out.pi[0] = 1.0;
    return out;
  }

  // log C_i with C_i = binom(n-3+i, i), built incrementally.
  const double log_busy = std::log1p(-pi_s0);
  std::vector<double> log_w(size);
  log_w[0] = 0.0;
  for (std::size_t i = 1; i < size; ++i) {
    const double occ = static_cast<double>(i);
    log_w[i] = log_w[i - 1] + std::log1p((n - 3.0) / occ) + log_busy;
  }
  out.pi = normalize_log_weights(log_w);
  return out;
}

double mean_relay_queue_not_full(const RelayOSD& relay) {
  const std::size_t top = relay.pi.size() - 1;
  if (top <= 1) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 1; i < top; ++i) sum += static_cast<double>(i) * relay.pi[i];
  return sum / (1.0 - relay.pi[top]);
}

double overflow_map(const NetworkParams& params, const SchedProbs& probs, double overflow) {
  const double mu = service_rate(probs, true, overflow);
  if (!(mu > 0.0)) throw ParameterError("source service rate is zero");
  const double pi_s0 = source_osd(params.lambda, mu, params.source_buffer).pi[0];
  return relay_osd(params.n, params.relay_buffer, pi_s0, probs.psr).pi.back();
}

FixedPointResult overflow_fixed_point(const NetworkParams& params, const SchedProbs& probs,
                                      const FixedPointOptions& options) {
  if (!params.feedback) throw ParameterError("the overflow fixed point applies only with feedback");
  if (params.relay_buffer < 1) throw ParameterError("the overflow fixed point needs Br >= 1");
  auto result = iterate_to_fixed_point(
      [&](double x) { return overflow_map(params, probs, x); }, options);
  result.mu_s = service_rate(probs, true, result.overflow);
  return result;
}

double throughput(double pi_s0, double pi_rBr, const SchedProbs& probs) {
  const double busy = 1.0 - pi_s0;
  return probs.psd * busy + probs.psr * busy * (1.0 - pi_rBr);
}

double expected_delay(double pi_rBr, double mu_s, double mean_source_len, double mean_relay_len,
                      const SchedProbs& probs, int n) {
  if (!(mu_s > 0.0)) throw ParameterError("mu_s must be positive");
  const double admitted = 1.0 - pi_rBr;
  const double relay_part =
      admitted == 0.0 ? 0.0
                      : (n - 2.0 + mean_relay_len) * admitted / (probs.psd + probs.psr * admitted);
  return (1.0 + mean_source_len) / mu_s + relay_part;
}

double throughput_capacity(const SchedProbs& probs, int n, int relay_buffer) {
  if (n < 4) throw ParameterError("n must be at least 4");
  if (relay_buffer < 0) throw ParameterError("Br must be non-negative");
  return probs.psd + probs.psr * relay_buffer / (n - 2.0 + relay_buffer);
}

double limiting_throughput(const NetworkParams& params, const SchedProbs& probs,
                           ThroughputLimit regime) {
  params.validate();
  switch (regime) {
    case ThroughputLimit::BothInf:
      return std::min(params.lambda, probs.psd + probs.psr);
    case ThroughputLimit::BrInf: {
      const double mu = probs.psd + probs.psr;
      const double pi_s0 = source_osd(params.lambda, mu, params.source_buffer).pi[0];
      return mu * (1.0 - pi_s0);
    }
    case ThroughputLimit::BsInf: {
      const auto state = infinite_source_state(params, probs);
      return state.rho * (probs.psd + probs.psr * (1.0 - state.relay.pi.back()));
    }
  }
  return 0.0;
}

double limiting_delay(const NetworkParams& params, const SchedProbs& probs, DelayLimit regime) {
  params.validate();
  const double lambda = params.lambda;
  switch (regime) {
    case DelayLimit::BsInfSaturated: {
      const auto state = infinite_source_state(params, probs);
      if (lambda < state.mu)
        throw ParameterError("saturated regime requires lambda >= mu_s");
      return kInf;
    }
    case DelayLimit::BsInfStable: {
      const auto state = infinite_source_state(params, probs);
      if (lambda >= state.mu) throw ParameterError("stable regime requires lambda < mu_s");
      const double overflow = state.relay.pi.back();
      const double lr = mean_relay_queue_not_full(state.relay);
      const double admitted = 1.0 - overflow;
      return (1.0 - lambda) / (state.mu - lambda) +
             (params.n - 2.0 + lr) * admitted / (probs.psd + probs.psr * admitted);
    }
    case DelayLimit::BrInf: {
      const double mu = probs.psd + probs.psr;
      const auto src = source_osd(lambda, mu, params.source_buffer);
      const double ls = mean_source_queue_seen(src.tau, params.source_buffer);
      const double p0 = src.pi[0];
      return (params.n - 2.0 + p0 * (1.0 + ls)) / (p0 * mu);
    }
    case DelayLimit::BothInfStable: {
      const double mu = probs.psd + probs.psr;
      if (lambda >= mu) throw ParameterError("stable regime requires lambda < psd + psr");
      return (params.n - 1.0 - lambda) / (mu - lambda);
    }
  }
  return 0.0;
}

double relay_substate_dist(int n, int occupancy, int nonempty) {
  if (n < 4) throw ParameterError("n must be at least 4");
  if (nonempty < 1 || nonempty > occupancy)
    throw ParameterError("need 1 <= l <= i for the relay sub-state law");
  if (nonempty > n - 2) return 0.0;
  const double i = occupancy;
  const double l = nonempty;
  return std::exp(log_choose(n - 2.0, l) + log_choose(i - 1.0, i - l) -
                  log_choose(n - 3.0 + i, i));
}

TheoryReport analyze(const NetworkParams& params, const SchedProbs& probs,
                     const FixedPointOptions& options) {
  params.validate();
  probs.validate();

  TheoryReport r;
  r.params = params;
  r.probs = probs;

  if (params.relay_buffer == 0) {
    r.mu_s = service_rate(probs, params.feedback, 1.0);
  } else if (params.feedback) {
    const auto fp = overflow_fixed_point(params, probs, options);
    r.mu_s = fp.mu_s;
    r.fixed_point_iterations = fp.iterations;
    r.fixed_point_residual = fp.residual;
  } else {
    r.mu_s = service_rate(probs, false, 0.0);
  }
  if (!(r.mu_s > 0.0)) throw ParameterError("source service rate is zero");

  const auto src = source_osd(params.lambda, r.mu_s, params.source_buffer);
  const auto rel = relay_osd(params.n, params.relay_buffer, src.pi[0], probs.psr);
  r.tau = src.tau;
  r.pi_s = src.pi;
  r.pi_r = rel.pi;
  r.pi_s0 = src.pi[0];
  r.pi_rBr = rel.pi.back();
  r.mean_source_len = mean_source_queue_seen(src.tau, params.source_buffer);
  r.mean_relay_len = mean_relay_queue_not_full(rel);
  r.throughput = throughput(r.pi_s0, r.pi_rBr, probs);
  r.delay = expected_delay(r.pi_rBr, r.mu_s, r.mean_source_len, r.mean_relay_len, probs, params.n);
  r.capacity = throughput_capacity(probs, params.n, params.relay_buffer);
  return r;
}

TheoryReport analyze(const NetworkParams& params, const MacProvider& mac,
                     const FixedPointOptions& options) {
  params.validate();
  return analyze(params, mac(params), options);
}

TheoryReport analyze(const NetworkParams& params, const FixedPointOptions& options) {
  return analyze(params, MacProvider{sched_probs}, options);
}

}  // namespace bufmanet
