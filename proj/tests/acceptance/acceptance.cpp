// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
//
// Environment overrides (for quick local iterations only; ctest uses the
// defaults): BUFMANET_ACCEPT_SLOTS, BUFMANET_ACCEPT_REPS.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "bufmanet/analytic.hpp"
#include "bufmanet/harness.hpp"
#include "bufmanet/simulator.hpp"
#include "support/oracles.hpp"

using namespace bufmanet;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << " first failure: " << what << ";";
      pass = false;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::int64_t env_or(const char* name, std::int64_t fallback) {
  const char* v = std::getenv(name);
  return v ? std::atoll(v) : fallback;
}

NetworkParams reference(int bs, int br) {
  NetworkParams p;
  p.source_buffer = bs;
  p.relay_buffer = br;
  return p;
}

NetworkParams desk(double lambda, bool feedback) {
  NetworkParams p;
  p.n = 20;
  p.m = 4;
  p.source_buffer = 3;
  p.relay_buffer = 3;
  p.lambda = lambda;
  p.feedback = feedback;
  return p;
}

const std::vector<double> kDeskLambdas = {0.005, 0.01, 0.02, 0.04, 0.08, 0.15};

struct DeskRun {
  NetworkParams params;
  TheoryReport theory;
  SimReport sim;
};

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return 0.5 * d;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// 1 ------------------------------------------------------------------------
Verdict reference_numbers() {
  Verdict v;
  const auto t0 = Clock::now();
  struct Case {
    int bs, br;
    double expected;
  };
  for (auto c : {Case{1, 5, 0.0113}, Case{20, 5, 0.0120}, Case{5, 1, 0.0046}, Case{5, 20, 0.0332}}) {
    const double t = analyze(reference(c.bs, c.br)).throughput;
    v.detail << " T(Bs=" << c.bs << ",Br=" << c.br << ")=" << t;
    v.require(std::abs(t - c.expected) <= 0.0002, "T off by more than 0.0002");
  }
  const double secs = seconds_since(t0);
  v.detail << " in " << secs << " s";
  v.require(secs < 1.0, "slower than 1 s");
  return v;
}

// 2 ------------------------------------------------------------------------
Verdict oracle_equivalence() {
  Verdict v;
  const auto t0 = Clock::now();
  int combos = 0;
  double worst = 0.0;
  for (int n : {4, 6, 8, 10})
    for (int bs : {1, 2, 4, 6})
      for (int br : {1, 3, 6})
        for (auto [lambda, mu] : {std::pair{0.05, 0.3}, {0.3, 0.1}, {0.25, 0.25}, {0.6, 0.9},
                                  {0.9, 0.95}}) {
          const auto src = source_osd(lambda, mu, bs);
          const auto src_ref = oracle::stationary_oracle(oracle::source_chain(lambda, mu, bs));
          v.require(src_ref.irreducible && src_ref.aperiodic, "source chain not ergodic");
          for (std::size_t i = 0; i < src.pi.size(); ++i)
            worst = std::max(worst, std::abs(src.pi[i] - src_ref.pi[i]));

          const double psr = 0.4 * mu;
          const auto rel_law = relay_osd(n, br, src.pi[0], psr);
          const auto rel_ref = oracle::stationary_oracle(oracle::relay_chain(n, br, src.pi[0], psr));
          v.require(rel_ref.irreducible && rel_ref.aperiodic, "relay chain not ergodic");
          for (std::size_t i = 0; i < rel_law.pi.size(); ++i)
            worst = std::max(worst, std::abs(rel_law.pi[i] - rel_ref.pi[i]));
          ++combos;
        }
  const double secs = seconds_since(t0);
  v.detail << " " << combos << " combinations, max |diff| = " << worst << " in " << secs << " s";
  v.require(combos >= 200, "grid smaller than 200");
  v.require(worst < 1e-10, "entry differs by 1e-10 or more");
  v.require(secs < 10.0, "slower than 10 s");
  return v;
}

// 3 ------------------------------------------------------------------------
Verdict fixed_point() {
  Verdict v;
  std::vector<NetworkParams> grid;
  for (double lambda : kDeskLambdas) grid.push_back(desk(lambda, true));
  for (Mac mac : {Mac::LS, Mac::EC})
    for (auto [n, m] : {std::pair{20, 4}, {72, 6}})
      for (int bs : {1, 3, 5, 20})
        for (int br : {1, 3, 5, 20})
          for (double lambda : {0.001, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.9, 0.9999, 1.0}) {
            NetworkParams p;
            p.n = n;
            p.m = m;
            p.mac = mac;
            p.source_buffer = bs;
            p.relay_buffer = br;
            p.lambda = lambda;
            p.feedback = true;
            grid.push_back(p);
          }
  double worst_residual = 0.0;
  int worst_iterations = 0;
  for (const auto& p : grid) {
    try {
      const auto fp = overflow_fixed_point(p, sched_probs(p));
      worst_residual = std::max(worst_residual, fp.residual);
      worst_iterations = std::max(worst_iterations, fp.iterations);
      v.require(std::abs(overflow_map(p, sched_probs(p), fp.overflow) - fp.overflow) < 1e-6,
                "returned point fails the residual check");
    } catch (const ConvergenceError& e) {
      v.require(false, "no convergence");
    }
  }
  v.detail << " " << grid.size() << " feedback configs, max residual " << worst_residual
           << ", max iterations " << worst_iterations;
  v.require(worst_residual < 1e-6, "residual");
  v.require(worst_iterations <= 10000, "iterations");
  return v;
}

// 4 ------------------------------------------------------------------------
Verdict sim_vs_theory(const std::vector<DeskRun>& runs) {
  Verdict v;
  for (const auto& r : runs) {
    const double t_err = rel(r.sim.throughput, r.theory.throughput);
    const double d_err = rel(r.sim.mean_delay, r.theory.delay);
    const bool delay_ok = d_err <= 0.08 || std::abs(r.sim.mean_delay - r.theory.delay) <= r.sim.delay_ci;
    std::ostringstream tag;
    tag << to_string(r.params.mac) << "/" << to_string(r.params.mobility) << " lambda=" << r.params.lambda
        << " fb=" << r.params.feedback;
    v.detail << " [" << tag.str() << " dT=" << 100 * t_err << "% dD=" << 100 * d_err << "%]";
    v.require(t_err <= 0.05, tag.str() + " throughput");
    v.require(delay_ok, tag.str() + " delay");
  }
  return v;
}

// 5 ------------------------------------------------------------------------
Verdict properties(const std::vector<DeskRun>& runs) {
  Verdict v;
  std::vector<NetworkParams> bases;
  for (auto [n, m] : {std::pair{20, 4}, {72, 6}})
    for (Mac mac : {Mac::LS, Mac::EC})
      for (bool fb : {false, true}) {
        NetworkParams p;
        p.n = n;
        p.m = m;
        p.mac = mac;
        p.feedback = fb;
        bases.push_back(p);
      }
  const std::vector<double> lambdas = {1e-4, 0.001, 0.005, 0.01, 0.02, 0.05, 0.1,
                                       0.2,  0.4,   0.6,   0.8,  0.95, 0.9999, 1.0};
  int checks = 0;
  for (auto p : bases) {
    // throughput nondecreasing in lambda
    double last = 0.0;
    for (double l : lambdas) {
      p.lambda = l;
      const double t = analyze(p).throughput;
      v.require(t >= last - 1e-12, "monotone in lambda");
      last = t;
      ++checks;
    }
    for (double l : {0.01, 0.05, 0.2}) {
      p.lambda = l;
      last = 0.0;
      for (int bs = 1; bs <= 25; ++bs) {
        auto q = p;
        q.source_buffer = bs;
        const double t = analyze(q).throughput;
        v.require(t >= last - 1e-12, "monotone in Bs");
        last = t;
        ++checks;
      }
      last = 0.0;
      for (int br = 0; br <= 25; ++br) {
        auto q = p;
        q.relay_buffer = br;
        const double t = analyze(q).throughput;
        v.require(t >= last - 1e-12, "monotone in Br");
        last = t;
        ++checks;
      }
    }
    // feedback dominance
    if (!p.feedback)
      for (double l : lambdas)
        for (int br : {1, 5, 20}) {
          auto off = p;
          off.lambda = l;
          off.relay_buffer = br;
          auto on = off;
          on.feedback = true;
          v.require(analyze(on).throughput >= analyze(off).throughput - 1e-12, "feedback dominance");
          ++checks;
        }
    // capacity equality and the saturated limits
    for (int br : {1, 5, 20}) {
      auto q = p;
      q.relay_buffer = br;
      const double tc = analyze(q).capacity;
      for (bool fb : {false, true})
        for (int bs : {1, 5, 20}) {
          q.feedback = fb;
          q.source_buffer = bs;
          q.lambda = 0.05;
          v.require(analyze(q).capacity == tc, "capacity equality");
          q.lambda = 1.0 - 1e-4;
          const auto sat = analyze(q);
          v.require(std::abs(sat.throughput - tc) < 1e-3, "T near capacity at saturation");
          v.require(std::abs(sat.pi_rBr - (q.n - 2.0) / (q.n - 2.0 + br)) < 1e-3, "overflow limit");
          v.require(sat.pi_s0 < 1e-3, "empty-source limit");
          checks += 4;
        }
    }
  }
  // simulated feedback dominance, paired by seed
  int paired = 0;
  for (const auto& off : runs) {
    if (off.params.feedback || off.params.mac != Mac::LS || off.params.mobility != Mobility::IID) continue;
    for (const auto& on : runs) {
      if (!on.params.feedback || on.params.lambda != off.params.lambda || on.params.mac != Mac::LS)
        continue;
      std::vector<double> diff;
      for (std::size_t k = 0; k < on.sim.replications.size(); ++k)
        diff.push_back(on.sim.replications[k].throughput - off.sim.replications[k].throughput);
      double mean = 0.0;
      for (double d : diff) mean += d / static_cast<double>(diff.size());
      v.require(mean >= -ci_halfwidth(diff), "simulated feedback dominance");
      ++paired;
    }
  }
  v.detail << " " << checks << " analytic checks, " << paired << " paired simulation checks";
  return v;
}

// 6 ------------------------------------------------------------------------
// Loads are placed at a fraction of mu_s: the relay mean grows like
// (n - 2)(1 - pi_s0) / pi_s0, so close to mu_s a 500-packet relay is no
// longer a stand-in for an unbounded one.
Verdict limiting_forms() {
  Verdict v;
  double worst = 0.0;
  int compared = 0, saturated = 0;
  for (auto [n, m] : {std::pair{20, 4}, {72, 6}})
    for (Mac mac : {Mac::LS, Mac::EC})
      for (int bs : {1, 5, 500}) {
        NetworkParams p;
        p.n = n;
        p.m = m;
        p.mac = mac;
        p.source_buffer = bs;
        const auto probs = sched_probs(p);
        const double mu = probs.psd + probs.psr;
        for (double f : {0.05, 0.2, 0.5, 0.7, 0.8}) {
          p.lambda = f * mu;
          auto big = p;
          big.relay_buffer = 500;
          const auto finite = analyze(big);
          worst = std::max({worst, rel(limiting_throughput(p, probs, ThroughputLimit::BrInf), finite.throughput),
                            rel(limiting_delay(p, probs, DelayLimit::BrInf), finite.delay)});
          if (bs == 500) worst = std::max(worst, rel(limiting_delay(p, probs, DelayLimit::BothInfStable), finite.delay));
          v.require(std::isfinite(limiting_delay(p, probs, DelayLimit::BsInfStable)), "stable regime must be finite");
          ++compared;
        }
        for (double f : {1.0, 1.5, 3.0}) {
          p.lambda = std::min(1.0, f * mu);
          const double d = limiting_delay(p, probs, DelayLimit::BsInfSaturated);
          v.require(std::isinf(d) && d > 0, "saturated regime must be +inf");
          ++saturated;
        }
      }
  v.detail << " " << compared << " points against Br=500 (Bs=500 for the joint limit), max relative gap "
           << worst << "; " << saturated << " saturated cases reported +inf";
  v.require(worst < 1e-4, "limit mismatch");
  return v;
}

// 7 ------------------------------------------------------------------------
Verdict occupancy_laws(const std::vector<DeskRun>& runs) {
  Verdict v;
  double worst_s = 0.0, worst_r = 0.0, worst_z = 0.0;
  std::string worst_at;
  int cells = 0;
  for (const auto& r : runs) {
    if (r.params.mac != Mac::LS || r.params.mobility != Mobility::IID) continue;
    worst_s = std::max(worst_s, total_variation(r.sim.empirical_pi_s, r.theory.pi_s));
    worst_r = std::max(worst_r, total_variation(r.sim.empirical_pi_r, r.theory.pi_r));

    // sub-state law, standard error taken across replications
    const auto& reps = r.sim.replications;
    for (int i = 2; i <= r.params.relay_buffer; ++i)
      for (int l = 1; l <= i; ++l) {
        std::vector<double> share;
        for (const auto& rep : reps) {
          const auto& row = rep.substate[static_cast<std::size_t>(i)];
          std::uint64_t total = 0;
          for (auto c : row) total += c;
          if (total < 1000) continue;
          share.push_back(static_cast<double>(row[static_cast<std::size_t>(l)]) / static_cast<double>(total));
        }
        if (share.size() < 5) continue;
        double mean = 0.0;
        for (double s : share) mean += s / static_cast<double>(share.size());
        double ss = 0.0;
        for (double s : share) ss += (s - mean) * (s - mean);
        const double se = std::sqrt(ss / (static_cast<double>(share.size()) - 1.0) /
                                    static_cast<double>(share.size()));
        const double expected = relay_substate_dist(r.params.n, i, l);
        const double z = std::abs(mean - expected) / std::max(se, 1e-12);
        if (z > worst_z) {
          worst_z = z;
          std::ostringstream at;
          at << " (lambda=" << r.params.lambda << " fb=" << r.params.feedback << " i=" << i << " l=" << l
             << ": " << mean << " vs " << expected << ")";
          worst_at = at.str();
        }
        ++cells;
      }
  }
  v.detail << " max TV source " << worst_s << ", relay " << worst_r << "; sub-state cells " << cells
           << ", max |z| " << worst_z << worst_at;
  v.require(worst_s < 0.02, "source TV");
  v.require(worst_r < 0.02, "relay TV");
  v.require(cells > 0, "no sub-state cell had enough samples");
  v.require(worst_z <= 3.0, "sub-state outside 3 sigma");
  return v;
}

// 8 ------------------------------------------------------------------------
Verdict determinism(const std::vector<DeskRun>& runs) {
  Verdict v;
  SimOptions o;
  o.slots = 200'000;
  o.replications = 4;
  o.seed = 2024;
  for (bool fb : {false, true}) {
    auto p = desk(0.08, fb);
    o.threads = 1;
    const auto a = run(p, o);
    o.threads = 4;
    auto b = run(p, o);
    b.options.threads = a.options.threads;
    v.require(a == b, "reports differ for identical seeds");
    v.require(a.accounting.balanced(), "accounting identity");
  }
  std::size_t checked = 0;
  for (const auto& r : runs) {
    v.require(r.sim.accounting.balanced(), "accounting identity on an acceptance run");
    for (const auto& rep : r.sim.replications) {
      v.require(rep.accounting.balanced(), "accounting identity on a replication");
      ++checked;
    }
  }
  v.detail << " repeat runs bit-identical; identity held on " << checked << " replications";
  return v;
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  int failures = 0;
  const auto report = [&](int id, const char* name, const Verdict& v) {
    std::printf("[%s] %d %s:%s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.str().c_str());
    std::fflush(stdout);
    failures += !v.pass;
  };

  report(1, "reference-number reproduction", reference_numbers());
  report(2, "oracle equivalence", oracle_equivalence());
  report(3, "fixed point convergence", fixed_point());

  SimOptions opts;
  opts.slots = env_or("BUFMANET_ACCEPT_SLOTS", 2'000'000);
  opts.replications = static_cast<int>(env_or("BUFMANET_ACCEPT_REPS", 10));
  opts.seed = 20240601;

  std::vector<NetworkParams> scenarios;
  for (double lambda : kDeskLambdas)
    for (bool fb : {false, true}) scenarios.push_back(desk(lambda, fb));
  auto ec = desk(0.005, false);
  ec.mac = Mac::EC;
  scenarios.push_back(ec);
  auto rw = desk(0.02, false);
  rw.mobility = Mobility::RW;
  scenarios.push_back(rw);

  std::vector<DeskRun> runs;
  for (const auto& p : scenarios) runs.push_back({p, analyze(p), run(p, opts)});
  std::fprintf(stderr, "simulations finished after %.1f s\n", seconds_since(t0));

  report(4, "simulation versus theory", sim_vs_theory(runs));
  report(5, "property suites", properties(runs));
  report(6, "limiting forms", limiting_forms());
  report(7, "occupancy laws", occupancy_laws(runs));
  report(8, "determinism and conservation", determinism(runs));

  std::printf("%d of 8 criteria passed in %.1f s\n", 8 - failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
