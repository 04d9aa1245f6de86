#include <cmath>
#include <vector>

#include "bufmanet/analytic.hpp"
#include "doctest.h"

using namespace bufmanet;

namespace {

std::vector<NetworkParams> scenarios() {
  std::vector<NetworkParams> out;
  for (auto [n, m] : {std::pair{20, 4}, {72, 6}, {50, 5}})
    for (Mac mac : {Mac::LS, Mac::EC})
      for (bool fb : {false, true}) {
        NetworkParams p;
        p.n = n;
        p.m = m;
        p.mac = mac;
        p.feedback = fb;
        p.source_buffer = 3;
        p.relay_buffer = 4;
        out.push_back(p);
      }
  return out;
}

const std::vector<double> kLambdas = {0.001, 0.005, 0.01, 0.02, 0.05, 0.08, 0.1, 0.15,
                                      0.2,   0.3,   0.5,  0.7,  0.9,  0.99, 1.0};

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("throughput is nondecreasing in lambda") {
  for (auto p : scenarios()) {
    double last = 0.0;
    for (double lambda : kLambdas) {
      p.lambda = lambda;
      const double t = analyze(p).throughput;
      CHECK(t >= last - 1e-12);
      last = t;
    }
  }
}

TEST_CASE("throughput is nondecreasing in both buffer sizes") {
  for (auto p : scenarios())
    for (double lambda : {0.01, 0.05, 0.2}) {
      p.lambda = lambda;
      double last = 0.0;
      for (int bs = 1; bs <= 20; ++bs) {
        p.source_buffer = bs;
        const double t = analyze(p).throughput;
        CHECK(t >= last - 1e-12);
        last = t;
      }
      p.source_buffer = 4;
      last = 0.0;
      for (int br = 0; br <= 20; ++br) {
        p.relay_buffer = br;
        const double t = analyze(p).throughput;
        CHECK(t >= last - 1e-12);
        last = t;
      }
      p.relay_buffer = 4;
    }
}

TEST_CASE("feedback never lowers throughput") {
  for (auto p : scenarios()) {
    if (p.feedback) continue;
    for (double lambda : kLambdas)
      for (int br : {1, 3, 8}) {
        p.lambda = lambda;
        p.relay_buffer = br;
        auto q = p;
        q.feedback = true;
        CHECK(analyze(q).throughput >= analyze(p).throughput - 1e-12);
      }
  }
}

TEST_CASE("capacity does not depend on feedback or the source buffer") {
  for (auto p : scenarios()) {
    const double ref = analyze(p).capacity;
    for (bool fb : {false, true})
      for (int bs : {1, 5, 20}) {
        auto q = p;
        q.feedback = fb;
        q.source_buffer = bs;
        CHECK(analyze(q).capacity == ref);
      }
  }
}

TEST_CASE("saturated sources reach capacity") {
  for (auto p : scenarios())
    for (int bs : {1, 5, 20})
      for (int br : {1, 5, 10}) {
        p.lambda = 1.0 - 1e-4;
        p.source_buffer = bs;
        p.relay_buffer = br;
        const auto r = analyze(p);
        CHECK(std::abs(r.throughput - r.capacity) < 1e-3);
        CHECK(std::abs(r.pi_rBr - (p.n - 2.0) / (p.n - 2.0 + br)) < 1e-3);
        CHECK(r.pi_s0 < 1e-3);
      }
}

TEST_CASE("fixed point residual holds across the validation grid") {
  for (auto p : scenarios()) {
    if (!p.feedback) continue;
    for (double lambda : kLambdas)
      for (int bs : {1, 3, 10})
        for (int br : {1, 3, 10}) {
          p.lambda = lambda;
          p.source_buffer = bs;
          p.relay_buffer = br;
          const auto fp = overflow_fixed_point(p, sched_probs(p));
          CHECK(fp.residual < 1e-6);
          CHECK(fp.iterations <= 10000);
          CHECK(fp.overflow >= 0.0);
          CHECK(fp.overflow <= 1.0);
        }
  }
}

TEST_CASE("occupancy laws are normalized") {
  for (auto p : scenarios())
    for (double lambda : kLambdas) {
      p.lambda = lambda;
      const auto r = analyze(p);
      for (const auto* pi : {&r.pi_s, &r.pi_r}) {
        double total = 0.0;
        for (double v : *pi) {
          CHECK(v >= 0.0);
          CHECK(v <= 1.0);
          total += v;
        }
        CHECK(std::abs(total - 1.0) < 1e-12);
      }
    }
}

}  // TEST_SUITE
