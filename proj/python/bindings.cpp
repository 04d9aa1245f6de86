#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include <sstream>

#include "bufmanet/analytic.hpp"
#include "bufmanet/harness.hpp"
#include "bufmanet/simulator.hpp"

namespace py = pybind11;
using namespace bufmanet;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Buffer-limited two-hop relay MANET model and simulator";

  static py::exception<ConvergenceError> convergence_error(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConvergenceError& e) {
      py::object err = py::reinterpret_borrow<py::object>(convergence_error.ptr())(e.what());
      err.attr("residual") = e.residual();
      err.attr("iterations") = e.iterations();
      PyErr_SetObject(convergence_error.ptr(), err.ptr());
    }
  });

  py::enum_<Mac>(m, "Mac").value("LS", Mac::LS).value("EC", Mac::EC);
  py::enum_<Mobility>(m, "Mobility").value("IID", Mobility::IID).value("RW", Mobility::RW);
  py::enum_<ThroughputLimit>(m, "ThroughputLimit")
      .value("BsInf", ThroughputLimit::BsInf)
      .value("BrInf", ThroughputLimit::BrInf)
      .value("BothInf", ThroughputLimit::BothInf);
  py::enum_<DelayLimit>(m, "DelayLimit")
      .value("BsInfSaturated", DelayLimit::BsInfSaturated)
      .value("BsInfStable", DelayLimit::BsInfStable)
      .value("BrInf", DelayLimit::BrInf)
      .value("BothInfStable", DelayLimit::BothInfStable);

  py::class_<NetworkParams>(m, "NetworkParams")
      .def(py::init<>())
      .def(py::init([](int n, int m_, int bs, int br, double lambda, bool feedback, Mac mac, int nu,
                       double delta, Mobility mobility) {
             NetworkParams p{n, m_, bs, br, lambda, feedback, mac, nu, delta, mobility};
             p.validate();
             return p;
           }),
           py::kw_only(), py::arg("n") = 72, py::arg("m") = 6, py::arg("Bs") = 5, py::arg("Br") = 5,
           py::arg("lambda_s") = 0.05, py::arg("feedback") = false, py::arg("mac") = Mac::LS,
           py::arg("nu") = 1, py::arg("delta") = 1.0, py::arg("mobility") = Mobility::IID)
      .def_readwrite("n", &NetworkParams::n)
      .def_readwrite("m", &NetworkParams::m)
      .def_readwrite("Bs", &NetworkParams::source_buffer)
      .def_readwrite("Br", &NetworkParams::relay_buffer)
      .def_readwrite("lambda_s", &NetworkParams::lambda)
      .def_readwrite("feedback", &NetworkParams::feedback)
      .def_readwrite("mac", &NetworkParams::mac)
      .def_readwrite("nu", &NetworkParams::nu)
      .def_readwrite("delta", &NetworkParams::delta)
      .def_readwrite("mobility", &NetworkParams::mobility)
      .def("validate", &NetworkParams::validate)
      .def(py::self == py::self)
      .def("__repr__", [](const NetworkParams& p) {
        return "NetworkParams(n=" + std::to_string(p.n) + ", m=" + std::to_string(p.m) +
               ", Bs=" + std::to_string(p.source_buffer) + ", Br=" + std::to_string(p.relay_buffer) +
               ", lambda_s=" + std::to_string(p.lambda) + ", feedback=" + (p.feedback ? "True" : "False") +
               ", mac=" + std::string(to_string(p.mac)) + ")";
      });

  py::class_<SchedProbs>(m, "SchedProbs")
      .def(py::init<>())
      .def_readwrite("psd", &SchedProbs::psd)
      .def_readwrite("psr", &SchedProbs::psr)
      .def_readwrite("prd", &SchedProbs::prd)
      .def(py::self == py::self);

  py::class_<EcGeometry>(m, "EcGeometry")
      .def_readonly("epsilon", &EcGeometry::epsilon)
      .def_readonly("gamma", &EcGeometry::gamma);

  py::class_<FixedPointOptions>(m, "FixedPointOptions")
      .def(py::init([](double tolerance, int max_iterations) { return FixedPointOptions{tolerance, max_iterations}; }),
           py::arg("tolerance") = 1e-12, py::arg("max_iterations") = 10000)
      .def_readwrite("tolerance", &FixedPointOptions::tolerance)
      .def_readwrite("max_iterations", &FixedPointOptions::max_iterations);

  py::class_<FixedPointResult>(m, "FixedPointResult")
      .def_readonly("overflow", &FixedPointResult::overflow)
      .def_readonly("mu_s", &FixedPointResult::mu_s)
      .def_readonly("residual", &FixedPointResult::residual)
      .def_readonly("iterations", &FixedPointResult::iterations)
      .def_readonly("damped", &FixedPointResult::damped);

  py::class_<SourceOSD>(m, "SourceOSD")
      .def_readonly("pi", &SourceOSD::pi)
      .def_readonly("mu", &SourceOSD::mu)
      .def_readonly("tau", &SourceOSD::tau);
  py::class_<RelayOSD>(m, "RelayOSD").def_readonly("pi", &RelayOSD::pi);

  py::class_<TheoryReport>(m, "TheoryReport")
      .def_readonly("params", &TheoryReport::params)
      .def_readonly("probs", &TheoryReport::probs)
      .def_readonly("throughput", &TheoryReport::throughput)
      .def_readonly("delay", &TheoryReport::delay)
      .def_readonly("capacity", &TheoryReport::capacity)
      .def_readonly("mean_source_len", &TheoryReport::mean_source_len)
      .def_readonly("mean_relay_len", &TheoryReport::mean_relay_len)
      .def_readonly("pi_s0", &TheoryReport::pi_s0)
      .def_readonly("pi_rBr", &TheoryReport::pi_rBr)
      .def_readonly("mu_s", &TheoryReport::mu_s)
      .def_readonly("tau", &TheoryReport::tau)
      .def_readonly("pi_s", &TheoryReport::pi_s)
      .def_readonly("pi_r", &TheoryReport::pi_r)
      .def_readonly("fixed_point_iterations", &TheoryReport::fixed_point_iterations)
      .def_readonly("fixed_point_residual", &TheoryReport::fixed_point_residual);

  py::class_<SimOptions>(m, "SimOptions")
      .def(py::init([](std::int64_t slots, double warmup, std::uint64_t seed, int reps, int threads, bool derange) {
             SimOptions o{slots, warmup, seed, reps, threads, derange};
             o.validate();
             return o;
           }),
           py::kw_only(), py::arg("slots") = 2'000'000, py::arg("warmup_fraction") = 0.2,
           py::arg("seed") = 1, py::arg("replications") = 10, py::arg("threads") = 0,
           py::arg("random_derangement") = false)
      .def_readwrite("slots", &SimOptions::slots)
      .def_readwrite("warmup_fraction", &SimOptions::warmup_fraction)
      .def_readwrite("seed", &SimOptions::seed)
      .def_readwrite("replications", &SimOptions::replications)
      .def_readwrite("threads", &SimOptions::threads)
      .def_readwrite("random_derangement", &SimOptions::random_derangement);

  py::class_<Accounting>(m, "Accounting")
      .def_readonly("generated", &Accounting::generated)
      .def_readonly("delivered", &Accounting::delivered)
      .def_readonly("dropped_source", &Accounting::dropped_source)
      .def_readonly("dropped_relay", &Accounting::dropped_relay)
      .def_readonly("in_flight", &Accounting::in_flight)
      .def("balanced", &Accounting::balanced);

  py::class_<ReplicationResult>(m, "ReplicationResult")
      .def_readonly("id", &ReplicationResult::id)
      .def_readonly("seed", &ReplicationResult::seed)
      .def_readonly("accounting", &ReplicationResult::accounting)
      .def_readonly("throughput", &ReplicationResult::throughput)
      .def_readonly("mean_delay", &ReplicationResult::mean_delay)
      .def_readonly("empirical_pi_s", &ReplicationResult::empirical_pi_s)
      .def_readonly("empirical_pi_r", &ReplicationResult::empirical_pi_r)
      .def_readonly("opportunities", &ReplicationResult::opportunities);

  py::class_<SimReport>(m, "SimReport")
      .def_readonly("params", &SimReport::params)
      .def_readonly("options", &SimReport::options)
      .def_readonly("slots_run", &SimReport::slots_run)
      .def_readonly("warmup_slots", &SimReport::warmup_slots)
      .def_readonly("replications", &SimReport::replications)
      .def_readonly("accounting", &SimReport::accounting)
      .def_readonly("flow_throughput", &SimReport::flow_throughput)
      .def_readonly("throughput", &SimReport::throughput)
      .def_readonly("throughput_ci", &SimReport::throughput_ci)
      .def_readonly("mean_delay", &SimReport::mean_delay)
      .def_readonly("delay_ci", &SimReport::delay_ci)
      .def_readonly("empirical_pi_s", &SimReport::empirical_pi_s)
      .def_readonly("empirical_pi_r", &SimReport::empirical_pi_r)
      .def_readonly("opportunities", &SimReport::opportunities)
      .def_readonly("opportunities_ci", &SimReport::opportunities_ci)
      .def("to_json", [](const SimReport& r) { return simulation_json(r); });

  m.def("sched_probs", &sched_probs, py::arg("params"));
  m.def("ls_mac_probs", &ls_mac_probs, py::arg("n"), py::arg("m"));
  m.def("ec_mac_probs",
        [](int n, int m_, int nu, double delta) {
          const auto r = ec_mac_probs(n, m_, nu, delta);
          return py::make_tuple(r.probs, r.geometry);
        },
        py::arg("n"), py::arg("m"), py::arg("nu") = 1, py::arg("delta") = 1.0);
  m.def("source_osd", &source_osd, py::arg("lambda_s"), py::arg("mu"), py::arg("Bs"));
  m.def("relay_osd", &relay_osd, py::arg("n"), py::arg("Br"), py::arg("pi_s0"), py::arg("psr"));
  m.def("relay_substate_dist", &relay_substate_dist, py::arg("n"), py::arg("i"), py::arg("l"));
  m.def("overflow_fixed_point", &overflow_fixed_point, py::arg("params"), py::arg("probs"),
        py::arg("options") = FixedPointOptions{});
  m.def("throughput_capacity", &throughput_capacity, py::arg("probs"), py::arg("n"), py::arg("Br"));
  m.def("limiting_throughput", &limiting_throughput, py::arg("params"), py::arg("probs"), py::arg("regime"));
  m.def("limiting_delay", &limiting_delay, py::arg("params"), py::arg("probs"), py::arg("regime"));
  m.def("analyze", py::overload_cast<const NetworkParams&, const FixedPointOptions&>(&analyze),
        py::arg("params"), py::arg("options") = FixedPointOptions{});
  m.def("theory_json", &theory_json, py::arg("report"));
  m.def("simulate", &run, py::arg("params"), py::arg("options") = SimOptions{},
        py::call_guard<py::gil_scoped_release>());
  m.def("cli", [](const std::vector<std::string>& args) {
    std::vector<const char*> argv{"bufmanet"};
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Run the command-line tool in-process; returns (exit code, stdout, stderr).");
}
