#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fblcap/channel.hpp"
#include "fblcap/effcap.hpp"
#include "fblcap/errors.hpp"
#include "fblcap/experiment.hpp"
#include "fblcap/mcsim.hpp"
#include "fblcap/optim.hpp"
#include "fblcap/specfun.hpp"

namespace py = pybind11;
using namespace fblcap;

namespace {

void export_specfun(py::module_& m) {
  m.def("q_func", &q_func, py::arg("x"));
  m.def("q_inv", &q_inv, py::arg("p"));
  m.def("expint_v", &expint_v, py::arg("v"), py::arg("x"));
  m.def("avg_received_snr", &avg_received_snr, py::arg("n_t"), py::arg("gamma0"));
  m.def("db_to_linear", &db_to_linear, py::arg("db"));
}

void export_params(py::module_& m) {
  py::class_<SystemParams>(m, "SystemParams")
      .def(py::init([](double theta, int n, int n_t, int m_, double gamma0, double sigma2,
                       double eps) {
             SystemParams p{theta, n, n_t, m_, gamma0, sigma2, eps};
             p.validate();
             return p;
           }),
           py::arg("theta") = 0.01, py::arg("n") = 300, py::arg("n_t") = 20, py::arg("m") = 5,
           py::arg("gamma0") = 1.0, py::arg("sigma2") = 1.0, py::arg("eps") = 1e-5)
      .def_readwrite("theta", &SystemParams::theta)
      .def_readwrite("n", &SystemParams::n)
      .def_readwrite("n_t", &SystemParams::n_t)
      .def_readwrite("m", &SystemParams::m)
      .def_readwrite("gamma0", &SystemParams::gamma0)
      .def_readwrite("sigma2", &SystemParams::sigma2)
      .def_readwrite("eps", &SystemParams::eps)
      .def_property_readonly("n_d", &SystemParams::n_d)
      .def_property_readonly("theta_prime", &SystemParams::theta_prime)
      .def("validate", &SystemParams::validate)
      .def("__repr__", [](const SystemParams& p) {
        std::ostringstream os;
        os << "SystemParams(theta=" << p.theta << ", n=" << p.n << ", n_t=" << p.n_t
           << ", m=" << p.m << ", gamma0=" << p.gamma0 << ", eps=" << p.eps << ")";
        return os.str();
      });
}

void export_effcap(py::module_& m) {
  py::class_<EcValue>(m, "EcValue")
      .def_readonly("value", &EcValue::value)
      .def_readonly("ci_halfwidth", &EcValue::ci_halfwidth)
      .def_readonly("warning", &EcValue::warning)
      .def_property_readonly("method", [](const EcValue& v) { return std::string(to_string(v.method)); });

  m.def("ec_expint", &ec_expint, py::arg("params"));
  m.def("ec_lower_bound", &ec_lower_bound, py::arg("params"));
  m.def("ec_cap", &ec_cap, py::arg("theta"), py::arg("eps"));
  m.def("inner_t", &inner_t, py::arg("params"));
  m.def("gamma_surrogate", &gamma_surrogate, py::arg("m"), py::arg("gamma0"), py::arg("alpha"),
        py::arg("eps"), py::arg("theta"), py::arg("n"));
  m.def("gamma_dalpha", &gamma_dalpha, py::arg("m"), py::arg("gamma0"), py::arg("alpha"),
        py::arg("eps"), py::arg("theta"), py::arg("n"));
  m.def(
      "delay_violation",
      [](double theta, double mu, double d_max, double eta) {
        return delay_violation(theta, DelaySpec{mu, d_max, eta});
      },
      py::arg("theta"), py::arg("mu"), py::arg("d_max"), py::arg("eta") = 1.0);
}

void export_mcsim(py::module_& m) {
  py::class_<McEstimate>(m, "McEstimate")
      .def_readonly("value", &McEstimate::value)
      .def_readonly("stderr", &McEstimate::std_error)
      .def_readonly("samples_used", &McEstimate::samples_used);

  m.def(
      "ec_monte_carlo",
      [](const SystemParams& p, std::uint64_t samples, std::uint64_t seed, unsigned workers,
         bool literal_bernoulli, bool clamp_rate, bool importance) {
        McConfig cfg;
        cfg.samples = samples;
        cfg.seed = seed;
        cfg.workers = workers;
        cfg.mode = literal_bernoulli ? BernoulliMode::kSampled : BernoulliMode::kMarginalized;
        cfg.rate_policy = clamp_rate ? RatePolicy::kClampAtZero : RatePolicy::kUnclamped;
        cfg.sampler = importance ? FadingSampler::kImportance : FadingSampler::kDirect;
        py::gil_scoped_release release;
        return ec_monte_carlo(p, cfg);
      },
      py::arg("params"), py::arg("samples") = 1'000'000, py::arg("seed") = 1,
      py::arg("workers") = 0, py::arg("literal_bernoulli") = false, py::arg("clamp_rate") = false,
      py::arg("importance") = true);
}

void export_optim(py::module_& m) {
  py::class_<OptimResult>(m, "OptimResult")
      .def_readonly("n_t_star", &OptimResult::n_t_star)
      .def_readonly("eps_star", &OptimResult::eps_star)
      .def_readonly("ec_star", &OptimResult::ec_star)
      .def_readonly("ec_expint", &OptimResult::ec_expint)
      .def_readonly("iterations", &OptimResult::iterations)
      .def_readonly("boundary", &OptimResult::boundary)
      .def_property_readonly("trace", [](const OptimResult& r) {
        py::list out;
        for (const auto& t : r.trace)
          out.append(py::make_tuple(t.iteration, t.step == HalfStep::kPilot ? "n_t" : "eps",
                                    t.n_t, t.eps, t.objective));
        return out;
      });

  m.def(
      "optimal_alpha",
      [](int m_, double gamma0, double theta, int n, double eps) {
        const AlphaResult r = optimal_alpha({m_, gamma0, theta, n}, eps);
        return py::make_tuple(r.alpha_star, r.n_t_star);
      },
      py::arg("m"), py::arg("gamma0"), py::arg("theta"), py::arg("n"), py::arg("eps"));
  m.def(
      "optimal_eps",
      [](int m_, double gamma0, double theta, int n, int n_t) {
        return optimal_eps({m_, gamma0, theta, n}, n_t);
      },
      py::arg("m"), py::arg("gamma0"), py::arg("theta"), py::arg("n"), py::arg("n_t"));
  m.def(
      "alternate_optimize",
      [](int m_, double gamma0, double theta, int n, double eps_init, int max_iter) {
        OptimOptions opts;
        opts.eps_init = eps_init;
        opts.max_iter = max_iter;
        return alternate_optimize({m_, gamma0, theta, n}, opts);
      },
      py::arg("m"), py::arg("gamma0"), py::arg("theta") = 0.01, py::arg("n") = 300,
      py::arg("eps_init") = 1e-3, py::arg("max_iter") = 100);
}

void export_sweep(py::module_& m) {
  m.def(
      "sweep_csv",
      [](const std::string& param, const std::vector<double>& grid, const SystemParams& fixed,
         const std::string& methods, std::uint64_t samples, std::uint64_t seed, unsigned workers) {
        const auto field = parse_swept_field(param);
        if (!field) throw DomainError("unknown sweep parameter '" + param + "'");
        SweepSpec spec;
        spec.swept = *field;
        spec.grid = grid;
        spec.fixed = fixed;
        spec.methods = parse_methods(methods);
        spec.mc.samples = samples;
        spec.mc.seed = seed;
        std::ostringstream os;
        {
          py::gil_scoped_release release;
          write_sweep_csv(os, spec, run_sweep(spec, workers));
        }
        return os.str();
      },
      py::arg("param"), py::arg("grid"), py::arg("fixed"),
      py::arg("methods") = "expint,lower_bound", py::arg("samples") = 100'000,
      py::arg("seed") = 1, py::arg("workers") = 0);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Effective capacity of finite-blocklength transmission with imperfect CSI";
  m.attr("__version__") = std::string(version());

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  export_specfun(m);
  export_params(m);
  export_effcap(m);
  export_mcsim(m);
  export_optim(m);
  export_sweep(m);
}
