#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fragsim/density_solver.hpp"
#include "fragsim/dislocation.hpp"
#include "fragsim/frag_engine.hpp"
#include "fragsim/geometric.hpp"
#include "fragsim/invariant.hpp"
#include "fragsim/mass_partition.hpp"
#include "fragsim/renewal_limit.hpp"
#include "fragsim/spine_chain.hpp"
#include "fragsim/stats.hpp"

namespace py = pybind11;
using namespace fragsim;

namespace {

py::dict spine_to_dict(const SpineStep& s) {
  py::dict d;
  d["n"] = s.n;
  d["T"] = s.T;
  d["Z"] = s.Z;
  d["Y"] = s.Y;
  d["theta"] = s.Theta;
  d["delta"] = s.Delta;
  d["truncated"] = s.truncation_flag;
  return d;
}

FragmentationConfig make_config(const std::string& law, double alpha,
                                double dust, std::uint64_t seed) {
  FragmentationConfig cfg;
  cfg.law = DislocationLaw::parse(law);
  cfg.alpha = alpha;
  cfg.dust_threshold = dust;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Self-similar fragmentation simulation and analysis engine";
  m.attr("__version__") = FRAGSIM_BUILD_ID;

  // state space
  m.def("rearrange", &rearrange, py::arg("values"));
  m.def("l1_distance", &l1_distance);
  m.def("merge", &merge);
  m.def("scale", &scale);

  // dislocation laws
  py::class_<DislocationLaw>(m, "DislocationLaw")
      .def_static("parse", &DislocationLaw::parse)
      .def("spec_string", &DislocationLaw::spec_string)
      .def("sample",
           [](const DislocationLaw& law, std::uint64_t seed, std::uint64_t n) {
             Stream rng = Stream::from(seed, 0);
             std::vector<MassPartition> out;
             for (std::uint64_t i = 0; i < n; ++i)
               out.push_back(law.sample(rng));
             return out;
           },
           py::arg("seed"), py::arg("n") = 1)
      .def("is_geometric",
           [](const DislocationLaw& law) {
             const auto rep = law.is_geometric();
             py::dict d;
             d["status"] = rep.status == GeometricStatus::Geometric
                               ? "geometric"
                               : rep.status == GeometricStatus::NonGeometric
                                     ? "non-geometric"
                                     : "unknown";
             d["ratio"] = rep.ratio;
             return d;
           })
      .def("integral_s1_power",
           [](const DislocationLaw& law, double q, long n_mc,
              std::uint64_t seed) {
             const auto est = law.integral_s1_power(q, n_mc, seed);
             py::dict d;
             d["value"] = est.value;
             d["lo"] = est.lo;
             d["hi"] = est.hi;
             d["exact"] = est.exact;
             d["divergence_suspected"] = est.divergence_suspected;
             return d;
           },
           py::arg("q"), py::arg("n_mc") = 100000, py::arg("seed") = 0);

  // simulation
  m.def(
      "simulate",
      [](const std::string& law, double alpha, double dust, std::uint64_t seed,
         std::uint64_t replica, bool spine) {
        auto cfg = make_config(law, alpha, dust, seed);
        SummaryOptions opt;
        opt.want_spine = spine;
        auto run = simulate_summary(cfg, replica, opt);
        py::dict d;
        d["zeta"] = run.zeta;
        d["zeta_error_bound"] = run.zeta_error_bound;
        d["blocks"] = run.blocks;
        py::list steps;
        for (const auto& s : run.spine) steps.append(spine_to_dict(s));
        d["spine"] = steps;
        return d;
      },
      py::arg("law") = "binary-uniform", py::arg("alpha") = -1.0,
      py::arg("dust") = 1e-6, py::arg("seed") = 0, py::arg("replica") = 0,
      py::arg("spine") = true);

  m.def(
      "rescaled_prelimit",
      [](const std::string& law, double alpha, double dust, std::uint64_t seed,
         std::uint64_t replica, double eps, const std::vector<double>& times) {
        auto cfg = make_config(law, alpha, dust, seed);
        auto pre = rescaled_prelimit(cfg, replica, eps, times);
        py::dict d;
        d["zeta"] = pre.zeta;
        d["times"] = pre.query_times;
        d["states"] = pre.states;
        d["spine_values"] = pre.spine_values;
        return d;
      },
      py::arg("law"), py::arg("alpha"), py::arg("dust"), py::arg("seed"),
      py::arg("replica"), py::arg("eps"), py::arg("times"));

  // densities and the chain
  py::class_<DensityResult>(m, "DensityResult")
      .def_property_readonly(
          "x", [](const DensityResult& d) {
            std::vector<double> xs;
            for (int j = 0; j <= d.f.n_points; ++j) xs.push_back(d.f.x(j));
            return xs;
          })
      .def_property_readonly(
          "f", [](const DensityResult& d) { return d.f.values; })
      .def_property_readonly(
          "F", [](const DensityResult& d) { return d.F.values; })
      .def_readonly("iterations", &DensityResult::iterations)
      .def_readonly("residual", &DensityResult::residual);

  m.def(
      "solve_extinction_density",
      [](const std::string& law, double alpha, double x_max, int n_points,
         double tol, int max_iter, int n_quad) {
        SolverOptions opt;
        opt.grid = {x_max, n_points};
        opt.tol = tol;
        opt.max_iter = max_iter;
        opt.n_quad = n_quad;
        return solve_extinction_density(DislocationLaw::parse(law), alpha, opt);
      },
      py::arg("law") = "binary-uniform", py::arg("alpha") = -1.0,
      py::arg("x_max") = 12.0, py::arg("n_points") = 2048,
      py::arg("tol") = 1e-9, py::arg("max_iter") = 600,
      py::arg("n_quad") = 512);

  m.def("transition_density", &transition_density, py::arg("x"), py::arg("y"),
        py::arg("densities"));

  m.def(
      "solve_stationary",
      [](const DensityResult& d, double tol, int max_iter) {
        auto res = solve_stationary(d, tol, max_iter);
        py::dict out;
        out["pi"] = res.pi.values;
        out["iterations"] = res.iterations;
        out["residual"] = res.residual;
        return out;
      },
      py::arg("densities"), py::arg("tol") = 1e-9, py::arg("max_iter") = 600);

  py::class_<TransitionKernel>(m, "TransitionKernel")
      .def(py::init<const DensityResult&>(), py::keep_alive<1, 2>())
      .def("step",
           [](const TransitionKernel& k, double z, std::uint64_t seed) {
             Stream rng = Stream::from(seed, 1);
             auto s = k.step(z, rng);
             py::dict d;
             d["z"] = s.z;
             d["y"] = s.y;
             d["theta"] = s.theta;
             d["delta"] = s.delta;
             return d;
           })
      .def("kernel_cdf", &TransitionKernel::kernel_cdf)
      .def("run_chain",
           [](const TransitionKernel& k, double z0, int n_steps,
              std::uint64_t seed) {
             Stream rng = Stream::from(seed, 2);
             py::list out;
             for (const auto& s : run_chain(z0, n_steps, k, rng))
               out.append(spine_to_dict(s));
             return out;
           });

  // statistics
  m.def("ks_two_sample", [](std::vector<double> a, std::vector<double> b) {
    auto rep = ks_two_sample(std::move(a), std::move(b));
    py::dict d;
    d["ks"] = rep.ks;
    d["band"] = rep.band;
    d["n_a"] = rep.n_a;
    d["n_b"] = rep.n_b;
    return d;
  });
  m.def("tv_histogram", &tv_histogram);

  // geometric case
  m.def(
      "kary_extinction",
      [](int k, double alpha, double dust, std::uint64_t seed,
         std::uint64_t replica) {
        KaryConfig cfg{k, alpha, dust, seed};
        auto run = kary_extinction(cfg, replica);
        py::dict d;
        d["zeta"] = run.zeta;
        d["T"] = run.T;
        return d;
      },
      py::arg("k") = 2, py::arg("alpha") = -1.0, py::arg("dust") = 1e-12,
      py::arg("seed") = 0, py::arg("replica") = 0);
}
