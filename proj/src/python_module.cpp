// Python bindings. Arrays come back as numpy; errors raise stadloc.Error.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stadloc/bim.hpp"
#include "stadloc/eigensolver.hpp"
#include "stadloc/error.hpp"
#include "stadloc/fitting.hpp"
#include "stadloc/husimi.hpp"
#include "stadloc/localization.hpp"
#include "stadloc/pipeline.hpp"
#include "stadloc/spectral.hpp"
#include "stadloc/transport.hpp"

namespace py = pybind11;
using namespace stadloc;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

std::vector<double> from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return std::vector<double>(a.data(), a.data() + a.size());
}

py::array_t<double> grid_array(const HusimiGrid& g) {
  py::array_t<double> out({g.nq, g.np});
  std::copy(g.values.begin(), g.values.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(stadloc, m) {
  m.doc() = "Quantum localization measures for stadium billiard eigenstates";
  static py::exception<Error> error(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<StadiumShape>(m, "StadiumShape")
      .def(py::init<double>(), py::arg("epsilon"))
      .def_property_readonly("epsilon", &StadiumShape::epsilon)
      .def_property_readonly("perimeter", &StadiumShape::perimeter)
      .def_property_readonly("area", &StadiumShape::area)
      .def_property_readonly("quarter_length", &StadiumShape::quarter_length)
      .def_property_readonly("quarter_area", &StadiumShape::quarter_area)
      .def("contains", [](const StadiumShape& s, double x, double y) { return s.contains(Vec2(x, y)); });

  m.def(
      "bounce_map",
      [](const StadiumShape& shape, double s, double p) {
        const PhasePoint y = bounce_map(shape, {s, p});
        return py::make_tuple(y.s, y.p);
      },
      py::arg("shape"), py::arg("s"), py::arg("p"));

  // transport
  py::class_<DiffusionCurve>(m, "DiffusionCurve")
      .def_readonly("epsilon", &DiffusionCurve::epsilon)
      .def_readonly("n_particles", &DiffusionCurve::n_particles)
      .def_readonly("seed", &DiffusionCurve::seed)
      .def_property_readonly("n", [](const DiffusionCurve& c) { return py::array_t<std::size_t>(c.n.size(), c.n.data()); })
      .def_property_readonly("var_p", [](const DiffusionCurve& c) { return to_numpy(c.var_p); });
  py::class_<TransportEstimate>(m, "TransportEstimate")
      .def_readonly("epsilon", &TransportEstimate::epsilon)
      .def_property_readonly("criterion", [](const TransportEstimate& e) { return std::string(to_string(e.criterion)); })
      .def_readonly("N_T", &TransportEstimate::N_T)
      .def_readonly("fit_residual", &TransportEstimate::fit_residual);
  m.def("simulate_ensemble", &simulate_ensemble, py::arg("shape"), py::arg("n_particles"), py::arg("n_collisions"),
        py::arg("seed") = 1, py::arg("jobs") = 1, py::call_guard<py::gil_scoped_release>());
  m.def(
      "estimate_NT",
      [](const DiffusionCurve& c, const std::string& criterion) {
        return estimate_NT(c, transport_criterion_from_string(criterion));
      },
      py::arg("curve"), py::arg("criterion") = "expmodel");
  m.attr("SATURATED_VARIANCE") = kSaturatedVariance;

  // eigensolver
  py::class_<BoundaryFunction>(m, "BoundaryFunction")
      .def_readonly("k", &BoundaryFunction::k)
      .def_property_readonly("s", [](const BoundaryFunction& b) { return to_numpy(b.s); })
      .def_property_readonly("u", [](const BoundaryFunction& b) { return to_numpy(b.u); });
  py::class_<SolvedState>(m, "SolvedState")
      .def_readonly("k", &SolvedState::k)
      .def_readonly("tension", &SolvedState::tension)
      .def_readonly("boundary", &SolvedState::boundary);
  m.def(
      "solve_range",
      [](const StadiumShape& shape, double k_lo, double k_hi, bool levels_only, int jobs) {
        SolverOptions o;
        o.levels_only = levels_only;
        py::gil_scoped_release release;
        const WindowSolution sol = solve_range(shape, k_lo, k_hi, o, jobs);
        return std::make_pair(sol.spectrum.levels, sol.states);
      },
      py::arg("shape"), py::arg("k_lo"), py::arg("k_hi"), py::arg("levels_only") = false, py::arg("jobs") = 1,
      "Returns (levels, states).");
  m.def(
      "bim_levels",
      [](const StadiumShape& shape, double k_lo, double k_hi, int jobs) {
        py::gil_scoped_release release;
        return bim_levels(shape, k_lo, k_hi, {}, jobs).spectrum.levels;
      },
      py::arg("shape"), py::arg("k_lo"), py::arg("k_hi"), py::arg("jobs") = 1);
  m.def("weyl_count", &weyl_count, py::arg("shape"), py::arg("k"));
  m.def("mean_spacing", &mean_spacing, py::arg("shape"), py::arg("k"));

  // husimi and localization
  m.def(
      "husimi_grid",
      [](const StadiumShape& shape, const BoundaryFunction& bf, std::size_t nq, std::size_t np, double p_min,
         double p_max, int jobs) {
        HusimiOptions o;
        o.p_min = p_min;
        o.p_max = p_max;
        HusimiGrid g;
        {
          py::gil_scoped_release release;
          g = husimi_grid(shape, bf, nq, np, o, jobs);
        }
        return grid_array(g);
      },
      py::arg("shape"), py::arg("boundary"), py::arg("nq") = 400, py::arg("np") = 400, py::arg("p_min") = 0.0,
      py::arg("p_max") = 1.0, py::arg("jobs") = 1, "Normalized grid of shape (nq, np).");
  py::class_<LocalizationRecord>(m, "LocalizationRecord")
      .def_readonly("k", &LocalizationRecord::k)
      .def_readonly("A", &LocalizationRecord::A)
      .def_readonly("nIPR", &LocalizationRecord::nIPR)
      .def_readonly("I", &LocalizationRecord::I)
      .def_readonly("N", &LocalizationRecord::N);
  m.def(
      "entropy_measure",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& h, double k) {
        return entropy_measure(from_numpy(h), k);
      },
      py::arg("grid"), py::arg("k") = 0.0);
  m.def(
      "nipr", [](const py::array_t<double, py::array::c_style | py::array::forcecast>& h) { return nipr(from_numpy(h)); },
      py::arg("grid"));

  // spectral statistics
  m.def("brody_pdf", &brody_pdf, py::arg("S"), py::arg("beta"));
  m.def("brody_cdf", &brody_cdf, py::arg("S"), py::arg("beta"));
  py::class_<BrodyFit>(m, "BrodyFit")
      .def_readonly("beta", &BrodyFit::beta)
      .def_readonly("loglik", &BrodyFit::loglik)
      .def_readonly("n", &BrodyFit::n)
      .def_readonly("ci_lo", &BrodyFit::ci_lo)
      .def_readonly("ci_hi", &BrodyFit::ci_hi);
  m.def(
      "fit_brody",
      [](const std::vector<double>& spacings, std::size_t bootstrap, std::uint64_t seed, std::size_t min_spacings) {
        BrodyFitOptions o;
        o.bootstrap = bootstrap;
        o.seed = seed;
        o.min_spacings = min_spacings;
        return fit_brody(spacings, o);
      },
      py::arg("spacings"), py::arg("bootstrap") = 200, py::arg("seed") = 1, py::arg("min_spacings") = 500);
  m.def(
      "unfold",
      [](const StadiumShape& shape, const std::vector<double>& levels) {
        SpectrumWindow w;
        w.epsilon = shape.epsilon();
        w.levels = levels;
        return unfold(w).spacings;
      },
      py::arg("shape"), py::arg("levels"));

  // distribution fits
  py::class_<BetaFit>(m, "BetaFit")
      .def_readonly("a", &BetaFit::a)
      .def_readonly("b", &BetaFit::b)
      .def_readonly("A0", &BetaFit::A0)
      .def_readonly("C", &BetaFit::C)
      .def_readonly("loglik", &BetaFit::loglik)
      .def_readonly("ks_distance", &BetaFit::gof)
      .def_readonly("ks_pvalue", &BetaFit::ks_pvalue)
      .def_readonly("n", &BetaFit::n)
      .def("pdf", [](const BetaFit& f, double A) { return beta_pdf(A, f); })
      .def("moments", [](const BetaFit& f) {
        const BetaMoments mo = beta_moments(f);
        return py::make_tuple(mo.mean, mo.second, mo.sigma);
      });
  m.def("make_beta", &make_beta, py::arg("a"), py::arg("b"), py::arg("A0") = 0.7);
  m.def(
      "fit_beta",
      [](const std::vector<double>& samples, double A0, bool max_sample, std::size_t min_samples) {
        BetaFitOptions o;
        o.A0 = A0;
        o.a0_mode = max_sample ? A0Mode::MaxSample : A0Mode::Fixed;
        o.min_samples = min_samples;
        return fit_beta(samples, o);
      },
      py::arg("samples"), py::arg("A0") = 0.7, py::arg("max_sample_A0") = false, py::arg("min_samples") = 200);
  py::class_<RationalFit>(m, "RationalFit")
      .def_readonly("limit", &RationalFit::limit)
      .def_readonly("s", &RationalFit::s)
      .def_readonly("residual", &RationalFit::residual);
  m.def("rational_model", &rational_model, py::arg("alpha"), py::arg("limit"), py::arg("s"));
  m.def("fit_rational", &fit_rational, py::arg("points"));
  py::class_<SigmaCurveFit>(m, "SigmaCurveFit")
      .def_readonly("C", &SigmaCurveFit::C)
      .def_readonly("a", &SigmaCurveFit::a)
      .def_readonly("b", &SigmaCurveFit::b)
      .def_readonly("residual", &SigmaCurveFit::residual);
  m.def("fit_sigma_curve", &fit_sigma_curve, py::arg("points"));

  // pipeline
  m.def(
      "run_pipeline",
      [](const std::string& config_json, const std::vector<std::string>& stages, bool resume) {
        const RunConfig cfg = parse_config(json::parse(config_json));
        std::vector<Stage> todo;
        for (const auto& name : stages) {
          bool found = false;
          for (const Stage s : kAllStages) {
            if (to_string(s) == name) {
              todo.push_back(s);
              found = true;
            }
          }
          if (!found) throw Error(ErrorCode::ConfigError, "unknown stage " + name);
        }
        if (todo.empty()) todo.assign(std::begin(kAllStages), std::end(kAllStages));
        RunOptions o;
        o.resume = resume;
        {
          py::gil_scoped_release release;
          run_stages(cfg, todo, o);
        }
        return run_directory(cfg).string();
      },
      py::arg("config_json"), py::arg("stages") = std::vector<std::string>{}, py::arg("resume") = false,
      "Runs pipeline stages for a JSON config string; returns the run directory.");
}
