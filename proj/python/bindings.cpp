#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nonsimple/analysis.hpp"
#include "nonsimple/app.hpp"
#include "nonsimple/errors.hpp"

namespace py = pybind11;
using namespace nonsimple;

namespace {

using Array3 = py::array_t<double, py::array::c_style | py::array::forcecast>;

SymThirdTensor to_G(const Array3& a) {
    if (a.ndim() != 3 || a.shape(0) != 3 || a.shape(1) != 2 || a.shape(2) != 2)
        throw std::invalid_argument("G must have shape (3, 2, 2)");
    const auto r = a.unchecked<3>();
    SymThirdTensor G;
    for (int i = 0; i < 3; ++i) {
        G.at(i, 0, 0) = r(i, 0, 0);
        G.at(i, 1, 1) = r(i, 1, 1);
        G.at(i, 0, 1) = 0.5 * (r(i, 0, 1) + r(i, 1, 0));
    }
    return G;
}

py::array_t<double> from_G(const SymThirdTensor& G) {
    py::array_t<double> out({3, 2, 2});
    auto w = out.mutable_unchecked<3>();
    for (int i = 0; i < 3; ++i)
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                w(i, a, b) = G(i, a, b);
    return out;
}

py::dict breakdown(const EnergyBreakdown& e) {
    py::dict d;
    d["membrane"] = e.membrane;
    d["bending"] = e.bending;
    d["barrier"] = e.barrier;
    d["total"] = e.total;
    return d;
}

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    return RunConfig::from_json(nlohmann::json::parse(text), base_dir);
}

} // namespace

PYBIND11_MODULE(_nonsimple, m) {
    m.doc() = "Second-gradient elastic surfaces on a structured grid";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InfeasibleStart>(m, "InfeasibleStart", PyExc_ValueError);
    py::register_exception<DegenerateMetric>(m, "DegenerateMetric", PyExc_ArithmeticError);
    py::register_exception<Inapplicable>(m, "Inapplicable", PyExc_RuntimeError);
    py::register_exception<BisectionFailure>(m, "BisectionFailure", PyExc_RuntimeError);

    py::class_<MaterialParams>(m, "MaterialParams")
        .def(py::init<>())
        .def_readwrite("alpha", &MaterialParams::alpha)
        .def_readwrite("beta", &MaterialParams::beta)
        .def_readwrite("c_b", &MaterialParams::c_b)
        .def_readwrite("p", &MaterialParams::p)
        .def_readwrite("c_J", &MaterialParams::c_J)
        .def_readwrite("q", &MaterialParams::q)
        .def_readwrite("split_mode", &MaterialParams::split_mode)
        .def_readwrite("c_K", &MaterialParams::c_K)
        .def_readwrite("c_Gamma", &MaterialParams::c_Gamma)
        .def("validate", &MaterialParams::validate)
        .def("growth_condition", &MaterialParams::growth_condition)
        .def("growth_threshold", &MaterialParams::growth_threshold)
        .def("noncoercivity_warning", [](const MaterialParams& p) { return noncoercivity_warning(p); });

    m.def(
        "kinematic_state",
        [](const Array3& G, const Tensor32& F) {
            const KinematicState s = kinematic_state(to_G(G), F);
            py::dict d;
            d["C"] = s.C;
            d["J"] = s.J;
            d["n"] = s.n;
            d["K"] = s.K;
            d["minors"] = std::vector<double>(s.minors.begin(), s.minors.end());
            d["kappa"] = s.kappa;
            return d;
        },
        py::arg("G"), py::arg("F"));

    m.def(
        "psi",
        [](const Array3& G, const Tensor32& F, const MaterialParams& p) {
            return breakdown(psi(to_G(G), F, p));
        },
        py::arg("G"), py::arg("F"), py::arg("params") = MaterialParams{});

    m.def(
        "psi_grad",
        [](const Array3& G, const Tensor32& F, const MaterialParams& p) {
            const PsiGradient g = psi_grad(to_G(G), F, p);
            return py::make_tuple(from_G(g.Psi_G), g.Psi_F);
        },
        py::arg("G"), py::arg("F"), py::arg("params") = MaterialParams{});

    m.def("cone_integral", &cone_integral, py::arg("t"), py::arg("M"), py::arg("alpha"),
          py::arg("q"), py::arg("delta"));
    m.def("invert_cone_integral", &invert_cone_integral, py::arg("target"), py::arg("M"),
          py::arg("alpha"), py::arg("q"), py::arg("delta"));

    m.def(
        "check",
        [](const std::string& config, const std::string& base_dir, bool allow_noncoercive,
           std::uint64_t seed) {
            const CheckOutcome c = cmd_check(parse_config(config, base_dir), allow_noncoercive, seed);
            return py::make_tuple(c.exit_code, c.report.dump());
        },
        py::arg("config"), py::arg("base_dir") = "", py::arg("allow_noncoercive") = false,
        py::arg("seed") = 1);

    m.def(
        "solve",
        [](const std::string& config, const std::string& base_dir) {
            const RunConfig cfg = parse_config(config, base_dir);
            const Problem problem = cfg.make_problem();
            MinimizeResult r;
            RunArtifacts art;
            {
                py::gil_scoped_release release;
                r = minimize(default_start(problem, cfg.solver), problem, cfg.solver);
                art = analyze(r, problem, cfg.solver);
            }
            py::dict d;
            d["field"] = r.field;
            d["energy"] = r.energy.energy;
            d["internal"] = breakdown(r.energy.internal);
            d["load_work"] = r.energy.load_work;
            d["grad_norm"] = r.grad_norm;
            d["min_J"] = r.min_J;
            d["iterations"] = r.iterations;
            d["converged"] = r.converged;
            d["max_normalized_residual"] = art.residual.max_normalized;
            d["residual_threshold"] = art.residual_threshold;
            d["eta"] = art.eta.dump();
            return d;
        },
        py::arg("config"), py::arg("base_dir") = "");

    m.def(
        "run",
        [](const std::string& config, const std::string& base_dir, const std::string& out_dir,
           bool allow_noncoercive) {
            RunOptions opt;
            opt.out_dir = out_dir;
            opt.allow_noncoercive = allow_noncoercive;
            std::ostringstream log;
            int code;
            {
                py::gil_scoped_release release;
                code = cmd_run(parse_config(config, base_dir), opt, log);
            }
            return py::make_tuple(code, log.str());
        },
        py::arg("config"), py::arg("base_dir"), py::arg("out_dir"),
        py::arg("allow_noncoercive") = false);
}
