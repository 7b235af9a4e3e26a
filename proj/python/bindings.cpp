#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <yosida/commands.hpp>
#include <yosida/parallel.hpp>

namespace py = pybind11;
using namespace yosida;

namespace {

py::object json_to_py(const nlohmann::ordered_json& j) {
    return py::module_::import("json").attr("loads")(j.dump());
}

YosidaParams params(double lambda, double alpha) {
    YosidaParams p;
    p.lambda = lambda;
    p.alpha = alpha;
    return p;
}

int threads_or_default(int t) { return t > 0 ? t : default_threads(); }

// Operator on a grid, built from the same fields as a run config
struct PyOperator {
    MultiValuedOperator op;

    PyOperator(const std::string& kind, const std::string& graph, double p, double alpha, int d, int n) {
        OperatorKind k = operator_kind_from_string(kind);
        GelfandTriple t = k == OperatorKind::PorousMedia ? GelfandTriple::porous_media(p, alpha)
                                                         : GelfandTriple::phi_laplace(p, alpha);
        op = MultiValuedOperator(k, parse_graph(graph), t, Grid(d, n));
    }

    Field field(const Vec& x) const {
        if (x.size() != op.grid().size())
            throw InvalidArgument("expected " + std::to_string(op.grid().size()) + " nodal values");
        return Field(op.grid(), x);
    }
};

}  // namespace

PYBIND11_MODULE(_yosida, m) {
    m.doc() = "Generalized Yosida approximation: resolvents, regularized SPDE runs, extinction statistics";

    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

    py::class_<ScalarGraph>(m, "Graph")
        .def(py::init(&parse_graph), py::arg("spec"))
        .def("eval",
             [](const ScalarGraph& g, double s) {
                 Interval I = g.eval(s);
                 return py::make_tuple(I.lo, I.hi);
             })
        .def("minimal_section", &ScalarGraph::minimal_section)
        .def_property_readonly("spec", &ScalarGraph::spec)
        .def_property_readonly("delta", &ScalarGraph::delta)
        .def("__repr__", [](const ScalarGraph& g) { return "Graph('" + g.spec() + "')"; });

    m.def("duality", &scalar_duality, py::arg("r"), py::arg("alpha"));
    m.def(
        "resolvent",
        [](const ScalarGraph& g, double s, double lambda, double alpha) {
            return scalar_resolvent(g, s, params(lambda, alpha));
        },
        py::arg("graph"), py::arg("s"), py::arg("lam"), py::arg("alpha") = 2.0);
    m.def(
        "yosida",
        [](const ScalarGraph& g, double s, double lambda, double alpha) {
            return scalar_yosida(g, s, params(lambda, alpha));
        },
        py::arg("graph"), py::arg("s"), py::arg("lam"), py::arg("alpha") = 2.0);
    m.def("range_solve", &range_solve, py::arg("graph"), py::arg("y"), py::arg("lam"), py::arg("alpha") = 2.0,
          "x with y in lam j(x) + g(x)");
    m.def("c_star", &c_star, py::arg("delta"), py::arg("alpha"), py::arg("c0"));
    m.def("extinction_floor", &extinction_floor, py::arg("c_star"), py::arg("x_norm"), py::arg("alpha"),
          py::arg("T"));

    py::class_<PyOperator>(m, "Operator")
        .def(py::init<const std::string&, const std::string&, double, double, int, int>(), py::arg("kind"),
             py::arg("graph"), py::arg("p"), py::arg("alpha"), py::arg("d"), py::arg("n"))
        .def_property_readonly("size", [](const PyOperator& o) { return o.op.grid().size(); })
        .def_property_readonly("delta", [](const PyOperator& o) { return o.op.assumptions().delta; })
        .def("norm_H", [](const PyOperator& o, const Vec& x) { return o.op.triple().norm_H(o.field(x)); })
        .def("norm_V", [](const PyOperator& o, const Vec& x) { return o.op.triple().norm_V(o.field(x)); })
        .def("duality",
             [](const PyOperator& o, const Vec& x) { return Vec(duality_map(o.field(x), o.op.triple()).values); })
        .def("apply_minimal",
             [](const PyOperator& o, const Vec& x) { return Vec(apply_minimal(o.op, o.field(x)).values); })
        .def(
            "resolvent",
            [](const PyOperator& o, const Vec& x, double lambda) {
                ResolventResult r = vector_resolvent_full(o.op, o.field(x), params(lambda, o.op.alpha()));
                return py::make_tuple(Vec(r.y.values), r.residual, r.converged);
            },
            py::arg("x"), py::arg("lam"), "(y, residual, converged)")
        .def(
            "yosida",
            [](const PyOperator& o, const Vec& x, double lambda) {
                return Vec(vector_yosida(o.op, o.field(x), params(lambda, o.op.alpha())).values);
            },
            py::arg("x"), py::arg("lam"))
        .def("embedding_constant",
             [](const PyOperator& o) { return embedding_constant(o.op.triple(), o.op.grid()).c0; });

    m.def(
        "simulate",
        [](const std::string& config_json, int N, int threads) {
            SimConfig s = build_sim_config(parse_run_config(config_json));
            std::vector<Trajectory> ts;
            {
                py::gil_scoped_release release;
                ts = simulate_many(s, N, threads_or_default(threads));
            }
            py::list out;
            for (const auto& t : ts) {
                py::dict d;
                d["times"] = t.times;
                d["norm_H"] = t.norm_H;
                d["final_state"] = Vec(t.final_state);
                d["extinct"] = t.extinct;
                d["tau"] = t.tau;
                out.append(d);
            }
            return out;
        },
        py::arg("config_json"), py::arg("N") = 1, py::arg("threads") = 0);

    m.def(
        "extinction",
        [](const std::string& config_json, int threads) {
            RunConfig cfg = parse_run_config(config_json);
            ExtinctionReport r;
            {
                py::gil_scoped_release release;
                r = run_extinction(cfg, threads_or_default(threads));
            }
            py::object d = json_to_py(to_json(r));
            d["tau"] = r.tau;
            return d;
        },
        py::arg("config_json"), py::arg("threads") = 0);

    m.def(
        "sweep",
        [](const std::string& config_json, int threads) {
            RunConfig cfg = parse_run_config(config_json);
            SimConfig s = build_sim_config(cfg);
            std::vector<double> cps = cfg.sweep_checkpoints.empty() ? std::vector<double>{cfg.T} : cfg.sweep_checkpoints;
            SweepTable tab;
            {
                py::gil_scoped_release release;
                tab = lambda_sweep(s, cfg.sweep_mus, cfg.sweep_N, cps, threads_or_default(threads));
            }
            py::list rows;
            for (const auto& r : tab.rows)
                rows.append(py::dict(py::arg("t") = r.t, py::arg("mu_a") = r.mu_a, py::arg("mu_b") = r.mu_b,
                                     py::arg("mean_sq_diff") = r.mean_sq_diff, py::arg("se") = r.se));
            return rows;
        },
        py::arg("config_json"), py::arg("threads") = 0);

    m.def(
        "verify",
        [](const std::string& level, std::uint64_t seed, int threads) {
            if (level != "fast" && level != "full") throw InvalidArgument("level must be 'fast' or 'full'");
            SuiteResult r;
            {
                py::gil_scoped_release release;
                r = run_verify(level == "fast" ? VerifyLevel::Fast : VerifyLevel::Full, seed, threads_or_default(threads));
            }
            return json_to_py(to_json(r));
        },
        py::arg("level") = "fast", py::arg("seed") = 2024, py::arg("threads") = 1);
}
