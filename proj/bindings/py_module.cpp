#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "netflat/errors.hpp"
#include "netflat/flat.hpp"
#include "netflat/graph.hpp"
#include "netflat/json_io.hpp"
#include "netflat/laplacian.hpp"
#include "netflat/propagator.hpp"
#include "netflat/properties.hpp"
#include "netflat/reaction.hpp"
#include "netflat/spectral.hpp"
#include "netflat/version.hpp"

namespace py = pybind11;
using namespace netflat;

namespace {

// pybind11 holders cannot carry shared_ptr<const T>, so the graph handle is
// a small wrapper around the owning pointer.
struct PyGraph {
    std::shared_ptr<const GraphModel> ptr;
    const GraphModel& get() const { return *ptr; }
};

PyGraph graph_from_source(const std::string& source) {
    if (!source.empty() && source.front() == '{')
        return PyGraph{graph_from_json(json::parse(source))};
    return PyGraph{load_graph(json(source))};
}

Weighting make_weighting(const PyGraph& g, const std::string& mode, double gamma,
                         double core_scale, bool mu0_companion, int n) {
    if (mode == "base") return Weighting::base(g.ptr);
    WeightPlan plan = finite_volume_weights(g.get(), gamma, core_scale, mu0_companion);
    if (mode == "plan") return Weighting::plan(g.ptr, plan);
    if (mode == "hybrid") return Weighting::hybrid(g.ptr, plan, g.get().root(), n);
    fail(ErrorKind::Validation, "weight mode must be base, plan, or hybrid");
}

ReactionMap map_by_name(const std::string& catalog, double param, double box_lo,
                        double box_hi) {
    if (catalog == "zero") return zero_reaction();
    if (catalog == "logistic") return logistic_reaction(param, {box_lo, box_hi});
    if (catalog == "decay") return linear_decay(param);
    if (catalog == "bistable") return bistable_reaction(param, {box_lo, box_hi});
    fail(ErrorKind::Validation, "unknown reaction: " + catalog);
}

}  // namespace

PYBIND11_MODULE(_netflat, m) {
    m.doc() = "linear and semilinear diffusion on infinite networks with flat far fields";
    m.attr("__version__") = std::string(kVersion);

    py::register_exception<Error>(m, "EngineError");

    py::class_<VertexId>(m, "VertexId")
        .def_static("core", &VertexId::core, py::arg("index"))
        .def_static("in_tail", &VertexId::in_tail, py::arg("tail"), py::arg("depth"),
                    py::arg("slot") = 0)
        .def_property_readonly("is_core", &VertexId::is_core)
        .def_readonly("depth", &VertexId::depth)
        .def_readonly("slot", &VertexId::slot)
        .def("__eq__", [](const VertexId& a, const VertexId& b) { return a == b; })
        .def("__hash__", [](const VertexId& v) { return VertexIdHash{}(v); })
        .def("__repr__", [](const VertexId& v) {
            if (v.is_core()) return "VertexId.core(" + std::to_string(v.core_index()) + ")";
            return "VertexId.in_tail(" + std::to_string(v.tail_id()) + ", " +
                   std::to_string(v.depth) + ", " + std::to_string(v.slot) + ")";
        });

    py::class_<PyGraph>(m, "GraphModel")
        .def_property_readonly("core_size",
                               [](const PyGraph& g) { return g.get().core_size(); })
        .def_property_readonly("tail_count",
                               [](const PyGraph& g) { return g.get().tail_count(); })
        .def_property_readonly("root", [](const PyGraph& g) { return g.get().root(); })
        .def("label", [](const PyGraph& g, const VertexId& v) { return g.get().label(v); })
        .def("vertex",
             [](const PyGraph& g, const std::string& label) {
                 auto v = g.get().find_label(label);
                 if (!v) fail(ErrorKind::InvalidVertex, "no vertex labeled " + label);
                 return *v;
             })
        .def("neighbors",
             [](const PyGraph& g, const VertexId& v) {
                 std::vector<std::tuple<VertexId, double, double>> out;
                 for (const IncidentEdge& ie : g.get().incident_edges(v))
                     out.emplace_back(ie.other, ie.R, ie.C);
                 return out;
             })
        .def("combinatorial_distance",
             [](const PyGraph& g, const VertexId& u, const VertexId& v, int cap) {
                 return g.get().combinatorial_distance(u, v, cap);
             },
             py::arg("u"), py::arg("v"), py::arg("radius_cap") = GraphModel::kDefaultRadiusCap)
        .def("geodesic_distance",
             [](const PyGraph& g, const VertexId& u, const VertexId& v, int cap) {
                 return geodesic_distance(g.get(), u, v, EdgeWeights::base(g.get()), cap);
             },
             py::arg("u"), py::arg("v"), py::arg("radius_cap") = GraphModel::kDefaultRadiusCap)
        .def("ball_vertices",
             [](const PyGraph& g, const VertexId& center, int radius) {
                 return g.get().ball(center, radius).vertices();
             })
        .def("volume",
             [](const PyGraph& g) -> py::object {
                 auto v = EdgeWeights::base(g.get()).total(g.get());
                 if (!v) return py::none();
                 return py::float_(*v);
             })
        .def("tail_of",
             [](const PyGraph& g, const VertexId& v) -> py::object {
                 auto t = g.get().tail_of(v);
                 if (!t) return py::none();
                 return py::int_(*t);
             })
        .def("to_json", [](const PyGraph& g) { return graph_to_json(g.get()).dump(); });

    m.def("make_graph", &graph_from_source, py::arg("source"),
          "Family shorthand (k2, path:N, ray:unit, ray:geometric:G, spider:T, "
          "lattice2d:N) or a JSON object string.");

    py::class_<FlatFunction>(m, "FlatFunction")
        .def_static("constant",
                    [](const PyGraph& g, double value) {
                        return FlatFunction::constant(g.ptr, value);
                    })
        .def_static("step",
                    [](const PyGraph& g, int tail, int cutoff, double inside,
                       double outside) {
                        return FlatFunction::step(g.ptr, tail, cutoff, inside, outside);
                    },
                    py::arg("graph"), py::arg("tail"), py::arg("cutoff_depth"),
                    py::arg("inside") = 1.0, py::arg("outside") = 0.0)
        .def_property_readonly("dimension", &FlatFunction::dimension)
        .def("value", &FlatFunction::value, py::arg("vertex"), py::arg("component") = 0)
        .def("set_value", &FlatFunction::set_value)
        .def("set_tail_constant", &FlatFunction::set_tail_constant)
        .def("tail_constant", &FlatFunction::tail_constant)
        .def("horizon", &FlatFunction::horizon)
        .def("sup_norm", &FlatFunction::sup_norm)
        .def("sup_diff", &FlatFunction::sup_diff)
        .def("jump_edge_count",
             [](const FlatFunction& f) { return f.jump_edges().size(); })
        .def("add", &FlatFunction::add)
        .def("mul", &FlatFunction::mul)
        .def("scale", &FlatFunction::scale)
        .def("vanishes_on",
             [](const FlatFunction& f, const std::set<int>& tails) {
                 return f.vanishes_on(BoundarySet(tails));
             })
        .def("to_json", [](const FlatFunction& f) { return flat_to_json(f).dump(); });

    m.def("flat_from_json", [](const PyGraph& g, const std::string& text) {
        return flat_from_json(g.ptr, json::parse(text));
    });
    m.def("delta", [](const PyGraph& g, const VertexId& v) {
        return FlatFunction::delta(g.ptr, v, VertexWeights::base(g.get()).mu(g.get(), v));
    });
    m.def("separation_function",
          [](const PyGraph& g, const std::set<int>& omega1, const std::set<int>& omega2,
             int guard) {
              return separation_function(g.ptr, BoundarySet(omega1), BoundarySet(omega2),
                                         guard);
          });

    py::class_<Laplacian>(m, "Laplacian")
        .def(py::init([](const PyGraph& g, const std::string& mode, double gamma,
                         double core_scale, bool mu0_companion, int n) {
                 return Laplacian(make_weighting(g, mode, gamma, core_scale, mu0_companion, n));
             }),
             py::arg("graph"), py::arg("mode") = "base", py::arg("gamma") = 0.5,
             py::arg("core_scale") = 1.0, py::arg("mu0_companion") = true, py::arg("n") = 4)
        .def_property_readonly("bounded", &Laplacian::bounded)
        .def_property_readonly("op_norm_inf", &Laplacian::op_norm_inf)
        .def("mu", &Laplacian::mu)
        .def("apply", &Laplacian::apply)
        .def("bilinear_form", &Laplacian::bilinear_form)
        .def("inner", &Laplacian::inner)
        .def("sobolev_norm", [](const Laplacian& L, const FlatFunction& f) -> py::object {
            NormValue n = L.sobolev_norm(f);
            if (!n.finite) return py::none();
            return py::float_(n.value);
        });

    m.def("lp_norm", [](const Laplacian& L, const FlatFunction& f, double p) -> py::object {
        NormValue n = f.lp_norm(p, L.weighting().vertices());
        if (!n.finite) return py::none();
        return py::float_(n.value);
    });

    m.def("propagate",
          [](const Laplacian& L, const FlatFunction& f, double t, double tol) {
              Propagated out = propagate(L, f, t, PropagateOptions{tol});
              return py::make_tuple(out.value, out.error_bound);
          },
          py::arg("laplacian"), py::arg("f"), py::arg("t"), py::arg("tol") = 1e-8);
    m.def("heat_kernel",
          [](const Laplacian& L, double t, const VertexId& u, const VertexId& v,
             double tol) { return heat_kernel(L, KernelQuery{t, u, v, tol}); },
          py::arg("laplacian"), py::arg("t"), py::arg("source"), py::arg("target"),
          py::arg("tol") = 1e-8);
    m.def("decay_bound", &decay_bound);
    m.def("mass", &mass);

    py::class_<SpectralModel>(m, "SpectralModel")
        .def_property_readonly("depth", &SpectralModel::depth)
        .def_property_readonly("eigenvalues",
                               [](const SpectralModel& s) {
                                   std::vector<double> out(
                                       s.eigenvalues().data(),
                                       s.eigenvalues().data() + s.eigenvalues().size());
                                   return out;
                               })
        .def("propagate", &spectral_propagate, py::arg("f"), py::arg("t"));

    m.def("build_spectral_model",
          [](const PyGraph& g, const std::string& mode, double gamma, double core_scale,
             bool mu0_companion, int n, const std::set<int>& omega, int depth) {
              return build_spectral_model(
                  make_weighting(g, mode, gamma, core_scale, mu0_companion, n),
                  BoundarySet(omega), depth);
          },
          py::arg("graph"), py::arg("mode") = "plan", py::arg("gamma") = 0.5,
          py::arg("core_scale") = 1.0, py::arg("mu0_companion") = true, py::arg("n") = 4,
          py::arg("omega") = std::set<int>{}, py::arg("depth") = 16);
    m.def("dirichlet_lower_bound",
          [](const PyGraph& g, double gamma, double core_scale, bool mu0_companion) {
              return dirichlet_lower_bound(
                  g.ptr, finite_volume_weights(g.get(), gamma, core_scale, mu0_companion));
          },
          py::arg("graph"), py::arg("gamma") = 0.5, py::arg("core_scale") = 1.0,
          py::arg("mu0_companion") = true);

    py::class_<ReactionField>(m, "ReactionField")
        .def(py::init([](const std::string& catalog, double param, double box_lo,
                         double box_hi) {
                 return ReactionField(1, map_by_name(catalog, param, box_lo, box_hi));
             }),
             py::arg("catalog") = "zero", py::arg("param") = 1.0, py::arg("box_lo") = -10.0,
             py::arg("box_hi") = 10.0)
        .def("lipschitz", &ReactionField::lipschitz)
        .def("evaluate", &ReactionField::evaluate);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("times", &Trajectory::times)
        .def_readonly("window_iterations", &Trajectory::window_iterations)
        .def_readonly("error_estimate", &Trajectory::error_estimate)
        .def("state", [](const Trajectory& t, size_t i) { return t.states.at(i); })
        .def("at_time", &Trajectory::at_time)
        .def("__len__", [](const Trajectory& t) { return t.times.size(); });

    m.def("solve_mild",
          [](const Laplacian& L, const ReactionField& J, const FlatFunction& p0, double t1,
             double tol, const std::vector<double>& report_times) {
              MildOptions o;
              o.tol = tol;
              o.report_times = report_times;
              return solve_mild(L, J, p0, t1, o);
          },
          py::arg("laplacian"), py::arg("reaction"), py::arg("p0"), py::arg("t1"),
          py::arg("tol") = 1e-7, py::arg("report_times") = std::vector<double>{});
    m.def("solve_boundary_ode", &solve_boundary_ode, py::arg("reaction"), py::arg("tail"),
          py::arg("q0"), py::arg("times"), py::arg("tol") = 1e-9);

    m.def("run_validation", [](uint64_t seed) {
        return run_property_suite(seed).to_json().dump();
    });
}
