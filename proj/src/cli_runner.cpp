#include "netflat/cli_runner.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "netflat/csv.hpp"
#include "netflat/errors.hpp"
#include "netflat/flat.hpp"
#include "netflat/json_io.hpp"
#include "netflat/laplacian.hpp"
#include "netflat/propagator.hpp"
#include "netflat/properties.hpp"
#include "netflat/reaction.hpp"
#include "netflat/spectral.hpp"
#include "netflat/version.hpp"

namespace netflat {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation:
        case ErrorKind::InvalidVertex:
            return 2;
        case ErrorKind::Solver:
        case ErrorKind::Numeric:
        case ErrorKind::Unbounded:
        case ErrorKind::Inconclusive:
            return 3;
        case ErrorKind::Resource:
            return 4;
        case ErrorKind::Io:
            return 5;
    }
    return 1;
}

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    uint64_t seed = 1;
    double tol = 0.0;  // 0 = take the config value
    int threads = 1;
};

std::shared_ptr<const GraphModel> load_graph_cached(const json& source) {
    if (source.is_string()) {
        const char* cache = std::getenv("NETFLAT_CACHE_DIR");
        std::string name = source.get<std::string>();
        bool shorthand = !name.empty() && name.front() != '{' &&
                         (name.size() <= 5 || name.substr(name.size() - 5) != ".json");
        if (cache && shorthand) {
            std::string key = name;
            for (char& c : key)
                if (c == ':' || c == '/') c = '_';
            fs::path path = fs::path(cache) / ("family-" + key + ".json");
            if (fs::exists(path)) return graph_from_json(load_json_file(path.string()));
            auto g = load_graph(source);
            std::error_code ec;
            fs::create_directories(cache, ec);
            write_file_atomic(path.string(), graph_to_json(*g).dump(2) + "\n");
            return g;
        }
    }
    return load_graph(source);
}

struct Scenario {
    json canonical;  // config with the graph expanded, used for hashing
    std::shared_ptr<const GraphModel> graph;
    Weighting weighting = Weighting::base(make_family("k2"));  // replaced in load()
    std::optional<WeightPlan> plan;
    BoundarySet omega;
    std::optional<ReactionField> reaction;
    std::optional<FlatFunction> p0;
    double t1 = 1.0;
    double tol = 1e-7;
    std::vector<double> t_grid;
};

ReactionMap reaction_map_from_json(const json& j) {
    std::string catalog = j.value("catalog", std::string("zero"));
    StateBox box;
    if (j.contains("box")) {
        box.lo = j.at("box").at(0).get<double>();
        box.hi = j.at("box").at(1).get<double>();
    }
    if (catalog == "zero") return zero_reaction();
    if (catalog == "logistic") return logistic_reaction(j.value("K", 1.0), box);
    if (catalog == "decay") return linear_decay(j.value("rate", 1.0));
    if (catalog == "bistable") return bistable_reaction(j.value("a", 0.25), box);
    fail(ErrorKind::Validation, "unknown reaction catalog entry: " + catalog);
}

Scenario load_scenario(const json& config, const GlobalOptions& global) {
    Scenario s;
    if (!config.contains("graph")) fail(ErrorKind::Validation, "config needs a graph");
    s.graph = load_graph_cached(config.at("graph"));
    s.canonical = config;
    s.canonical["graph"] = graph_to_json(*s.graph);

    json weights = config.value("weights", json{{"mode", "base"}});
    std::string mode = weights.value("mode", std::string("base"));
    if (mode == "base") {
        s.weighting = Weighting::base(s.graph);
    } else if (mode == "plan" || mode == "hybrid") {
        bool derive = weights.value("companion", std::string("mu0")) == "mu0";
        WeightPlan plan = finite_volume_weights(*s.graph, weights.value("gamma", 0.5),
                                                weights.value("core_scale", 1.0), derive);
        s.plan = plan;
        if (mode == "plan") {
            s.weighting = Weighting::plan(s.graph, plan);
        } else {
            s.weighting = Weighting::hybrid(s.graph, plan, s.graph->root(),
                                            weights.value("n", 4));
        }
    } else {
        fail(ErrorKind::Validation, "unknown weight mode: " + mode);
    }

    std::set<int> omega_tails;
    for (const json& t : config.value("omega", json::array()))
        omega_tails.insert(t.get<int>());
    s.omega = BoundarySet(std::move(omega_tails));
    s.omega.require_valid(*s.graph);

    if (config.contains("reaction")) {
        const json& rj = config.at("reaction");
        ReactionField field(rj.value("dimension", 1), reaction_map_from_json(rj));
        for (const json& entry : rj.value("tail_overrides", json::array()))
            field.set_tail_map(entry.at(0).get<int>(), reaction_map_from_json(entry.at(1)));
        for (const json& entry : rj.value("exceptions", json::array()))
            field.add_exception(vertex_from_json(*s.graph, entry.at(0)),
                                reaction_map_from_json(entry.at(1)));
        s.reaction = std::move(field);
    }

    if (config.contains("p0")) {
        const json& pj = config.at("p0");
        std::string kind = pj.value("kind", std::string("constant"));
        if (kind == "constant") {
            s.p0 = FlatFunction::constant(s.graph, pj.value("value", 0.0));
        } else if (kind == "delta") {
            VertexId v = vertex_from_json(*s.graph, pj.at("vertex"));
            s.p0 = FlatFunction::delta(s.graph, v, s.weighting.mu(v));
        } else if (kind == "step") {
            s.p0 = FlatFunction::step(s.graph, pj.value("tail", 0), pj.value("depth", 2),
                                      pj.value("inside", 1.0), pj.value("outside", 0.0));
        } else if (kind == "explicit") {
            s.p0 = flat_from_json(s.graph, pj.at("function"));
        } else {
            fail(ErrorKind::Validation, "unknown p0 kind: " + kind);
        }
    }

    s.t1 = config.value("t1", 1.0);
    s.tol = global.tol > 0.0 ? global.tol : config.value("tol", 1e-7);
    if (!(s.tol > 0.0)) fail(ErrorKind::Validation, "tolerance must be positive");
    for (const json& t : config.value("t_grid", json::array()))
        s.t_grid.push_back(t.get<double>());
    return s;
}

json make_manifest(const std::string& command, const Scenario* scenario, const json& config,
                   const GlobalOptions& global, double wall_ms,
                   const std::vector<std::string>& outputs, const json& bounds) {
    json manifest;
    manifest["command"] = command;
    manifest["engine_version"] = std::string(kVersion);
    manifest["config_hash"] =
        config_hash(scenario ? scenario->canonical : config);
    manifest["seed"] = global.seed;
    manifest["wall_ms"] = wall_ms;
    manifest["outputs"] = outputs;
    manifest["error_bounds"] = bounds;
    return manifest;
}

void write_manifest(const json& manifest, const GlobalOptions& global) {
    write_file_atomic((fs::path(global.out_dir) / "manifest.json").string(),
                      manifest.dump(2) + "\n");
}

std::vector<VertexId> report_vertices(const Scenario& s, const json& config) {
    json report = config.value("report", json::object());
    std::vector<VertexId> out;
    if (report.contains("vertices")) {
        for (const json& v : report.at("vertices"))
            out.push_back(vertex_from_json(*s.graph, v));
        return out;
    }
    return evaluation_window(*s.graph, report.value("ball", 8));
}

// --- commands ---------------------------------------------------------------

int cmd_simulate(const json& config, const GlobalOptions& global) {
    auto start = Clock::now();
    Scenario s = load_scenario(config, global);
    if (!s.p0) fail(ErrorKind::Validation, "simulate needs p0");
    ReactionField field = s.reaction ? *s.reaction : ReactionField(1, zero_reaction());
    Laplacian L(s.weighting);

    MildOptions options;
    options.tol = s.tol;
    for (double t : s.t_grid)
        if (t > 0.0 && t < s.t1) options.report_times.push_back(t);
    Trajectory traj = solve_mild(L, field, *s.p0, s.t1, options);

    CsvWriter csv;
    csv.header({"t", "vertex", "component", "value"});
    std::vector<VertexId> vertices = report_vertices(s, config);
    for (size_t i = 0; i < traj.times.size(); ++i)
        for (const VertexId& v : vertices)
            for (int c = 0; c < traj.states[i].dimension(); ++c)
                csv.row({format_double(traj.times[i]), s.graph->label(v), std::to_string(c),
                         format_double(traj.states[i].value(v, c))});
    csv.blank_line();
    csv.row({"t", "tail", "component", "value"});
    for (size_t i = 0; i < traj.times.size(); ++i)
        for (int t = 0; t < s.graph->tail_count(); ++t)
            for (int c = 0; c < traj.states[i].dimension(); ++c)
                csv.row({format_double(traj.times[i]), std::to_string(t), std::to_string(c),
                         format_double(traj.states[i].tail_constant(t)[static_cast<size_t>(c)])});

    std::string path = (fs::path(global.out_dir) / "trajectory.csv").string();
    write_file_atomic(path, csv.str());
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    json bounds{{"solver_tol", s.tol}, {"error_estimate", traj.error_estimate}};
    write_manifest(make_manifest("simulate", &s, config, global, ms, {path}, bounds), global);
    return 0;
}

int cmd_kernel(const json& config, const GlobalOptions& global) {
    auto start = Clock::now();
    Scenario s = load_scenario(config, global);
    if (!config.contains("kernel")) fail(ErrorKind::Validation, "kernel config missing");
    const json& kj = config.at("kernel");
    Laplacian L(s.weighting);
    double t = kj.at("t").get<double>();
    VertexId source = vertex_from_json(*s.graph, kj.at("source"));
    std::vector<VertexId> targets;
    if (kj.contains("targets")) {
        for (const json& v : kj.at("targets"))
            targets.push_back(vertex_from_json(*s.graph, v));
    } else {
        targets = evaluation_window(*s.graph, kj.value("ball", 8));
    }

    CsvWriter csv;
    csv.header({"u", "v", "t", "value", "decay_bound"});
    for (const VertexId& v : targets) {
        KernelQuery q;
        q.t = t;
        q.source = source;
        q.target = v;
        q.tol = s.tol;
        double value = heat_kernel(L, q);
        int d = s.graph->combinatorial_distance(source, v);
        double bound = decay_bound(L, t, d, L.mu(v));
        csv.row({s.graph->label(source), s.graph->label(v), format_double(t),
                 format_double(value), format_double(bound)});
    }
    std::string path = (fs::path(global.out_dir) / "kernel.csv").string();
    write_file_atomic(path, csv.str());
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    write_manifest(make_manifest("kernel", &s, config, global, ms, {path},
                                 json{{"tol", s.tol}}),
                   global);
    return 0;
}

int cmd_spectrum(const json& config, const GlobalOptions& global) {
    auto start = Clock::now();
    Scenario s = load_scenario(config, global);
    int depth = config.value("spectrum", json::object()).value("depth", 16);
    SpectralModel model = build_spectral_model(s.weighting, s.omega, depth);
    CsvWriter csv;
    csv.header({"index", "eigenvalue"});
    for (int i = 0; i < model.eigenvalues().size(); ++i)
        csv.row({std::to_string(i), format_double(model.eigenvalues()(i))});
    std::string path = (fs::path(global.out_dir) / "spectrum.csv").string();
    write_file_atomic(path, csv.str());
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    write_manifest(make_manifest("spectrum", &s, config, global, ms, {path},
                                 json{{"depth", model.depth()},
                                      {"symmetry_defect", model.symmetry_defect()}}),
                   global);
    return 0;
}

int cmd_converge(const json& config, const GlobalOptions& global) {
    auto start = Clock::now();
    Scenario s = load_scenario(config, global);
    if (!s.plan) fail(ErrorKind::Validation, "converge needs plan or hybrid weights");
    if (!s.p0) fail(ErrorKind::Validation, "converge needs p0");
    json cj = config.value("converge", json::object());

    ConvergenceSetup setup;
    setup.t_grid = s.t_grid;
    if (setup.t_grid.empty()) setup.t_grid = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (const json& n : cj.value("n_list", json::array({2, 4, 8, 16})))
        setup.n_list.push_back(n.get<int>());
    setup.initial_depth = cj.value("depth", 16);
    setup.max_depth = cj.value("max_depth", 4096);
    setup.window_radius = cj.value("window_radius", 8);
    setup.refine_tol = cj.value("refine_tol", 1e-6);
    setup.tol = s.tol;
    setup.threads = global.threads;

    Laplacian base(Weighting::base(s.graph));
    std::string mode = cj.value("mode", std::string("linear"));
    std::vector<ConvergenceRow> rows;
    if (mode == "linear") {
        rows = linear_convergence_experiment(base, *s.plan, s.omega, *s.p0, setup);
    } else if (mode == "semilinear") {
        ReactionField field = s.reaction ? *s.reaction : ReactionField(1, zero_reaction());
        rows = semilinear_convergence_experiment(base, *s.plan, s.omega, field, *s.p0,
                                                 setup, s.tol);
    } else {
        fail(ErrorKind::Validation, "converge mode must be linear or semilinear");
    }

    CsvWriter csv;
    csv.header({"n", "t", "sup_diff", "D_used", "refinement_defect"});
    for (const ConvergenceRow& r : rows)
        csv.row({std::to_string(r.n), format_double(r.t), format_double(r.sup_diff),
                 std::to_string(r.depth_used), format_double(r.refinement_defect)});
    std::string path = (fs::path(global.out_dir) / "convergence.csv").string();
    write_file_atomic(path, csv.str());
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    write_manifest(make_manifest("converge", &s, config, global, ms, {path},
                                 json{{"tol", s.tol}, {"refine_tol", setup.refine_tol}}),
                   global);
    return 0;
}

int cmd_validate(const GlobalOptions& global, const std::string& inject_fault) {
    auto start = Clock::now();
    FaultInjection fault;
    if (inject_fault == "weight-sign") fault.weight_sign = true;
    else if (!inject_fault.empty())
        fail(ErrorKind::Validation, "unknown fault: " + inject_fault);
    PropertyReport report = run_property_suite(global.seed, fault);
    json j = report.to_json();
    std::string path = (fs::path(global.out_dir) / "validate.json").string();
    write_file_atomic(path, j.dump(2) + "\n");
    std::cout << j.dump(2) << std::endl;
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    write_manifest(make_manifest("validate", nullptr, json{{"seed", global.seed}}, global,
                                 ms, {path}, json::object()),
                   global);
    return 0;
}

int cmd_describe_graph(const json& config, const GlobalOptions& global, int qmatrix_radius) {
    auto start = Clock::now();
    Scenario s = load_scenario(config, global);
    json out = graph_to_json(*s.graph);
    json stats;
    stats["core_vertices"] = s.graph->core_size();
    stats["tails"] = s.graph->tail_count();
    stats["ball3_vertices"] =
        static_cast<int>(s.graph->ball(s.graph->root(), 3).vertices().size());
    auto vol = s.weighting.edge_total();
    stats["volume"] = vol ? json(*vol) : json("divergent");
    Laplacian L(s.weighting);
    stats["bounded"] = L.bounded();
    if (L.bounded()) stats["op_norm_inf"] = L.op_norm_inf();
    out["stats"] = stats;
    std::cout << out.dump(2) << std::endl;

    if (qmatrix_radius >= 0) {
        FiniteSubgraph region = s.graph->ball(s.graph->root(), qmatrix_radius);
        Eigen::MatrixXd q = L.q_matrix(region);
        CsvWriter csv;
        int n = static_cast<int>(region.vertices().size());
        if (n <= 64) {
            std::vector<std::string> head{"vertex"};
            for (int j = 0; j < n; ++j)
                head.push_back(s.graph->label(region.vertices()[static_cast<size_t>(j)]));
            csv.header(head);
            for (int i = 0; i < n; ++i) {
                std::vector<std::string> row{
                    s.graph->label(region.vertices()[static_cast<size_t>(i)])};
                for (int j = 0; j < n; ++j) row.push_back(format_double(q(i, j)));
                csv.row(row);
            }
        } else {
            csv.header({"v", "w", "value"});
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (q(i, j) != 0.0)
                        csv.row({s.graph->label(region.vertices()[static_cast<size_t>(i)]),
                                 s.graph->label(region.vertices()[static_cast<size_t>(j)]),
                                 format_double(q(i, j))});
        }
        write_file_atomic((fs::path(global.out_dir) / "qmatrix.csv").string(), csv.str());
    }
    double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    std::vector<std::string> outputs;
    if (qmatrix_radius >= 0)
        outputs.push_back((fs::path(global.out_dir) / "qmatrix.csv").string());
    write_manifest(make_manifest("describe-graph", &s, config, global, ms, outputs,
                                 json::object()),
                   global);
    return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"reaction-diffusion engine for infinite networks with flat far fields"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions global;
    app.add_option("--config", global.config_path, "scenario JSON path")
        ->envname("NETFLAT_CONFIG");
    app.add_option("--out", global.out_dir, "output directory");
    app.add_option("--seed", global.seed, "random seed for validation suites");
    app.add_option("--tol", global.tol, "override the config tolerance");
    app.add_option("--threads", global.threads, "worker threads for sweeps");

    auto* simulate = app.add_subcommand("simulate", "solve a reaction-diffusion scenario");
    auto* kernel = app.add_subcommand("kernel", "evaluate heat-kernel entries");
    std::string kernel_graph, kernel_source;
    std::vector<std::string> kernel_targets;
    double kernel_t = 0.5;
    kernel->add_option("--graph", kernel_graph, "graph family or file");
    kernel->add_option("--t", kernel_t, "time");
    kernel->add_option("--source", kernel_source, "source vertex label");
    kernel->add_option("--targets", kernel_targets, "target vertex labels");
    auto* spectrum = app.add_subcommand("spectrum", "finite-section eigenvalues");
    auto* converge = app.add_subcommand("converge", "strong-convergence experiment");
    auto* validate = app.add_subcommand("validate", "run the invariant property suite");
    std::string inject_fault;
    validate->add_option("--inject-fault", inject_fault,
                         "deliberately break a fixture (weight-sign)");
    auto* describe = app.add_subcommand("describe-graph", "expand and describe a graph");
    std::string describe_graph_arg;
    describe->add_option("graph", describe_graph_arg, "graph family, JSON, or file");
    int qmatrix_radius = -1;
    describe->add_option("--qmatrix-radius", qmatrix_radius,
                         "export the operator matrix on a ball of this radius");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        json config;
        auto need_config = [&]() {
            if (global.config_path.empty())
                fail(ErrorKind::Validation, "this command needs --config");
            config = load_json_file(global.config_path);
        };
        if (simulate->parsed()) {
            need_config();
            return cmd_simulate(config, global);
        }
        if (kernel->parsed()) {
            if (!global.config_path.empty()) {
                config = load_json_file(global.config_path);
            } else {
                if (kernel_graph.empty() || kernel_source.empty() || kernel_targets.empty())
                    fail(ErrorKind::Validation,
                         "kernel needs --config or --graph/--source/--targets");
                config = json{{"graph", kernel_graph},
                              {"tol", global.tol > 0 ? global.tol : 1e-8},
                              {"kernel",
                               json{{"t", kernel_t},
                                    {"source", kernel_source},
                                    {"targets", kernel_targets}}}};
            }
            return cmd_kernel(config, global);
        }
        if (spectrum->parsed()) {
            need_config();
            return cmd_spectrum(config, global);
        }
        if (converge->parsed()) {
            need_config();
            return cmd_converge(config, global);
        }
        if (validate->parsed()) return cmd_validate(global, inject_fault);
        if (describe->parsed()) {
            if (!describe_graph_arg.empty()) {
                config = json{{"graph", describe_graph_arg}};
            } else {
                need_config();
            }
            return cmd_describe_graph(config, global, qmatrix_radius);
        }
        fail(ErrorKind::Validation, "no subcommand");
    } catch (const Error& e) {
        json err{{"error", {{"kind", error_kind_name(e.kind())}, {"message", e.what()}}}};
        std::cout << err.dump(2) << std::endl;
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        json err{{"error", {{"kind", "internal"}, {"message", e.what()}}}};
        std::cout << err.dump(2) << std::endl;
        return 1;
    }
    return 0;
}

}  // namespace netflat
