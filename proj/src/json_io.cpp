#include "netflat/json_io.hpp"

#include <fstream>

#include "netflat/errors.hpp"

namespace netflat {

json schedule_to_json(const Schedule& s) {
    switch (s.kind()) {
        case Schedule::Kind::Constant:
            return json{{"kind", "constant"}, {"value", s.value()}};
        case Schedule::Kind::Geometric:
            return json{{"kind", "geometric"}, {"scale", s.scale()}, {"ratio", s.ratio()}};
        case Schedule::Kind::Table:
            return json{{"kind", "table"}, {"values", s.table_values()}};
    }
    fail(ErrorKind::Validation, "bad schedule");
}

Schedule schedule_from_json(const json& j) {
    if (j.is_number()) return Schedule::constant(j.get<double>());
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") return Schedule::constant(j.at("value").get<double>());
    if (kind == "geometric")
        return Schedule::geometric(j.at("scale").get<double>(), j.at("ratio").get<double>());
    if (kind == "table") return Schedule::table(j.at("values").get<std::vector<double>>());
    fail(ErrorKind::Validation, "unknown schedule kind: " + kind);
}

json graph_to_json(const GraphModel& g) {
    json core;
    core["vertices"] = json::array();
    for (int i = 0; i < g.core_size(); ++i)
        core["vertices"].push_back(
            json::array({g.core().labels[static_cast<size_t>(i)],
                         g.core().mu[static_cast<size_t>(i)]}));
    core["edges"] = json::array();
    for (const CoreEdge& e : g.core().edges)
        core["edges"].push_back(json::array({g.core().labels[static_cast<size_t>(e.u)],
                                             g.core().labels[static_cast<size_t>(e.v)], e.R}));
    json tails = json::array();
    for (int t = 0; t < g.tail_count(); ++t) {
        const TailSpec& spec = g.tails()[static_cast<size_t>(t)];
        json tail;
        tail["id"] = t;
        tail["attachments"] = json::array();
        for (const Attachment& a : spec.attachments)
            tail["attachments"].push_back(json::array(
                {g.core().labels[static_cast<size_t>(a.core_vertex)], a.slot, a.R}));
        json period;
        period["slots"] = spec.period.slots;
        if (!spec.period.mu_factor.empty()) period["mu_factor"] = spec.period.mu_factor;
        period["intra"] = json::array();
        for (const TailEdgeTemplate& e : spec.period.intra)
            period["intra"].push_back(json::array({e.a, e.b, e.factor}));
        period["inter"] = json::array();
        for (const TailEdgeTemplate& e : spec.period.inter)
            period["inter"].push_back(json::array({e.a, e.b, e.factor}));
        tail["period"] = period;
        tail["r_schedule"] = schedule_to_json(spec.r_schedule);
        tail["mu_schedule"] = schedule_to_json(spec.mu_schedule);
        if (spec.sup_certificate) tail["sup_certificate"] = *spec.sup_certificate;
        tails.push_back(tail);
    }
    json root;
    if (g.root().is_core()) {
        root = g.core().labels[static_cast<size_t>(g.root().core_index())];
    } else {
        root = json::array({g.root().tail_id(), g.root().depth, g.root().slot});
    }
    return json{{"core", core}, {"tails", tails}, {"root", root}};
}

std::shared_ptr<const GraphModel> graph_from_json(const json& j) {
    CoreGraph core;
    std::map<std::string, int> index;
    if (j.contains("core")) {
        for (const json& v : j.at("core").value("vertices", json::array())) {
            std::string label = v.at(0).get<std::string>();
            index[label] = static_cast<int>(core.labels.size());
            core.labels.push_back(label);
            core.mu.push_back(v.at(1).get<double>());
        }
        for (const json& e : j.at("core").value("edges", json::array())) {
            auto lookup = [&](const std::string& l) {
                auto it = index.find(l);
                if (it == index.end())
                    fail(ErrorKind::Validation, "edge references missing vertex: " + l);
                return it->second;
            };
            core.edges.push_back(CoreEdge{lookup(e.at(0).get<std::string>()),
                                          lookup(e.at(1).get<std::string>()),
                                          e.at(2).get<double>()});
        }
    }
    std::vector<TailSpec> tails;
    for (const json& t : j.value("tails", json::array())) {
        TailSpec spec;
        const json& period = t.at("period");
        spec.period.slots = period.value("slots", 1);
        if (period.contains("mu_factor"))
            spec.period.mu_factor = period.at("mu_factor").get<std::vector<double>>();
        for (const json& e : period.value("intra", json::array()))
            spec.period.intra.push_back(TailEdgeTemplate{
                e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
        for (const json& e : period.value("inter", json::array()))
            spec.period.inter.push_back(TailEdgeTemplate{
                e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
        spec.r_schedule = schedule_from_json(t.at("r_schedule"));
        spec.mu_schedule = schedule_from_json(t.at("mu_schedule"));
        for (const json& a : t.value("attachments", json::array())) {
            auto it = index.find(a.at(0).get<std::string>());
            if (it == index.end())
                fail(ErrorKind::Validation, "attachment references missing vertex");
            spec.attachments.push_back(
                Attachment{it->second, a.at(1).get<int>(), a.at(2).get<double>()});
        }
        if (t.contains("sup_certificate"))
            spec.sup_certificate = t.at("sup_certificate").get<double>();
        int expected = t.value("id", static_cast<int>(tails.size()));
        if (expected != static_cast<int>(tails.size()))
            fail(ErrorKind::Validation, "tail ids must be consecutive from 0");
        tails.push_back(std::move(spec));
    }
    VertexId root = VertexId::core(0);
    if (j.contains("root")) {
        const json& r = j.at("root");
        if (r.is_string()) {
            auto it = index.find(r.get<std::string>());
            if (it == index.end()) fail(ErrorKind::Validation, "root label not found");
            root = VertexId::core(it->second);
        } else {
            root = VertexId::in_tail(r.at(0).get<int>(), r.at(1).get<int>(),
                                     r.size() > 2 ? r.at(2).get<int>() : 0);
        }
    } else if (core.labels.empty()) {
        root = VertexId::in_tail(0, 0, 0);
    }
    return GraphModel::make(std::move(core), std::move(tails), root);
}

std::shared_ptr<const GraphModel> load_graph(const json& source) {
    if (source.is_object()) return graph_from_json(source);
    if (!source.is_string())
        fail(ErrorKind::Validation, "graph source must be a family name, path, or object");
    std::string s = source.get<std::string>();
    if (!s.empty() && s.front() == '{') return graph_from_json(json::parse(s));
    if (s.size() > 5 && s.substr(s.size() - 5) == ".json")
        return graph_from_json(load_json_file(s));
    return make_family(s);
}

VertexId vertex_from_json(const GraphModel& g, const json& j) {
    if (j.is_string()) {
        auto v = g.find_label(j.get<std::string>());
        if (!v) fail(ErrorKind::InvalidVertex, "no vertex labeled " + j.get<std::string>());
        return *v;
    }
    if (j.is_array()) {
        VertexId v = VertexId::in_tail(j.at(0).get<int>(), j.at(1).get<int>(),
                                       j.size() > 2 ? j.at(2).get<int>() : 0);
        g.require_vertex(v);
        return v;
    }
    fail(ErrorKind::Validation, "vertex reference must be a label or [tail, depth, slot]");
}

json vertex_to_json(const GraphModel& g, const VertexId& v) {
    if (v.is_core()) return g.core().labels[static_cast<size_t>(v.core_index())];
    return json::array({v.tail_id(), v.depth, v.slot});
}

json flat_to_json(const FlatFunction& f) {
    const GraphModel& g = f.graph();
    json explicit_values = json::array();
    auto emit = [&](const VertexId& v) {
        explicit_values.push_back(json::array({vertex_to_json(g, v), f.evaluate(v)}));
    };
    for (int i = 0; i < g.core_size(); ++i) emit(VertexId::core(i));
    for (int t = 0; t < g.tail_count(); ++t) {
        int slots = g.tails()[static_cast<size_t>(t)].period.slots;
        for (int d = 0; d < f.horizon(t); ++d)
            for (int s = 0; s < slots; ++s) emit(VertexId::in_tail(t, d, s));
    }
    json tails = json::array();
    for (int t = 0; t < g.tail_count(); ++t)
        tails.push_back(json::array({t, f.tail_constant(t)}));
    return json{{"dimension", f.dimension()}, {"explicit", explicit_values}, {"tails", tails}};
}

FlatFunction flat_from_json(std::shared_ptr<const GraphModel> g, const json& j) {
    int dim = j.value("dimension", 1);
    FlatFunction f(g, dim);
    for (const json& entry : j.value("tails", json::array())) {
        int t = entry.at(0).get<int>();
        if (t < 0 || t >= g->tail_count())
            fail(ErrorKind::Validation, "tail constant references missing tail");
        f.set_tail_constant(t, entry.at(1).get<std::vector<double>>());
    }
    for (const json& entry : j.value("explicit", json::array())) {
        VertexId v = vertex_from_json(*g, entry.at(0));
        std::vector<double> values = entry.at(1).get<std::vector<double>>();
        if (static_cast<int>(values.size()) != dim)
            fail(ErrorKind::Validation, "explicit value dimension mismatch");
        for (int c = 0; c < dim; ++c) f.set_value(v, c, values[static_cast<size_t>(c)]);
    }
    return f;
}

std::string config_hash(const json& j) {
    std::string dump = j.dump();  // object keys are sorted by nlohmann::json
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(ErrorKind::Validation, "bad JSON in " + path + ": " + e.what());
    }
    return j;
}

}  // namespace netflat
