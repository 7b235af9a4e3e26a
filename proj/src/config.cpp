#include "yosida/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace yosida {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
    throw ConfigError("config " + (path.empty() ? std::string("/") : path) + ": " + msg);
}

// Reads one JSON object, remembering which keys were consumed.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) schema_error(path_, "expected an object");
    }

    void mark(const std::string& k) { used_.insert(k); }

    bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }

    const json& raw(const std::string& k) {
        used_.insert(k);
        return j_.at(k);
    }

    Section sub(const std::string& k) {
        used_.insert(k);
        if (!j_.contains(k)) return Section(empty(), path_ + "/" + k);
        return Section(j_.at(k), path_ + "/" + k);
    }

    double num(const std::string& k, double def) {
        used_.insert(k);
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_number()) schema_error(at(k), "expected a number");
        double x = v.get<double>();
        if (!std::isfinite(x)) schema_error(at(k), "must be finite");
        return x;
    }

    std::optional<double> opt_num(const std::string& k) {
        if (!has(k)) {
            used_.insert(k);
            return std::nullopt;
        }
        return num(k, 0.0);
    }

    long long integer(const std::string& k, long long def) {
        used_.insert(k);
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_number_integer()) schema_error(at(k), "expected an integer");
        return v.get<long long>();
    }

    std::uint64_t unsigned_int(const std::string& k, std::uint64_t def) {
        used_.insert(k);
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_number_unsigned()) schema_error(at(k), "expected a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    std::string str(const std::string& k, const std::string& def, std::initializer_list<const char*> allowed = {}) {
        used_.insert(k);
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_string()) schema_error(at(k), "expected a string");
        std::string s = v.get<std::string>();
        if (allowed.size() > 0) {
            bool ok = false;
            std::string list;
            for (const char* a : allowed) {
                ok = ok || s == a;
                list += (list.empty() ? "" : ", ") + std::string(a);
            }
            if (!ok) schema_error(at(k), "'" + s + "' is not one of " + list);
        }
        return s;
    }

    bool boolean(const std::string& k, bool def) {
        used_.insert(k);
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_boolean()) schema_error(at(k), "expected true or false");
        return v.get<bool>();
    }

    std::vector<double> numbers(const std::string& k, const std::vector<double>& def) {
        used_.insert(k);
        if (!has(k)) return def;
        const json& v = j_.at(k);
        if (!v.is_array()) schema_error(at(k), "expected an array of numbers");
        std::vector<double> out;
        for (size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) schema_error(at(k) + "/" + std::to_string(i), "expected a number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

    /// Rejects every key not consumed so far.
    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key())) schema_error(at(it.key()), "unknown key");
    }

    std::string at(const std::string& k) const { return path_ + "/" + k; }

private:
    static const json& empty() {
        static const json e = json::object();
        return e;
    }
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::string msg = e.what();
        auto pos = msg.find("parse error");
        std::string tail = msg;
        auto colon = msg.find(": ", pos == std::string::npos ? 0 : pos);
        if (colon != std::string::npos) tail = msg.substr(colon + 2);
        throw ConfigError("config syntax error at " + line_col(text, e.byte) + ": " + tail);
    }
    RunConfig c;
    Section root(j, "");
    long long ver = root.integer("schema_version", kSchemaVersion);
    if (ver != kSchemaVersion)
        schema_error("/schema_version", "unsupported version " + std::to_string(ver) + " (expected " +
                                            std::to_string(kSchemaVersion) + ")");
    c.schema_version = static_cast<int>(ver);

    {
        Section s = root.sub("grid");
        c.d = static_cast<int>(s.integer("d", c.d));
        c.n = static_cast<int>(s.integer("n", c.n));
        if (c.d != 1 && c.d != 2) schema_error(s.at("d"), "dimension must be 1 or 2");
        if (c.n < 1) schema_error(s.at("n"), "need at least one interior node");
        s.done();
    }
    {
        Section s = root.sub("model");
        c.model = s.str("kind", c.model, {"porous_media", "phi_laplace", "subdifferential"});
        c.graph = s.str("graph", c.graph);
        try {
            parse_graph(c.graph);
        } catch (const Error& e) {
            schema_error(s.at("graph"), e.what());
        }
        c.p = s.num("p", c.p);
        c.alpha = s.num("alpha", c.p);
        if (!(c.p > 1.0)) schema_error(s.at("p"), "exponent must exceed 1");
        if (!(c.alpha > 1.0)) schema_error(s.at("alpha"), "gauge must exceed 1");
        s.done();
    }
    {
        Section s = root.sub("drift");
        c.drift = s.str("kind", c.drift, {"zero", "reaction_diffusion"});
        c.reaction = s.str("reaction", c.reaction, {"none", "linear", "cubic"});
        c.reaction_a = s.num("a", c.reaction_a);
        s.done();
    }
    {
        Section s = root.sub("noise");
        if (s.has("modes")) {
            const json& m = s.raw("modes");
            if (!m.is_array()) schema_error(s.at("modes"), "expected an array of {c, gamma}");
            for (size_t i = 0; i < m.size(); ++i) {
                Section ms(m[i], s.at("modes") + "/" + std::to_string(i));
                NoiseModel::Mode mode;
                mode.c = ms.num("c", 0.0);
                mode.gamma = ms.num("gamma", 0.0);
                if (mode.gamma < 0.0) schema_error(ms.at("gamma"), "decay rate must be nonnegative");
                ms.done();
                c.noise.push_back(mode);
            }
        } else {
            s.mark("modes");
        }
        s.done();
    }
    {
        Section s = root.sub("initial");
        c.initial = s.str("kind", c.initial, {"sine", "values", "zero"});
        c.amplitude = s.num("amplitude", c.amplitude);
        c.initial_values = s.numbers("values", c.initial_values);
        s.done();
    }
    {
        Section s = root.sub("time");
        c.T = s.num("T", c.T);
        c.dt = s.num("dt", c.dt);
        c.mu = s.num("mu", c.mu);
        c.scheme = s.str("scheme", c.scheme, {"explicit", "semi-implicit-linear", "implicit"});
        c.epsilon = s.num("epsilon", c.epsilon);
        c.record_stride = static_cast<int>(s.integer("record_stride", c.record_stride));
        c.snapshots = s.boolean("snapshots", c.snapshots);
        if (!(c.T > 0.0)) schema_error(s.at("T"), "horizon must be positive");
        if (!(c.dt > 0.0)) schema_error(s.at("dt"), "step must be positive");
        if (!(c.mu > 0.0)) schema_error(s.at("mu"), "regularization must be positive");
        if (c.record_stride < 1) schema_error(s.at("record_stride"), "must be at least 1");
        s.done();
    }
    c.seed = root.unsigned_int("seed", c.seed);
    {
        Section s = root.sub("simulate");
        c.trajectories = static_cast<int>(s.integer("trajectories", c.trajectories));
        c.trajectory_output = s.str("output", c.trajectory_output, {"combined", "per_trajectory"});
        if (c.trajectories < 1) schema_error(s.at("trajectories"), "must be at least 1");
        s.done();
    }
    {
        Section s = root.sub("extinction");
        c.extinction_N = static_cast<int>(s.integer("N", c.extinction_N));
        c.extinction_checkpoints = static_cast<int>(s.integer("checkpoints", c.extinction_checkpoints));
        c.c0 = s.opt_num("c0");
        c.target_floor = s.opt_num("target_floor");
        c.epsilon_sensitivity = s.boolean("epsilon_sensitivity", c.epsilon_sensitivity);
        if (c.extinction_checkpoints < 1) schema_error(s.at("checkpoints"), "must be at least 1");
        if (c.c0 && !(*c.c0 > 0.0)) schema_error(s.at("c0"), "must be positive");
        if (c.target_floor && !(*c.target_floor < 1.0)) schema_error(s.at("target_floor"), "must be below 1");
        s.done();
    }
    {
        Section s = root.sub("sweep");
        c.sweep_mus = s.numbers("mus", c.sweep_mus);
        c.sweep_N = static_cast<int>(s.integer("N", c.sweep_N));
        c.sweep_checkpoints = s.numbers("checkpoints", c.sweep_checkpoints);
        if (c.sweep_N < 1) schema_error(s.at("N"), "must be at least 1");
        s.done();
    }
    root.done();
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

ojson to_json(const RunConfig& c) {
    ojson j;
    j["schema_version"] = c.schema_version;
    j["grid"] = {{"d", c.d}, {"n", c.n}};
    j["model"] = {{"kind", c.model}, {"graph", c.graph}, {"p", c.p}, {"alpha", c.alpha}};
    j["drift"] = {{"kind", c.drift}, {"reaction", c.reaction}, {"a", c.reaction_a}};
    ojson modes = ojson::array();
    for (const auto& m : c.noise) modes.push_back({{"c", m.c}, {"gamma", m.gamma}});
    j["noise"] = {{"modes", modes}};
    j["initial"] = {{"kind", c.initial}, {"amplitude", c.amplitude}, {"values", c.initial_values}};
    j["time"] = {{"T", c.T},
                 {"dt", c.dt},
                 {"mu", c.mu},
                 {"scheme", c.scheme},
                 {"epsilon", c.epsilon},
                 {"record_stride", c.record_stride},
                 {"snapshots", c.snapshots}};
    j["seed"] = c.seed;
    j["simulate"] = {{"trajectories", c.trajectories}, {"output", c.trajectory_output}};
    ojson ext = {{"N", c.extinction_N}, {"checkpoints", c.extinction_checkpoints}};
    ext["c0"] = c.c0 ? ojson(*c.c0) : ojson(nullptr);
    ext["target_floor"] = c.target_floor ? ojson(*c.target_floor) : ojson(nullptr);
    ext["epsilon_sensitivity"] = c.epsilon_sensitivity;
    j["extinction"] = ext;
    j["sweep"] = {{"mus", c.sweep_mus}, {"N", c.sweep_N}, {"checkpoints", c.sweep_checkpoints}};
    return j;
}

std::string serialize(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

Field build_initial(const RunConfig& c, const Grid& g) {
    if (c.initial == "zero") return Field(g);
    if (c.initial == "values") {
        if (static_cast<int>(c.initial_values.size()) != g.size())
            throw ConfigError("config /initial/values: expected " + std::to_string(g.size()) + " values, got " +
                              std::to_string(c.initial_values.size()));
        Vec v(g.size());
        for (int i = 0; i < g.size(); ++i) v[i] = c.initial_values[static_cast<size_t>(i)];
        return Field(g, v);
    }
    return c.amplitude * sine_mode(g);
}

SimConfig build_sim_config(const RunConfig& c, std::optional<double> T) {
    Grid g(c.d, c.n);
    OperatorKind kind = operator_kind_from_string(c.model);
    GelfandTriple tr = kind == OperatorKind::PorousMedia ? GelfandTriple::porous_media(c.p, c.alpha)
                                                         : GelfandTriple::phi_laplace(c.p, c.alpha);
    SimConfig s;
    s.op = MultiValuedOperator(kind, parse_graph(c.graph), tr, g);
    if (c.drift == "reaction_diffusion") {
        Reaction r;
        r.kind = c.reaction == "linear" ? Reaction::Kind::Linear
                 : c.reaction == "cubic" ? Reaction::Kind::Cubic
                                         : Reaction::Kind::None;
        r.a = c.reaction_a;
        s.drift = SingleValuedDrift::reaction_diffusion(r);
    }
    s.noise.modes = c.noise;
    s.x = build_initial(c, g);
    s.T = T ? *T : c.T;
    s.dt = c.dt;
    s.mu = c.mu;
    s.scheme = scheme_from_string(c.scheme);
    s.epsilon = c.epsilon;
    s.record_stride = c.record_stride;
    s.snapshots = c.snapshots;
    s.seed = c.seed;
    validate(s);
    return s;
}

}  // namespace yosida
