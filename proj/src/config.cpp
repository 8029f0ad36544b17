#include "fixcon/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace fixcon {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg)
{
    throw ConfigError(where + ": " + msg);
}

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys)
{
    if (!j.is_object())
        fail(where, "expected an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k))
            fail(where, "unknown key '" + k + "'");
}

const json& require(const json& j, const char* key, const std::string& where)
{
    if (!j.contains(key))
        fail(where, std::string("missing key '") + key + "'");
    return j.at(key);
}

std::size_t parse_count(const json& j, const std::string& where)
{
    if (!j.is_number_integer() || j.get<long long>() < 0)
        fail(where, "expected a non-negative integer");
    return j.get<std::size_t>();
}

std::vector<double> parse_vector(const json& j, const std::string& where)
{
    if (!j.is_array())
        fail(where, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t k = 0; k < j.size(); ++k)
        v.push_back(parse_real(j[k], where + "[" + std::to_string(k) + "]"));
    return v;
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& where)
{
    if (!j.is_array() || j.empty())
        fail(where, "expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto row = parse_vector(j[static_cast<std::size_t>(r)], where + "[" + std::to_string(r) + "]");
        if (r == 0)
            m.resize(rows, static_cast<Eigen::Index>(row.size()));
        if (static_cast<Eigen::Index>(row.size()) != m.cols())
            fail(where, "rows have different lengths");
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

FactorFn parse_fn(const json& j, const std::string& where)
{
    const std::string s = j.get<std::string>();
    if (s == "id" || s == "identity")
        return FactorFn::Identity;
    if (s == "sin")
        return FactorFn::Sin;
    if (s == "cos")
        return FactorFn::Cos;
    fail(where, "unknown factor function '" + s + "' (expected id, sin or cos)");
}

const char* fn_name(FactorFn fn)
{
    switch (fn) {
    case FactorFn::Sin:
        return "sin";
    case FactorFn::Cos:
        return "cos";
    case FactorFn::Identity:
        break;
    }
    return "id";
}

StrictFeedbackModel parse_model(const json& j, const std::string& where)
{
    try {
        if (j.is_string())
            return builtin_model(j.get<std::string>());
        if (j.contains("builtin")) {
            allow_keys(j, where, {"builtin", "index"});
            const int index = j.contains("index") ? j.at("index").get<int>() : 0;
            return builtin_model(j.at("builtin").get<std::string>(), index);
        }
        allow_keys(j, where, {"layers", "disturbances", "disturbance_bounds"});
        const json& layers = require(j, "layers", where);
        if (!layers.is_array() || layers.empty())
            fail(where + ".layers", "expected a non-empty array of expressions");
        std::vector<Expression> f;
        for (std::size_t k = 0; k < layers.size(); ++k)
            f.push_back(parse_expression(layers[k], where + ".layers[" + std::to_string(k) + "]"));
        std::vector<Expression> d(f.size());
        if (j.contains("disturbances")) {
            const json& ds = j.at("disturbances");
            if (!ds.is_array() || ds.size() != f.size())
                fail(where + ".disturbances", "expected one expression per layer");
            for (std::size_t k = 0; k < ds.size(); ++k)
                d[k] = parse_expression(ds[k], where + ".disturbances[" + std::to_string(k) + "]");
        }
        std::vector<std::optional<double>> mag, rate;
        if (j.contains("disturbance_bounds")) {
            const json& b = j.at("disturbance_bounds");
            allow_keys(b, where + ".disturbance_bounds", {"magnitude", "rate"});
            auto read = [&](const char* key, std::vector<std::optional<double>>& out) {
                if (!b.contains(key))
                    return;
                for (const auto& v : b.at(key))
                    out.push_back(v.is_null() ? std::nullopt : std::optional<double>(parse_real(v, where)));
            };
            read("magnitude", mag);
            read("rate", rate);
        }
        return StrictFeedbackModel(std::move(f), std::move(d), std::move(mag), std::move(rate));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        fail(where, ex.what());
    }
}

ReferenceSignal parse_reference(const json& j, const std::string& where)
{
    try {
        if (j.is_string())
            return builtin_reference(j.get<std::string>());
        allow_keys(j, where, {"offset", "components"});
        const double offset = j.contains("offset") ? parse_real(j.at("offset"), where + ".offset") : 0.0;
        std::vector<ReferenceSignal::Component> comps;
        if (j.contains("components"))
            for (const auto& c : j.at("components")) {
                allow_keys(c, where + ".components", {"amplitude", "omega", "phase"});
                ReferenceSignal::Component comp;
                comp.amplitude = parse_real(require(c, "amplitude", where), where + ".amplitude");
                comp.omega = c.contains("omega") ? parse_real(c.at("omega"), where + ".omega") : 0.0;
                comp.phase = c.contains("phase") ? parse_real(c.at("phase"), where + ".phase") : 0.0;
                comps.push_back(comp);
            }
        return ReferenceSignal(offset, std::move(comps));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& ex) {
        fail(where, ex.what());
    }
}

LeaderSpec parse_leader(const json& j)
{
    const std::string where = "leader";
    allow_keys(j, where, {"mode", "model", "reference", "tracking_gains"});
    LeaderSpec l;
    const std::string mode = require(j, "mode", where).get<std::string>();
    if (mode == "passive")
        l.mode = LeaderMode::Passive;
    else if (mode == "active")
        l.mode = LeaderMode::Active;
    else if (mode == "reference")
        l.mode = LeaderMode::Reference;
    else
        fail(where + ".mode", "expected passive, active or reference");
    if (j.contains("model"))
        l.model = parse_model(j.at("model"), where + ".model");
    if (j.contains("reference"))
        l.reference = parse_reference(j.at("reference"), where + ".reference");
    else if (l.mode != LeaderMode::Passive)
        fail(where, "active and reference leaders need a 'reference'");
    if (j.contains("tracking_gains"))
        l.tracking_gains = parse_vector(j.at("tracking_gains"), where + ".tracking_gains");
    return l;
}

GainMatrix parse_gain_matrix(const json& j, const std::string& where)
{
    if (j.is_array())
        return GainMatrix(parse_matrix(j, where));
    return GainMatrix(parse_real(j, where));
}

void apply_gain_fields(StepGains& g, const json& j, const std::string& where, bool allow_selectors)
{
    const std::pair<const char*, double StepGains::*> scalars[] = {
        {"k", &StepGains::k},
        {"k_p", &StepGains::k_p},
        {"k_q", &StepGains::k_q},
        {"sigma_1c", &StepGains::sigma_1c},
        {"sigma_2c", &StepGains::sigma_2c},
        {"sigma_3c", &StepGains::sigma_3c},
        {"sigma_1a", &StepGains::sigma_1a},
        {"sigma_2a", &StepGains::sigma_2a},
        {"sigma_3a", &StepGains::sigma_3a},
        {"sigma_1theta", &StepGains::sigma_1theta},
        {"sigma_2theta", &StepGains::sigma_2theta},
        {"sigma_1d", &StepGains::sigma_1d},
        {"sigma_2d", &StepGains::sigma_2d},
        {"gamma_d", &StepGains::gamma_d},
        {"mu_d", &StepGains::mu_d},
    };
    const std::pair<const char*, GainMatrix StepGains::*> matrices[] = {
        {"gamma_c", &StepGains::gamma_c}, {"gamma_a", &StepGains::gamma_a}, {"gamma_theta", &StepGains::gamma_theta}};
    if (!j.is_object())
        fail(where, "expected an object of gain fields");
    for (const auto& [key, value] : j.items()) {
        if (allow_selectors && (key == "agent" || key == "step"))
            continue;
        bool found = false;
        for (const auto& [name, member] : scalars)
            if (key == name) {
                g.*member = parse_real(value, where + "." + key);
                found = true;
            }
        for (const auto& [name, member] : matrices)
            if (key == name) {
                g.*member = parse_gain_matrix(value, where + "." + key);
                found = true;
            }
        if (!found)
            fail(where, "unknown gain '" + key + "'");
    }
}

ControllerGains parse_gains(const json& j, std::size_t followers, std::size_t layers)
{
    const std::string where = "gains";
    allow_keys(j, where, {"exponents", "default", "steps", "overrides"});
    ControllerGains out;
    if (j.contains("exponents")) {
        const json& e = j.at("exponents");
        allow_keys(e, where + ".exponents", {"p", "q"});
        if (e.contains("p"))
            out.exponents.p = parse_real(e.at("p"), where + ".exponents.p");
        if (e.contains("q"))
            out.exponents.q = parse_real(e.at("q"), where + ".exponents.q");
    }
    try {
        check_exponents(out.exponents);
    } catch (const std::exception& ex) {
        fail(where + ".exponents", ex.what());
    }

    StepGains base;
    if (j.contains("default"))
        apply_gain_fields(base, j.at("default"), where + ".default", false);
    std::vector<StepGains> per_step(layers, base);
    if (j.contains("steps")) {
        const json& steps = j.at("steps");
        if (!steps.is_array() || steps.size() > layers)
            fail(where + ".steps", "expected at most one entry per layer");
        for (std::size_t s = 0; s < steps.size(); ++s)
            apply_gain_fields(per_step[s], steps[s], where + ".steps[" + std::to_string(s) + "]", false);
    }
    out.per_agent.assign(followers, per_step);

    if (j.contains("overrides")) {
        const json& ov = j.at("overrides");
        if (!ov.is_array())
            fail(where + ".overrides", "expected an array");
        for (std::size_t k = 0; k < ov.size(); ++k) {
            const std::string w = where + ".overrides[" + std::to_string(k) + "]";
            const json& o = ov[k];
            if (!o.is_object())
                fail(w, "expected an object");
            // agent and step are 1-based; omitted means all.
            std::optional<std::size_t> agent, step;
            if (o.contains("agent"))
                agent = parse_count(o.at("agent"), w + ".agent");
            if (o.contains("step"))
                step = parse_count(o.at("step"), w + ".step");
            if (agent && (*agent == 0 || *agent > followers))
                fail(w + ".agent", "out of range 1.." + std::to_string(followers));
            if (step && (*step == 0 || *step > layers))
                fail(w + ".step", "out of range 1.." + std::to_string(layers));
            for (std::size_t i = 0; i < followers; ++i)
                for (std::size_t s = 0; s < layers; ++s)
                    if ((!agent || *agent == i + 1) && (!step || *step == s + 1))
                        apply_gain_fields(out.per_agent[i][s], o, w, true);
        }
    }
    for (std::size_t i = 0; i < followers; ++i)
        for (std::size_t s = 0; s < layers; ++s)
            try {
                check_gain_signs(out.per_agent[i][s]);
            } catch (const std::exception& ex) {
                fail(where, "agent " + std::to_string(i + 1) + " step " + std::to_string(s + 1) + ": " + ex.what());
            }
    return out;
}

BasisSpec parse_basis(const json& j, const std::string& where)
{
    allow_keys(j, where, {"neurons", "range", "width"});
    BasisSpec b;
    if (j.contains("neurons"))
        b.neurons = parse_count(j.at("neurons"), where + ".neurons");
    if (j.contains("range")) {
        const auto r = parse_vector(j.at("range"), where + ".range");
        if (r.size() != 2 || !(r[0] <= r[1]))
            fail(where + ".range", "expected [lo, hi] with lo <= hi");
        b.lo = r[0];
        b.hi = r[1];
    }
    if (j.contains("width"))
        b.width = parse_real(j.at("width"), where + ".width");
    if (b.neurons == 0)
        fail(where + ".neurons", "must be at least 1");
    if (!(b.width > 0.0))
        fail(where + ".width", "must be positive");
    return b;
}

}  // namespace

double parse_real(const json& j, const std::string& where)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        const auto slash = s.find('/');
        try {
            std::size_t used = 0;
            if (slash == std::string::npos) {
                const double v = std::stod(s, &used);
                if (used == s.size())
                    return v;
            } else {
                const std::string num = s.substr(0, slash);
                const std::string den = s.substr(slash + 1);
                std::size_t un = 0, ud = 0;
                const double n = std::stod(num, &un);
                const double d = std::stod(den, &ud);
                if (un == num.size() && ud == den.size() && d != 0.0)
                    return n / d;
            }
        } catch (const std::exception&) {
        }
        fail(where, "cannot parse '" + s + "' as a number");
    }
    fail(where, "expected a number");
}

Expression parse_expression(const json& j, const std::string& where)
{
    if (j.is_number() || j.is_string())
        return Expression::constant(parse_real(j, where));
    allow_keys(j, where, {"terms"});
    std::vector<Term> terms;
    const json& ts = require(j, "terms", where);
    if (!ts.is_array())
        fail(where + ".terms", "expected an array");
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const std::string w = where + ".terms[" + std::to_string(k) + "]";
        allow_keys(ts[k], w, {"coeff", "factors"});
        Term t;
        t.coeff = ts[k].contains("coeff") ? parse_real(ts[k].at("coeff"), w + ".coeff") : 1.0;
        if (ts[k].contains("factors"))
            for (const auto& f : ts[k].at("factors")) {
                allow_keys(f, w + ".factors", {"fn", "var", "scale", "offset", "power"});
                Factor fac;
                if (f.contains("fn"))
                    fac.fn = parse_fn(f.at("fn"), w);
                fac.var = parse_count(require(f, "var", w), w + ".var");
                if (f.contains("scale"))
                    fac.scale = parse_real(f.at("scale"), w + ".scale");
                if (f.contains("offset"))
                    fac.offset = parse_real(f.at("offset"), w + ".offset");
                if (f.contains("power"))
                    fac.power = static_cast<int>(parse_count(f.at("power"), w + ".power"));
                t.factors.push_back(fac);
            }
        terms.push_back(std::move(t));
    }
    try {
        return Expression(std::move(terms));
    } catch (const std::exception& ex) {
        fail(where, ex.what());
    }
}

json expression_to_json(const Expression& e)
{
    json terms = json::array();
    for (const auto& t : e.terms()) {
        json factors = json::array();
        for (const auto& f : t.factors)
            factors.push_back(
                {{"fn", fn_name(f.fn)}, {"var", f.var}, {"scale", f.scale}, {"offset", f.offset}, {"power", f.power}});
        terms.push_back({{"coeff", t.coeff}, {"factors", factors}});
    }
    return {{"terms", terms}};
}

json load_config_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& ex) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + ex.what());
    }
}

void apply_override(json& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }

    json* node = &config;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.'))
        parts.push_back(part);
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const std::string& key = parts[k];
        const bool last = k + 1 == parts.size();
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(key);
            } catch (const std::exception&) {
                throw ConfigError("override '" + path + "': '" + key + "' is not an array index");
            }
            if (idx >= node->size())
                throw ConfigError("override '" + path + "': index " + key + " out of range");
            node = &(*node)[idx];
        } else {
            if (node->is_null())
                *node = json::object();
            if (!node->is_object())
                throw ConfigError("override '" + path + "': '" + key + "' addresses into a scalar");
            node = &(*node)[key];
        }
        if (last)
            *node = value;
    }
}

ExperimentConfig parse_config(const json& j)
{
    allow_keys(j, "config", {"name", "description", "topology", "leader", "models", "gains", "bases", "sim", "initial",
                             "analysis"});
    const std::string name = j.contains("name") ? j.at("name").get<std::string>() : "experiment";
    AnalysisOptions analysis;

    const json& topo = require(j, "topology", "config");
    allow_keys(topo, "topology", {"adjacency", "leader_weights"});
    const Eigen::MatrixXd adjacency = parse_matrix(require(topo, "adjacency", "topology"), "topology.adjacency");
    const auto b = parse_vector(require(topo, "leader_weights", "topology"), "topology.leader_weights");
    Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    std::optional<Topology> topology;
    try {
        topology.emplace(adjacency, bv);
    } catch (const std::exception& ex) {
        fail("topology", ex.what());
    }
    const std::size_t followers = topology->followers();

    const LeaderSpec leader = parse_leader(require(j, "leader", "config"));

    const json& models = require(j, "models", "config");
    allow_keys(models, "models", {"followers"});
    const json& fm = require(models, "followers", "models");
    if (!fm.is_array() || fm.size() != followers)
        fail("models.followers", "expected one model per follower (" + std::to_string(followers) + ")");
    std::vector<StrictFeedbackModel> follower_models;
    for (std::size_t i = 0; i < fm.size(); ++i)
        follower_models.push_back(parse_model(fm[i], "models.followers[" + std::to_string(i) + "]"));
    const std::size_t layers = follower_models.front().layers();

    ControllerGains gains = parse_gains(j.contains("gains") ? j.at("gains") : json::object(), followers, layers);

    BasisSpec critic_actor, theta;
    if (j.contains("bases")) {
        const json& bs = j.at("bases");
        allow_keys(bs, "bases", {"critic_actor", "theta"});
        if (bs.contains("critic_actor"))
            critic_actor = parse_basis(bs.at("critic_actor"), "bases.critic_actor");
        theta = bs.contains("theta") ? parse_basis(bs.at("theta"), "bases.theta") : critic_actor;
    }

    const json& sim = require(j, "sim", "config");
    allow_keys(sim, "sim", {"dt", "horizon", "record_stride", "divergence_limit", "warmup"});
    const double dt = parse_real(require(sim, "dt", "sim"), "sim.dt");
    const double horizon = parse_real(require(sim, "horizon", "sim"), "sim.horizon");
    const std::size_t stride = sim.contains("record_stride") ? parse_count(sim.at("record_stride"), "sim.record_stride") : 1;
    const double limit = sim.contains("divergence_limit") ? parse_real(sim.at("divergence_limit"), "sim.divergence_limit")
                                                          : 1e9;

    std::vector<SimulationConfig::StepPhase> warmup;
    if (sim.contains("warmup")) {
        const json& ws = sim.at("warmup");
        if (!ws.is_array())
            fail("sim.warmup", "expected an array of {dt, until} phases");
        for (std::size_t k = 0; k < ws.size(); ++k) {
            const std::string w = "sim.warmup[" + std::to_string(k) + "]";
            allow_keys(ws[k], w, {"dt", "until"});
            warmup.push_back({parse_real(require(ws[k], "dt", w), w + ".dt"),
                              parse_real(require(ws[k], "until", w), w + ".until")});
        }
    }

    const json& ic = require(j, "initial", "config");
    allow_keys(ic, "initial", {"leader", "followers", "weight_init", "output_scale", "align_virtual_controls"});
    InitialConditions init;
    if (ic.contains("leader"))
        init.leader = parse_vector(ic.at("leader"), "initial.leader");
    const json& fx = require(ic, "followers", "initial");
    if (!fx.is_array())
        fail("initial.followers", "expected an array of state vectors");
    for (std::size_t i = 0; i < fx.size(); ++i)
        init.followers.push_back(parse_vector(fx[i], "initial.followers[" + std::to_string(i) + "]"));
    if (ic.contains("weight_init"))
        init.weight_init = parse_real(ic.at("weight_init"), "initial.weight_init");
    if (ic.contains("align_virtual_controls"))
        init.align_virtual_controls = ic.at("align_virtual_controls").get<bool>();
    if (ic.contains("output_scale"))
        init.output_scale = parse_real(ic.at("output_scale"), "initial.output_scale");

    if (j.contains("analysis")) {
        const json& a = j.at("analysis");
        allow_keys(a, "analysis", {"settling_threshold", "vartheta", "c_aggregate"});
        if (a.contains("settling_threshold"))
            analysis.settling_threshold = parse_real(a.at("settling_threshold"), "analysis.settling_threshold");
        if (a.contains("vartheta"))
            analysis.vartheta = parse_real(a.at("vartheta"), "analysis.vartheta");
        if (a.contains("c_aggregate") && !a.at("c_aggregate").is_null())
            analysis.c_aggregate = parse_real(a.at("c_aggregate"), "analysis.c_aggregate");
        if (!(analysis.settling_threshold > 0.0))
            fail("analysis.settling_threshold", "must be positive");
        if (!(analysis.vartheta > 0.0 && analysis.vartheta < 1.0))
            fail("analysis.vartheta", "must lie in (0,1)");
    }

    SimulationConfig sim_config{
        .topology = std::move(*topology),
        .leader = leader,
        .followers = std::move(follower_models),
        .gains = std::move(gains),
        .critic_actor_basis = critic_actor,
        .theta_basis = theta,
        .dt = dt,
        .horizon = horizon,
        .warmup = std::move(warmup),
        .initial = std::move(init),
        .record_stride = stride,
        .divergence_limit = limit,
    };
    try {
        sim_config.validate();
    } catch (const std::exception& ex) {
        fail("config", ex.what());
    }
    return ExperimentConfig{name, std::move(sim_config), analysis, j};
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    json j = load_config_json(path);
    for (const auto& o : overrides)
        apply_override(j, o);
    return parse_config(j);
}

}  // namespace fixcon
