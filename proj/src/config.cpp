#include "rfsde/config.hpp"

#include "rfsde/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace rfsde {

namespace {

using nlohmann::json;

const std::set<std::string> kTopLevelKeys{
    "H",       "T",         "n",            "x0",   "drift",      "tube",                 "kernel",
    "epsilons", "bandwidth", "replications", "seed", "eval_times", "increment_convention",
};

[[noreturn]] void bad(const std::string& key, const std::string& what)
{
    throw ConfigError("config key '" + key + "': " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ConfigError("unknown config key '" + prefix + it.key() + "'");
}

double number(const json& j, const std::string& key)
{
    if (!j.is_number()) bad(key, "expected a number");
    return j.get<double>();
}

std::size_t count(const json& j, const std::string& key)
{
    if (!j.is_number_integer() || j.get<long long>() < 0) bad(key, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

// DSL failures are reported with the key they came from.
dsl::FunctionSpec function(const std::string& key, const std::string& source, const std::string& var,
                           std::optional<double> lipschitz = std::nullopt)
{
    try {
        return dsl::FunctionSpec(source, var, lipschitz);
    } catch (const dsl::ParseError& e) {
        throw dsl::ParseError("config key '" + key + "': " + e.what(), e.offset(), e.expected());
    }
}

} // namespace

LoadedConfig parse_config(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, kTopLevelKeys, "");

    LoadedConfig out;
    ExperimentConfig& cfg = out.config;
    json canon;

    if (doc.contains("H")) cfg.H = number(doc["H"], "H");
    if (doc.contains("T")) cfg.T = number(doc["T"], "T");
    if (doc.contains("n")) cfg.n = count(doc["n"], "n");
    if (doc.contains("x0")) cfg.x0 = number(doc["x0"], "x0");
    canon["H"] = cfg.H;
    canon["T"] = cfg.T;
    canon["n"] = cfg.n;
    canon["x0"] = cfg.x0;

    if (doc.contains("drift")) {
        const json& d = doc["drift"];
        std::string src;
        std::optional<double> lip;
        if (d.is_string()) {
            src = d.get<std::string>();
        } else if (d.is_object()) {
            reject_unknown(d, {"expr", "lipschitz"}, "drift.");
            if (!d.contains("expr") || !d["expr"].is_string()) bad("drift.expr", "expected a string");
            src = d["expr"].get<std::string>();
            if (d.contains("lipschitz")) lip = number(d["lipschitz"], "drift.lipschitz");
        } else {
            bad("drift", "expected a string or {expr, lipschitz}");
        }
        cfg.drift = function("drift", src, "x", lip);
    }
    canon["drift"] = {{"expr", cfg.drift.source()}};
    if (cfg.drift.declared_lipschitz()) canon["drift"]["lipschitz"] = *cfg.drift.declared_lipschitz();

    if (doc.contains("tube")) {
        const json& t = doc["tube"];
        if (!t.is_object()) bad("tube", "expected {lower, upper}");
        reject_unknown(t, {"lower", "upper"}, "tube.");
        for (const char* side : {"lower", "upper"})
            if (!t.contains(side) || !t[side].is_string()) bad(std::string("tube.") + side, "expected a string");
        cfg.tube = TubeSpec(function("tube.lower", t["lower"].get<std::string>(), "t"),
                            function("tube.upper", t["upper"].get<std::string>(), "t"));
    }
    canon["tube"] = {{"lower", cfg.tube.lower().source()}, {"upper", cfg.tube.upper().source()}};

    if (doc.contains("kernel")) {
        const json& k = doc["kernel"];
        std::string name;
        double scale = 1.0;
        if (k.is_string()) {
            name = k.get<std::string>();
        } else if (k.is_object()) {
            reject_unknown(k, {"name", "scale"}, "kernel.");
            if (!k.contains("name") || !k["name"].is_string()) bad("kernel.name", "expected a string");
            name = k["name"].get<std::string>();
            if (k.contains("scale")) scale = number(k["scale"], "kernel.scale");
        } else {
            bad("kernel", "expected a name or {name, scale}");
        }
        try {
            cfg.kernel = kernel_from_name(name, scale);
        } catch (const ConfigError& e) {
            bad("kernel", e.what());
        }
    }
    canon["kernel"] = {{"name", kernel_name(cfg.kernel.family)}, {"scale", cfg.kernel.scale}};

    if (doc.contains("epsilons")) {
        const json& e = doc["epsilons"];
        if (!e.is_array()) bad("epsilons", "expected an array of numbers");
        cfg.epsilons.clear();
        for (const auto& v : e) cfg.epsilons.push_back(number(v, "epsilons"));
    }
    canon["epsilons"] = cfg.epsilons;

    if (doc.contains("bandwidth")) {
        const json& b = doc["bandwidth"];
        std::string rule;
        if (b.is_string()) {
            rule = b.get<std::string>();
        } else if (b.is_object()) {
            reject_unknown(b, {"rule", "value"}, "bandwidth.");
            if (!b.contains("rule") || !b["rule"].is_string()) bad("bandwidth.rule", "expected a string");
            rule = b["rule"].get<std::string>();
            if (b.contains("value")) cfg.fixed_bandwidth = number(b["value"], "bandwidth.value");
        } else {
            bad("bandwidth", "expected \"power\" or {rule, value}");
        }
        if (rule == "power") {
            cfg.bandwidth_rule = BandwidthRule::power;
        } else if (rule == "fixed") {
            cfg.bandwidth_rule = BandwidthRule::fixed;
            if (!(b.is_object() && b.contains("value"))) bad("bandwidth.value", "required for the fixed rule");
        } else {
            bad("bandwidth.rule", "expected 'power' or 'fixed', got '" + rule + "'");
        }
    }
    if (cfg.bandwidth_rule == BandwidthRule::power)
        canon["bandwidth"] = {{"rule", "power"}};
    else
        canon["bandwidth"] = {{"rule", "fixed"}, {"value", cfg.fixed_bandwidth}};

    if (doc.contains("replications")) cfg.replications = count(doc["replications"], "replications");
    canon["replications"] = cfg.replications;

    if (doc.contains("seed")) {
        const json& s = doc["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            bad("seed", "expected a nonnegative integer");
        cfg.master_seed = s.get<std::uint64_t>();
    }
    canon["seed"] = cfg.master_seed;

    if (doc.contains("eval_times")) {
        const json& e = doc["eval_times"];
        if (e.is_string() && e.get<std::string>() == "default") {
            cfg.eval_times.clear();
        } else if (e.is_array()) {
            for (const auto& v : e) cfg.eval_times.push_back(number(v, "eval_times"));
        } else {
            bad("eval_times", "expected an array of times or \"default\"");
        }
    }
    if (cfg.eval_times.empty())
        canon["eval_times"] = "default";
    else
        canon["eval_times"] = cfg.eval_times;

    if (doc.contains("increment_convention")) {
        const json& c = doc["increment_convention"];
        const std::string v = c.is_string() ? c.get<std::string>() : std::string();
        if (v == "midpoint")
            cfg.convention = IncrementConvention::midpoint;
        else if (v == "left")
            cfg.convention = IncrementConvention::left;
        else
            bad("increment_convention", "expected 'midpoint' or 'left'");
    }
    canon["increment_convention"] = cfg.convention == IncrementConvention::midpoint ? "midpoint" : "left";

    try {
        validate(cfg);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }

    // Lipschitz cross-check over the range the state can visit.
    const Grid grid(cfg.T, cfg.n);
    const TubeTrace tr = trace_tube(cfg.tube, grid);
    out.warnings = cfg.drift.check_lipschitz(tr.lower.minCoeff(), tr.upper.maxCoeff());
    for (auto& w : cfg.tube.smoothness_warnings()) out.warnings.push_back(std::move(w));

    out.canonical = canon.dump();
    return out;
}

LoadedConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const dsl::ParseError&) {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

} // namespace rfsde
