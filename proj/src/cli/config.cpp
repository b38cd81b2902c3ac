#include "degsde/cli.hpp"
#include "degsde/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace degsde::cli {

namespace pt = boost::property_tree;

namespace {

std::string trim(std::string s) {
    const char* ws = " \t\r\n";
    s.erase(0, s.find_first_not_of(ws));
    s.erase(s.find_last_not_of(ws) + 1);
    return s;
}

double parse_number(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        double x = std::stod(v, &used);
        if (trim(v.substr(used)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError(key, "expected a number, got '" + v + "'");
}

std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(tok);
    }
    return out;
}

const std::vector<std::string> kKinds = {"kinetic", "second_order", "wave"};

}  // namespace

std::string ScenarioConfig::str(const std::string& key, const std::string& fallback) const {
    auto it = entries.find(key);
    return it == entries.end() ? fallback : it->second;
}

std::string ScenarioConfig::str(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end() || it->second.empty()) throw ConfigError(key, "missing");
    return it->second;
}

double ScenarioConfig::num(const std::string& key, double fallback) const {
    auto it = entries.find(key);
    return it == entries.end() ? fallback : parse_number(key, it->second);
}

long ScenarioConfig::integer(const std::string& key, long fallback) const {
    const double x = num(key, static_cast<double>(fallback));
    if (x != std::floor(x)) throw ConfigError(key, "expected an integer");
    return static_cast<long>(x);
}

std::vector<double> ScenarioConfig::list(const std::string& key, std::vector<double> fallback) const {
    auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    std::vector<double> out;
    for (const auto& t : split(it->second)) out.push_back(parse_number(key, t));
    if (out.empty()) throw ConfigError(key, "empty list");
    return out;
}

std::vector<std::string> ScenarioConfig::words(const std::string& key, std::vector<std::string> fallback) const {
    auto it = entries.find(key);
    if (it == entries.end()) return fallback;
    return split(it->second);
}

std::uint64_t ScenarioConfig::seed() const {
    auto it = entries.find("experiment.seed");
    if (it == entries.end() || it->second.empty())
        throw ConfigError("experiment.seed", "missing; every run needs an explicit seed");
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(it->second, &used);
        if (trim(it->second.substr(used)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("experiment.seed", "expected a non-negative integer, got '" + it->second + "'");
}

std::string ScenarioConfig::output_dir() const {
    if (const char* env = std::getenv("DEGSDE_OUTPUT_DIR"); env && *env) return env;
    return str("output.dir", "out");
}

std::vector<std::string> ScenarioConfig::formats() const {
    auto f = words("output.formats", {"csv"});
    for (const auto& x : f)
        if (x != "csv" && x != "bin") throw ConfigError("output.formats", "unknown format '" + x + "'");
    return f;
}

ScenarioConfig parse_config(const std::string& text, const std::string& source) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source + ":" + std::to_string(e.line()), e.message());
    }
    ScenarioConfig cfg;
    cfg.source = source;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError(section, "keys must live inside a [section]");
        for (const auto& [key, value] : body) cfg.entries[section + "." + key] = trim(value.data());
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path);
}

void validate_config(const ScenarioConfig& cfg) {
    const std::string sc = cfg.scenario();
    bool known = false;
    for (const auto& s : scenarios()) known = known || s.name == sc;
    if (!known) throw ConfigError("experiment.scenario", "unknown scenario '" + sc + "'");
    (void)cfg.seed();
    const std::string kind = cfg.str("model.kind");
    if (std::find(kKinds.begin(), kKinds.end(), kind) == kKinds.end())
        throw ConfigError("model.kind", "unknown model kind '" + kind + "'");
    const auto fams = model::drift_families();
    const std::string fam = cfg.str("drift.family", "zero");
    if (std::find(fams.begin(), fams.end(), fam) == fams.end())
        throw ConfigError("drift.family", "unknown drift family '" + fam + "'");
    if (cfg.has("drift.modulus")) {
        try {
            model::parse_family(cfg.str("drift.modulus"));
        } catch (const Error&) {
            throw ConfigError("drift.modulus", "unknown modulus family '" + cfg.str("drift.modulus") + "'");
        }
    }
    for (const auto& [key, value] : cfg.entries) {
        const auto dot = key.find('.');
        const std::string name = key.substr(dot + 1);
        if (key.rfind("experiment.", 0) == 0 && (name.rfind("n_", 0) == 0 || name == "T" || name == "lambda")) {
            for (double x : cfg.list(key, {}))
                if (!(x > 0)) throw ConfigError(key, "must be positive");
        }
    }
    (void)cfg.formats();
}

model::Example build_model(const ScenarioConfig& cfg) {
    model::ExampleParams p;
    const std::string kind = cfg.str("model.kind");
    p.dim = static_cast<int>(cfg.integer("model.dim", 1));
    p.theta = cfg.num("model.theta", 1.0);
    p.d_space = static_cast<int>(cfg.integer("model.d_space", 1));
    p.n_modes = static_cast<int>(cfg.integer("model.n_modes", 16));
    if (cfg.has("model.delta")) p.delta = cfg.num("model.delta", 0.5);
    const Mat I = Mat::Identity(p.dim, p.dim);
    if (cfg.has("model.a1")) p.A1 = cfg.num("model.a1", 0.0) * I;
    if (cfg.has("model.a2")) p.A2 = cfg.num("model.a2", 0.0) * I;
    if (cfg.has("model.b")) p.B = cfg.num("model.b", 1.0) * I;
    if (cfg.has("model.a0")) p.A0 = cfg.num("model.a0", 0.0) * I;
    if (cfg.has("model.sigma")) p.sigma = cfg.num("model.sigma", 1.0) * I;
    p.drift = cfg.str("drift.family", "zero");
    auto& dp = p.drift_params;
    dp.amplitude = cfg.num("drift.amplitude", 1.0);
    dp.alpha = cfg.num("drift.alpha", 0.75);
    dp.eps = cfg.num("drift.eps", 0.05);
    dp.power = cfg.num("drift.power", 0.25);
    if (cfg.has("drift.modulus")) {
        const auto fam = model::parse_family(cfg.str("drift.modulus"));
        const double K = cfg.num("drift.modulus_K", 1.0);
        switch (fam) {
            case model::ModulusFamily::power: dp.phi = model::Modulus::power(K, cfg.num("drift.modulus_alpha", 0.5)); break;
            case model::ModulusFamily::log_power:
                dp.phi = model::Modulus::log_power(K, cfg.num("drift.modulus_r", 1.0), cfg.num("drift.modulus_c", 0.0));
                break;
            case model::ModulusFamily::log_sqrt: dp.phi = model::Modulus::log_sqrt(K, cfg.num("drift.modulus_c", 0.0)); break;
            default: throw ConfigError("drift.modulus", "only power, log_power and log_sqrt can be configured");
        }
    }
    if (cfg.has("drift.constant")) {
        auto c = cfg.list("drift.constant", {});
        dp.constant = Eigen::Map<const Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
    }
    return model::build_example(kind, p);
}

}  // namespace degsde::cli
