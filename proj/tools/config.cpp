#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cradle::cli {

const std::vector<KeyDef>& known_keys() {
    static const std::vector<KeyDef> keys = {
        {"potential.alpha", KeyType::real, "1.5", "contact exponent alpha > 1"},
        {"potential.k_minus", KeyType::real, "1", "compression stiffness"},
        {"potential.k_plus", KeyType::real, "0", "extension stiffness"},
        {"potential.w_minus", KeyType::real, "0", "W coefficient under compression"},
        {"potential.w_plus", KeyType::real, "0", "W coefficient under extension"},
        {"potential.beta", KeyType::real, "inf", "W exponent offset (inf: no W)"},
        {"potential.g", KeyType::real, "0", "on-site coefficient"},
        {"potential.gamma", KeyType::real, "inf", "on-site exponent offset (inf: no phi)"},

        {"run.out", KeyType::text, "out", "output directory"},
        {"run.seed", KeyType::integer, "20240601", "seed for sample-time offsets"},
        {"run.jobs", KeyType::integer, "1", "worker threads for independent runs"},
        {"run.tol", KeyType::real, "1e-9", "integrator tolerance"},

        {"lattice.init", KeyType::text, "breather", "initial data: breather|impulse"},
        {"lattice.eps", KeyType::real, "0.1", "breather amplitude scale"},
        {"lattice.pad", KeyType::integer, "8", "zero sites added on each side"},
        {"lattice.t_end", KeyType::real, "100", "final time"},
        {"lattice.samples", KeyType::integer, "64", "output samples after t = 0"},
        {"lattice.boundary", KeyType::text, "free", "free|periodic"},
        {"lattice.csv", KeyType::text, "long", "long|norms"},

        {"dps.init", KeyType::text, "breather", "initial data: breather|impulse"},
        {"dps.eps", KeyType::real, "1", "breather amplitude scale"},
        {"dps.pad", KeyType::integer, "8", "zero sites added on each side"},
        {"dps.tau_end", KeyType::real, "50", "final slow time"},
        {"dps.samples", KeyType::integer, "64", "output samples after tau = 0"},
        {"dps.boundary", KeyType::text, "free", "free|periodic"},

        {"breather.centering", KeyType::text, "site", "site|bond"},
        {"breather.half_width", KeyType::integer, "32", "truncation half width (>= 8)"},
        {"breather.damping", KeyType::real, "1", "initial Newton step fraction in (0, 1]"},
        {"breather.q", KeyType::real, "0.5", "decay certificate base in (0, 1)"},
        {"breather.export_loop", KeyType::boolean, "false", "also write the corrector loop of the profile"},

        {"ansatz.max_harmonic", KeyType::integer, "32", "retained fast-time harmonics"},
        {"ansatz.n_time_samples", KeyType::integer, "256", "fast-time samples per loop"},

        {"scaling.mode", KeyType::text, "error", "error|residual"},
        {"scaling.epsilons", KeyType::list, "0.2,0.1,0.05,0.025", "amplitude scales"},
        {"scaling.T", KeyType::real, "1", "slow-time horizon"},
        {"scaling.norm", KeyType::text, "inf", "1|2|inf"},
        {"scaling.pad", KeyType::integer, "8", "zero sites added on each side"},
        {"scaling.samples", KeyType::integer, "64", "horizon samples per run"},

        {"persistence.epsilons", KeyType::list, "0.05,0.025", "amplitude scales"},
        {"persistence.T", KeyType::real, "2", "slow-time horizon"},
        {"persistence.norm", KeyType::text, "inf", "1|2|inf"},
        {"persistence.pad", KeyType::integer, "8", "zero sites added on each side"},
        {"persistence.samples", KeyType::integer, "64", "horizon samples per run"},

        {"impulse.N", KeyType::integer, "1", "number of kicked sites"},
        {"impulse.v_i", KeyType::real, "0.05", "initial velocity of the kicked sites"},
        {"impulse.mu", KeyType::real, "0.25", "horizon exponent, 0 < mu < eta"},
        {"impulse.nu", KeyType::real, "1", "horizon coefficient"},
        {"impulse.samples", KeyType::integer, "64", "horizon samples"},
    };
    return keys;
}

bool parse_real(std::string_view s, double& out) {
    const std::string str(s);
    if (str.empty()) return false;
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(str.c_str(), &end);
    if (end != str.c_str() + str.size() || errno == ERANGE || std::isnan(v)) return false;
    out = v;
    return true;
}

Config::Config() {
    for (const auto& k : known_keys()) entries_[k.key] = Entry{k.fallback, "default", k.type};
}

void Config::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");

    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(path + ":" + std::to_string(e.line()) + ": " + e.message());
    }

    // second pass for line numbers; the parser above has already validated the syntax
    std::map<std::string, int> lines;
    in.clear();
    in.seekg(0);
    std::string line, section;
    for (int no = 1; std::getline(in, line); ++no) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == ';' || line[first] == '#') continue;
        if (line[first] == '[') {
            const auto close = line.find(']', first);
            section = line.substr(first + 1, close - first - 1);
            lines.emplace(section, no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(first, eq - first);
        key.erase(key.find_last_not_of(" \t") + 1);
        lines.emplace(section.empty() ? key : section + "." + key, no);
    }
    auto where = [&](const std::string& k) {
        const auto it = lines.find(k);
        return path + ":" + (it == lines.end() ? std::string("?") : std::to_string(it->second));
    };

    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(where(section) + ": key '" + section + "' is outside any section");
        const bool known = std::any_of(known_keys().begin(), known_keys().end(),
                                       [&](const KeyDef& k) { return k.key.rfind(section + ".", 0) == 0; });
        if (!known) throw ConfigError(where(section) + ": unknown section [" + section + "]");
        for (const auto& [name, value] : body) {
            const std::string key = section + "." + name;
            const auto it = entries_.find(key);
            if (it == entries_.end()) throw ConfigError(where(key) + ": unknown key '" + key + "'");
            it->second.value = value.get_value<std::string>();
            it->second.origin = where(key);
        }
    }
}

void Config::set_flag(const std::string& key, const std::string& flag, const std::string& value) {
    auto& e = entries_.at(key);
    e.value = value;
    e.origin = flag;
}

const Config::Entry& Config::entry(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw std::logic_error("unregistered config key " + key);
    return it->second;
}

void Config::fail(const Entry& e, const std::string& key, const std::string& what) const {
    throw ConfigError(e.origin + ": " + key + ": " + what + ", got '" + e.value + "'");
}

double Config::real(const std::string& key) const {
    const auto& e = entry(key);
    double v = 0.0;
    if (!parse_real(e.value, v)) fail(e, key, "expected a number");
    return v;
}

long long Config::integer(const std::string& key) const {
    const auto& e = entry(key);
    try {
        std::size_t used = 0;
        const long long v = std::stoll(e.value, &used);
        if (used == e.value.size()) return v;
    } catch (const std::exception&) {
    }
    fail(e, key, "expected an integer");
}

std::size_t Config::count(const std::string& key) const {
    const long long v = integer(key);
    if (v < 0) fail(entry(key), key, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::string Config::text(const std::string& key) const { return entry(key).value; }

std::vector<double> Config::list(const std::string& key) const {
    const auto& e = entry(key);
    std::vector<double> out;
    std::stringstream ss(e.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        double v = 0.0;
        if (a == std::string::npos || !parse_real(item.substr(a, b - a + 1), v))
            fail(e, key, "expected a comma-separated list of numbers");
        out.push_back(v);
    }
    if (out.empty()) fail(e, key, "expected a non-empty list");
    return out;
}

bool Config::boolean(const std::string& key) const {
    const auto& e = entry(key);
    if (e.value == "true" || e.value == "1" || e.value == "yes" || e.value == "on") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no" || e.value == "off") return false;
    fail(e, key, "expected true or false");
}

nlohmann::ordered_json Config::to_json() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& def : known_keys()) {
        const auto dot = def.key.find('.');
        const std::string section = def.key.substr(0, dot);
        const std::string name = def.key.substr(dot + 1);
        nlohmann::ordered_json value;
        switch (def.type) {
            case KeyType::real: {
                const double v = real(def.key);
                value = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(v > 0 ? "inf" : "-inf");
                break;
            }
            case KeyType::integer: value = integer(def.key); break;
            case KeyType::text: value = text(def.key); break;
            case KeyType::list: value = list(def.key); break;
            case KeyType::boolean: value = boolean(def.key); break;
        }
        j[section][name] = value;
    }
    return j;
}

}  // namespace cradle::cli
