#include "xdyn/config.hpp"

#include <algorithm>
#include <cctype>

namespace xdyn {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing garbage");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + v);
    }
}

int parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing garbage");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for '" + key + "': " + v);
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config: bad boolean value for '" + key + "': " + v);
}

}  // namespace

void apply_setting(ExperimentConfig& cfg, const std::string& key,
                   const std::string& value) {
    const std::string v = trim(value);
    if (key == "model.j12_cm") cfg.j12_cm = parse_double(key, v);
    else if (key == "model.j23_ratio") cfg.j23_ratio = parse_double(key, v);
    else if (key == "model.noise_site") cfg.noise_site = parse_int(key, v);
    else if (key == "bath.shape") {
        if (v == "thin") cfg.shape = SpectralShape::thin;
        else if (v == "broad") cfg.shape = SpectralShape::broad;
        else throw ConfigError("config: bath.shape must be 'thin' or 'broad', got " + v);
    }
    else if (key == "bath.eta") cfg.eta = parse_double(key, v);
    else if (key == "bath.p") cfg.p = parse_double(key, v);
    else if (key == "bath.temperature") cfg.temperature = parse_double(key, v);
    else if (key == "bath.n_matsubara") cfg.n_matsubara = parse_int(key, v);
    else if (key == "bath.classical") cfg.classical = parse_bool(key, v);
    else if (key == "bath.t_high") cfg.t_high = parse_double(key, v);
    else if (key == "solver.method") cfg.solver = v;
    else if (key == "solver.level") cfg.level = parse_int(key, v);
    else if (key == "solver.dt_fs") cfg.dt_fs = parse_double(key, v);
    else if (key == "solver.t_end_fs") cfg.t_end_fs = parse_double(key, v);
    else if (key == "solver.dt_out_fs") cfg.dt_out_fs = parse_double(key, v);
    else if (key == "solver.lamb_shift") cfg.lamb_shift = parse_bool(key, v);
    else if (key == "output.dir") cfg.out_dir = v;
    else if (key == "output.bloch_volume") cfg.bloch_volume = parse_bool(key, v);
    else if (key == "output.volume_t_end_fs") cfg.volume_t_end_fs = parse_double(key, v);
    else throw ConfigError("config: unknown key '" + key + "'");
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + path + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_setting(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return cfg;
}

}  // namespace xdyn
