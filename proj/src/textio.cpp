#include "dmac/textio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dmac {
namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

KeyValueConfig KeyValueConfig::parse_text(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        cfg.values_[key] = value;
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto v = get(key);
    return v ? *v : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        double out = std::stod(*v, &pos);
        if (pos != v->size()) throw ConfigError("config key '" + key + "': bad number '" + *v + "'");
        return out;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("config key '" + key + "': bad number '" + *v + "'");
    }
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    try {
        std::size_t pos = 0;
        long long out = std::stoll(*v, &pos);
        if (pos != v->size()) throw ConfigError("config key '" + key + "': bad integer '" + *v + "'");
        return out;
    } catch (const ConfigError&) {
        throw;
    } catch (...) {
        throw ConfigError("config key '" + key + "': bad integer '" + *v + "'");
    }
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& key) const {
    auto v = get(key);
    std::vector<std::string> out;
    if (!v) return out;
    std::istringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_list(key)) {
        try {
            out.push_back(std::stod(s));
        } catch (...) {
            throw ConfigError("config key '" + key + "': bad number '" + s + "'");
        }
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os_ << ',';
        os_ << fields[i];
    }
    os_ << '\n';
}

std::vector<double> log_grid(double lo, double hi, int count) {
    if (count < 1 || !(lo > 0.0) || !(hi >= lo)) throw ConfigError("bad log grid");
    std::vector<double> out;
    if (count == 1) return {lo};
    for (int i = 0; i < count; ++i) {
        double t = static_cast<double>(i) / (count - 1);
        out.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
    }
    return out;
}

std::vector<double> linear_grid(double lo, double hi, int count) {
    if (count < 1 || !(hi >= lo)) throw ConfigError("bad linear grid");
    std::vector<double> out;
    if (count == 1) return {lo};
    for (int i = 0; i < count; ++i) {
        double t = static_cast<double>(i) / (count - 1);
        out.push_back(lo + t * (hi - lo));
    }
    return out;
}

}  // namespace dmac
