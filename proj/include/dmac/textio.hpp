#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmac {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat "key = value" configuration files; '#' starts a comment.
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path);
    static KeyValueConfig parse_text(const std::string& text);

    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<std::string> get_list(const std::string& key) const;  // comma separated
    std::vector<double> get_double_list(const std::string& key) const;

private:
    std::map<std::string, std::string> values_;
};

// Fixed-format floating point rendering so identical runs emit identical bytes.
std::string format_double(double v);

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}
    void row(const std::vector<std::string>& fields);

private:
    std::ostream& os_;
};

// Log-spaced grid including both endpoints.
std::vector<double> log_grid(double lo, double hi, int count);
std::vector<double> linear_grid(double lo, double hi, int count);

}  // namespace dmac
