#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace dx {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace detail

/**
 * `key = value` documents with `#` comments. Values stay strings until a
 * typed getter asks for them, so one parser serves model configs,
 * generator specs and grid files alike. Getters record which keys were
 * consumed; reject_unknown() then turns leftovers (usually typos) into
 * errors instead of silently ignoring them.
 */
class ConfigFile {
  public:
    ConfigFile() = default;

    static ConfigFile load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read config '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse(buf.str(), path);
    }

    static ConfigFile parse(const std::string& text, const std::string& origin = "<string>") {
        ConfigFile cfg;
        cfg.origin_ = origin;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + line + "'");
            std::string key = detail::trim(line.substr(0, eq));
            std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (cfg.values_.count(key))
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                                  key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        touched_.insert(key);
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        touched_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_double(it->second, key);
    }

    std::size_t get_size(const std::string& key, std::size_t fallback) const {
        touched_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_size(it->second, key);
    }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
        touched_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return parse_u64(it->second, key);
    }

    // Comma-separated size list, e.g. "7, 14, 21".
    std::vector<std::size_t> get_size_list(const std::string& key,
                                           std::vector<std::size_t> fallback) const {
        touched_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::size_t> out;
        for (const std::string& tok : split_list(it->second, key)) out.push_back(parse_size(tok, key));
        return out;
    }

    std::vector<double> get_double_list(const std::string& key,
                                        std::vector<double> fallback) const {
        touched_.insert(key);
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        for (const std::string& tok : split_list(it->second, key))
            out.push_back(parse_double(tok, key));
        return out;
    }

    // Anything present that no getter asked about is a config error.
    void reject_unknown() const {
        for (const auto& [key, value] : values_)
            if (!touched_.count(key))
                throw ConfigError(origin_ + ": unknown key '" + key + "'");
    }

  private:
    static std::vector<std::string> split_list(const std::string& value,
                                               const std::string& key) {
        std::vector<std::string> out;
        std::string tok;
        std::istringstream in(value);
        while (std::getline(in, tok, ',')) {
            tok = detail::trim(tok);
            if (tok.empty())
                throw ConfigError("key '" + key + "': empty element in list '" + value + "'");
            out.push_back(tok);
        }
        if (out.empty()) throw ConfigError("key '" + key + "': empty list");
        return out;
    }

    static double parse_double(const std::string& s, const std::string& key) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + s + "' is not a number");
        }
    }

    static std::size_t parse_size(const std::string& s, const std::string& key) {
        try {
            std::size_t used = 0;
            long long v = std::stoll(s, &used);
            if (used != s.size() || v < 0) throw std::invalid_argument(s);
            return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + s + "' is not a nonnegative integer");
        }
    }

    static std::uint64_t parse_u64(const std::string& s, const std::string& key) {
        try {
            std::size_t used = 0;
            unsigned long long v = std::stoull(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return static_cast<std::uint64_t>(v);
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + s + "' is not a nonnegative integer");
        }
    }

    std::string origin_;
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> touched_;
};

}  // namespace dx
