#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "apsk/errors.hpp"

namespace apsk {

inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

/// Flat sectioned key-value experiment config:
///   [section]
///   key = value        # comment
/// Duplicate keys are allowed; single-value getters take the last one.
struct Config {
    struct Entry {
        std::string section;
        std::string key;
        std::string value;
    };

    std::vector<Entry> entries;
    std::string raw_text;  // verbatim file content, hashed for provenance
    std::string dir;       // directory of the config file

    static Config parse(std::istream& in, std::string dir = {}) {
        Config cfg;
        cfg.dir = std::move(dir);
        std::ostringstream raw;
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            raw << line << '\n';
            std::string s = line;
            if (const auto hash = s.find('#'); hash != std::string::npos) s.erase(hash);
            const auto trim = [](std::string& t) {
                const auto b = t.find_first_not_of(" \t\r");
                const auto e = t.find_last_not_of(" \t\r");
                t = b == std::string::npos ? std::string{} : t.substr(b, e - b + 1);
            };
            trim(s);
            if (s.empty()) continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw config_error("config line " + std::to_string(lineno) +
                                       ": malformed section header");
                section = s.substr(1, s.size() - 2);
                trim(section);
                continue;
            }
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw config_error("config line " + std::to_string(lineno) +
                                   ": expected 'key = value'");
            std::string key = s.substr(0, eq);
            std::string value = s.substr(eq + 1);
            trim(key);
            trim(value);
            if (key.empty())
                throw config_error("config line " + std::to_string(lineno) + ": empty key");
            cfg.entries.push_back({section, std::move(key), std::move(value)});
        }
        cfg.raw_text = raw.str();
        return cfg;
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw io_error("cannot open config file: " + path);
        const auto slash = path.find_last_of('/');
        return parse(in, slash == std::string::npos ? std::string{} : path.substr(0, slash));
    }

    std::uint64_t hash() const { return fnv1a(raw_text); }

    /// Paths in a config are taken relative to the config file's directory.
    std::string resolve_path(const std::string& p) const {
        if (p.empty() || p.front() == '/' || dir.empty()) return p;
        return dir + "/" + p;
    }

    std::optional<std::string> find(const std::string& section, const std::string& key) const {
        std::optional<std::string> out;
        for (const auto& e : entries)
            if (e.section == section && e.key == key) out = e.value;
        return out;
    }

    std::vector<std::string> get_all(const std::string& section, const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& e : entries)
            if (e.section == section && e.key == key) out.push_back(e.value);
        return out;
    }

    std::string get(const std::string& section, const std::string& key) const {
        if (auto v = find(section, key)) return *v;
        throw config_error("missing config key: [" + section + "] " + key);
    }

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return find(section, key).value_or(fallback);
    }

    double get_double(const std::string& section, const std::string& key) const {
        return parse_double(get(section, key), key);
    }

    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const {
        const auto v = find(section, key);
        return v ? parse_double(*v, key) : fallback;
    }

    long long get_int(const std::string& section, const std::string& key) const {
        return parse_int(get(section, key), key);
    }

    long long get_int_or(const std::string& section, const std::string& key,
                         long long fallback) const {
        const auto v = find(section, key);
        return v ? parse_int(*v, key) : fallback;
    }

    std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const {
        const auto v = find(section, key);
        if (!v) return fallback;
        try {
            std::size_t pos = 0;
            const auto out = std::stoull(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("trailing");
            return out;
        } catch (const std::exception&) {
            throw config_error("config key '" + key + "' is not an unsigned integer: " + *v);
        }
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key) const {
        std::istringstream ss(get(section, key));
        std::vector<double> out;
        double x;
        while (ss >> x) out.push_back(x);
        std::string tail;
        if (ss.clear(), ss >> tail)
            throw config_error("config key '" + key + "' has a non-numeric token: " + tail);
        if (out.empty()) throw config_error("config key '" + key + "' is empty");
        return out;
    }

private:
    static double parse_double(const std::string& v, const std::string& key) {
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing");
            return out;
        } catch (const std::exception&) {
            throw config_error("config key '" + key + "' is not a number: " + v);
        }
    }

    static long long parse_int(const std::string& v, const std::string& key) {
        try {
            std::size_t pos = 0;
            const auto out = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("trailing");
            return out;
        } catch (const std::exception&) {
            throw config_error("config key '" + key + "' is not an integer: " + v);
        }
    }
};

}  // namespace apsk
