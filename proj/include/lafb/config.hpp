#pragma once

#include "lafb/error.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace lafb {

/// Plain-text `key = value` settings with optional `[section]` headers. Sections only
/// group keys for readability; lookups use the bare key, which must be unique.
class KeyValues {
public:
    static KeyValues parse(const std::string& text, const std::string& origin = "<text>")
    {
        KeyValues kv;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": bad section header");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
            const std::string key = trim(line.substr(0, eq));
            if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            if (kv.values_.count(key)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
            kv.set(key, trim(line.substr(eq + 1)));
        }
        return kv;
    }

    static KeyValues load(const std::string& path)
    {
        std::ifstream f(path);
        if (!f) throw IoError("cannot open config file " + path);
        std::stringstream ss;
        ss << f.rdbuf();
        return parse(ss.str(), path);
    }

    void set(const std::string& key, const std::string& value)
    {
        if (!values_.count(key)) order_.push_back(key);
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get(const std::string& key, const std::string& fallback) const
    {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const
    {
        if (!has(key)) return fallback;
        return to_double(key, values_.at(key));
    }

    long get_int(const std::string& key, long fallback) const
    {
        if (!has(key)) return fallback;
        const std::string& s = values_.at(key);
        long v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) const
    {
        if (!has(key)) return fallback;
        const std::string& s = values_.at(key);
        if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
        if (s == "false" || s == "0" || s == "no" || s == "off") return false;
        throw ConfigError("key '" + key + "': '" + s + "' is not a boolean");
    }

    std::vector<std::string> get_list(const std::string& key) const { return split(get(key, ""), ','); }

    const std::vector<std::string>& keys() const { return order_; }

    /// Merge `other` over this, keeping first-seen key order.
    void update(const KeyValues& other)
    {
        for (const auto& k : other.order_) set(k, other.values_.at(k));
    }

    std::string str() const
    {
        std::ostringstream os;
        for (const auto& k : order_) os << k << " = " << values_.at(k) << '\n';
        return os.str();
    }

    static std::string trim(const std::string& s)
    {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static std::vector<std::string> split(const std::string& s, char sep)
    {
        std::vector<std::string> parts;
        std::string cur;
        std::istringstream in(s);
        while (std::getline(in, cur, sep)) {
            cur = trim(cur);
            if (!cur.empty()) parts.push_back(cur);
        }
        return parts;
    }

    static double to_double(const std::string& key, const std::string& s)
    {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': '" + s + "' is not a number");
        }
    }

private:
    std::map<std::string, std::string> values_;
    std::vector<std::string> order_;
};

}  // namespace lafb
