#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rwre/errors.hpp"

// =============================================================================
// config.hpp
//
// Flat key=value experiment configs. Lines are `key = value`, `#` starts a
// comment, lists are comma-separated. Parsing is strict: duplicate keys and
// keys nobody consumed are errors, and every error carries the line number.
// =============================================================================

namespace rwre::cfg {

class Config {
public:
    static Config from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str(), path);
    }

    static Config from_string(const std::string& text, std::string origin = "<string>") {
        Config c;
        c.origin_ = std::move(origin);
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string stripped = strip(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            auto eq = stripped.find('=');
            if (eq == std::string::npos)
                c.fail(lineno, "expected key = value, got '" + stripped + "'");
            std::string key = strip(stripped.substr(0, eq));
            std::string val = strip(stripped.substr(eq + 1));
            if (key.empty()) c.fail(lineno, "empty key");
            if (c.entries_.count(key))
                c.fail(lineno, "duplicate key '" + key + "' (first seen on line " +
                                   std::to_string(c.entries_[key].line) + ")");
            c.entries_[key] = Entry{val, lineno, false};
        }
        return c;
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key) {
        return consume(key).value;
    }
    std::string get_string(const std::string& key, const std::string& fallback) {
        return has(key) ? get_string(key) : fallback;
    }

    std::int64_t get_int(const std::string& key) {
        const Entry& e = consume(key);
        return parse_int(e.value, key, e.line);
    }
    std::int64_t get_int(const std::string& key, std::int64_t fallback) {
        return has(key) ? get_int(key) : fallback;
    }

    double get_double(const std::string& key) {
        const Entry& e = consume(key);
        return parse_double(e.value, key, e.line);
    }
    double get_double(const std::string& key, double fallback) {
        return has(key) ? get_double(key) : fallback;
    }

    bool get_bool(const std::string& key) {
        const Entry& e = consume(key);
        if (e.value == "true" || e.value == "1") return true;
        if (e.value == "false" || e.value == "0") return false;
        fail(e.line, "key '" + key + "': expected true/false, got '" + e.value + "'");
        return false;
    }
    bool get_bool(const std::string& key, bool fallback) {
        return has(key) ? get_bool(key) : fallback;
    }

    std::vector<double> get_double_list(const std::string& key) {
        const Entry& e = consume(key);
        std::vector<double> out;
        for (const std::string& item : split(e.value))
            out.push_back(parse_double(item, key, e.line));
        return out;
    }
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) {
        return has(key) ? get_double_list(key) : fallback;
    }

    std::vector<std::int64_t> get_int_list(const std::string& key) {
        const Entry& e = consume(key);
        std::vector<std::int64_t> out;
        for (const std::string& item : split(e.value))
            out.push_back(parse_int(item, key, e.line));
        return out;
    }
    std::vector<std::int64_t> get_int_list(const std::string& key,
                                           const std::vector<std::int64_t>& fallback) {
        return has(key) ? get_int_list(key) : fallback;
    }

    // Call after all reads: any key never consumed is a typo or a stale line.
    void reject_unknown() const {
        for (const auto& [key, e] : entries_)
            if (!e.consumed)
                fail(e.line, "unknown key '" + key + "'");
    }

    const std::string& origin() const { return origin_; }

    // Key/value pairs in key order, for echoing params into reports.
    std::vector<std::pair<std::string, std::string>> items() const {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& [key, e] : entries_) out.emplace_back(key, e.value);
        return out;
    }

private:
    struct Entry {
        std::string value;
        int line = 0;
        bool consumed = false;
    };

    Entry& consume(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError(origin_ + ": missing key '" + key + "'");
        it->second.consumed = true;
        return it->second;
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
    }

    std::int64_t parse_int(const std::string& s, const std::string& key, int line) {
        try {
            std::size_t used = 0;
            std::int64_t v = std::stoll(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            fail(line, "key '" + key + "': expected integer, got '" + s + "'");
        }
    }

    double parse_double(const std::string& s, const std::string& key, int line) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            fail(line, "key '" + key + "': expected number, got '" + s + "'");
        }
    }

    static std::string strip(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    static std::vector<std::string> split(const std::string& s) {
        std::vector<std::string> out;
        std::string item;
        std::istringstream in(s);
        while (std::getline(in, item, ',')) out.push_back(strip(item));
        return out;
    }

    std::string origin_;
    std::map<std::string, Entry> entries_;
};

}  // namespace rwre::cfg
