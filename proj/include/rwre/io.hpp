#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "rwre/errors.hpp"

// =============================================================================
// io.hpp
//
// Output plumbing for the experiment harness: CSV tables with fixed headers
// and a numeric format chosen once (%.12g) so reruns are byte-identical.
// =============================================================================

namespace rwre::io {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline std::string fmt(std::int64_t v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }
inline std::string fmt(bool v) { return v ? "true" : "false"; }

class Csv {
public:
    Csv(const std::string& path, const std::vector<std::string>& headers) : out_(path) {
        if (!out_) throw ConfigError("cannot open output file: " + path);
        row(headers);
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open output file: " + path);
    out << content;
}

inline void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw ConfigError("cannot create output directory: " + path);
}

}  // namespace rwre::io
