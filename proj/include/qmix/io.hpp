#pragma once

// File formats: point-cloud CSV, JSONL path logs, config hashing and atomic
// writes. Every emitted file carries the config hash and seed.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qmix/error.hpp"
#include "qmix/pdp.hpp"
#include "qmix/point_cloud.hpp"

namespace qmix {

using json = nlohmann::json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// FNV-1a 64 of the compact dump; object keys are sorted, so equal configs hash equal.
inline std::string config_hash(const json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

inline std::string format_fixed17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Writes to a sibling temporary and renames over the target.
inline void write_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Provenance {
    std::string command;
    json config;
    std::uint64_t seed = 0;

    std::string hash() const { return config_hash(config); }
};

inline std::string comment_header(const Provenance& p) {
    return "# qmix " + p.command + "\n# config_hash " + p.hash() + "\n# seed " + std::to_string(p.seed) +
           "\n# config " + p.config.dump() + "\n";
}

// x,y,z per line with 17 significant digits, after '#' header lines.
inline std::string cloud_to_csv(const PointCloud& cloud, const Provenance& p) {
    std::string out = comment_header(p);
    out += "x,y,z\n";
    out.reserve(out.size() + cloud.size() * 72);
    for (const auto& q : cloud.points) {
        out += format_fixed17(q.x1);
        out += ',';
        out += format_fixed17(q.x2);
        out += ',';
        out += format_fixed17(q.x3);
        out += '\n';
    }
    return out;
}

inline PointCloud parse_cloud_csv(const std::string& text) {
    PointCloud cloud;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line == "x,y,z") continue;
        double v[3];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int k = 0; k < 3; ++k) {
            const auto res = std::from_chars(p, end, v[k]);
            if (res.ec != std::errc{}) throw IoError("cloud CSV line " + std::to_string(lineno) + ": bad number");
            p = res.ptr;
            if (k < 2) {
                if (p == end || *p != ',') throw IoError("cloud CSV line " + std::to_string(lineno) + ": expected ','");
                ++p;
            }
        }
        cloud.points.push_back({v[0], v[1], v[2]});
    }
    validate_cloud(cloud);
    return cloud;
}

inline PointCloud read_cloud_csv(const std::filesystem::path& path) { return parse_cloud_csv(read_file(path)); }

// Header object, then one {time, detector, x, y, z} object per jump.
inline std::string path_to_jsonl(const SamplePath& path, const Provenance& p) {
    json header{{"qmix", p.command}, {"config_hash", p.hash()}, {"seed", p.seed}, {"config", p.config},
                {"initial", {path.initial.x1, path.initial.x2, path.initial.x3}},
                {"max_renormalization", path.max_renormalization}};
    std::string out = header.dump() + "\n";
    out.reserve(out.size() + path.jumps.size() * 110);
    for (const auto& j : path.jumps) {
        out += "{\"time\":" + format_fixed17(j.time) + ",\"detector\":" + std::to_string(j.detector) +
               ",\"x\":" + format_fixed17(j.state.x1) + ",\"y\":" + format_fixed17(j.state.x2) +
               ",\"z\":" + format_fixed17(j.state.x3) + "}\n";
    }
    return out;
}

// Detector labels of the entries of a path log, in order.
inline std::vector<std::uint8_t> read_jsonl_detectors(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::uint8_t> out;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        static constexpr std::string_view kKey = "\"detector\":";
        const auto at = line.find(kKey);
        int d = 0;
        if (at == std::string::npos ||
            std::from_chars(line.data() + at + kKey.size(), line.data() + line.size(), d).ec != std::errc{})
            throw IoError("malformed path log entry: " + line.substr(0, 80));
        if (d < 1 || d > 4) throw IoError("detector label out of range in path log");
        out.push_back(static_cast<std::uint8_t>(d));
    }
    return out;
}

} // namespace qmix
