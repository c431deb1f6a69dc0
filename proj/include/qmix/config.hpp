#pragma once

// JSON run configurations. Each command publishes a default document that
// doubles as its schema: overrides may only touch keys present there and
// must keep the JSON type. A `model` object is checked against the key set
// of its preset, and keys whose default is null accept any value.

#include <cmath>
#include <string>
#include <vector>

#include "qmix/error.hpp"
#include "qmix/io.hpp"
#include "qmix/lindblad.hpp"

namespace qmix::config {

inline json model_defaults(const std::string& preset) {
    if (preset == "tetrahedron") return {{"preset", preset}, {"kappa", 1.0}, {"alpha", 1.0}, {"omega", 0.0}};
    if (preset == "zeno") return {{"preset", preset}, {"kappa", 1.0}, {"omega", 1.0}};
    if (preset == "fluorescence") return {{"preset", preset}, {"Omega", 1.0}, {"gamma", 1.0}};
    if (preset == "sigma_x") return {{"preset", preset}};
    throw ConfigError("unknown model preset '" + preset + "' (tetrahedron, zeno, fluorescence, sigma_x)");
}

namespace detail {

inline const char* type_name(const json& j) { return j.type_name(); }

inline bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

// Stores a number with the type of the slot it replaces, so 1 and 1.0 resolve alike.
inline void assign_number(json& slot, const json& value, const std::string& path) {
    if (slot.is_number_float()) {
        slot = value.get<double>();
        return;
    }
    const double v = value.get<double>();
    if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError(path + ": expected an integer");
    if (slot.is_number_unsigned() && v < 0) throw ConfigError(path + ": expected a non-negative integer");
    slot = static_cast<long long>(v);
}

} // namespace detail

inline void overlay(json& base, const json& patch, const std::string& where);

// Sets `base` (a model object) from `patch`, switching presets when asked.
inline void overlay_model(json& base, const json& patch, const std::string& where) {
    if (!patch.is_object()) throw ConfigError(where + ": expected an object");
    if (patch.contains("preset")) {
        if (!patch["preset"].is_string()) throw ConfigError(where + ".preset: expected a string");
        const std::string p = patch["preset"].get<std::string>();
        if (p != base.value("preset", "")) base = model_defaults(p);
    }
    for (const auto& [key, value] : patch.items()) {
        if (key == "preset") continue;
        if (!base.contains(key))
            throw ConfigError(where + "." + key + ": not a parameter of preset '" + base["preset"].get<std::string>() + "'");
        if (!value.is_number()) throw ConfigError(where + "." + key + ": expected a number");
        base[key] = value.get<double>();
    }
}

inline void overlay(json& base, const json& patch, const std::string& where) {
    if (!patch.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : patch.items()) {
        const std::string path = where.empty() ? key : where + "." + key;
        if (!base.contains(key)) throw ConfigError(path + ": unknown key");
        json& slot = base[key];
        if (key == "model" && slot.is_object()) {
            overlay_model(slot, value, path);
        } else if (slot.is_null()) {
            slot = value;
        } else if (slot.is_object() && value.is_object()) {
            overlay(slot, value, path);
        } else if (!detail::same_kind(slot, value)) {
            throw ConfigError(path + ": expected " + detail::type_name(slot) + ", got " + detail::type_name(value));
        } else if (slot.is_number()) {
            detail::assign_number(slot, value, path);
        } else if (slot.is_array()) {
            slot = value;
            for (auto& e : slot)
                if (e.is_number()) e = e.get<double>();
        } else {
            slot = value;
        }
    }
}

// "a.b.c=value"; the value is parsed as JSON, falling back to a string.
inline void apply_assignment(json& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json patch = value;
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1)
        parts.push_back(key.substr(start, dot - start));
    parts.push_back(key.substr(start));
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
        if (it->empty()) throw ConfigError("--set: empty key segment in '" + key + "'");
        patch = json{{*it, patch}};
    }
    overlay(cfg, patch, "");
}

inline json resolve(json defaults, const json* file, const std::vector<std::string>& sets) {
    if (file) overlay(defaults, *file, "");
    for (const auto& s : sets) apply_assignment(defaults, s);
    return defaults;
}

// Typed accessors; violations are configuration errors.
inline double number(const json& cfg, const std::string& key) {
    if (!cfg.contains(key) || !cfg[key].is_number()) throw ConfigError(key + ": expected a number");
    const double v = cfg[key].get<double>();
    if (!std::isfinite(v)) throw ConfigError(key + ": must be finite");
    return v;
}

inline long long integer(const json& cfg, const std::string& key, long long min = 0) {
    const double v = number(cfg, key);
    if (v != std::floor(v) || v < static_cast<double>(min) || v > 9.0e15)
        throw ConfigError(key + ": expected an integer >= " + std::to_string(min));
    return static_cast<long long>(v);
}

inline std::string string(const json& cfg, const std::string& key) {
    if (!cfg.contains(key) || !cfg[key].is_string()) throw ConfigError(key + ": expected a string");
    return cfg[key].get<std::string>();
}

inline bool boolean(const json& cfg, const std::string& key) {
    if (!cfg.contains(key) || !cfg[key].is_boolean()) throw ConfigError(key + ": expected true or false");
    return cfg[key].get<bool>();
}

inline BlochVector vec3(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw ConfigError(what + ": expected [x, y, z]");
    for (const auto& e : j)
        if (!e.is_number()) throw ConfigError(what + ": expected three numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline std::uint64_t seed(const json& cfg) {
    if (!cfg.contains("seed") || !cfg["seed"].is_number_integer() || cfg["seed"].get<long long>() < 0)
        throw ConfigError("seed: expected a non-negative integer");
    return cfg["seed"].get<std::uint64_t>();
}

inline ModelPreset model_preset(const json& m) {
    const std::string p = string(m, "preset");
    ModelPreset out;
    if (p == "tetrahedron")
        out = preset::Tetrahedron{number(m, "kappa"), number(m, "alpha"), number(m, "omega")};
    else if (p == "zeno")
        out = preset::Zeno{number(m, "kappa"), number(m, "omega")};
    else if (p == "fluorescence")
        out = preset::Fluorescence{number(m, "Omega"), number(m, "gamma")};
    else if (p == "sigma_x")
        out = preset::SigmaXConjugation{};
    else
        throw ConfigError("unknown model preset '" + p + "'");
    try {
        validate_preset(out);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    return out;
}

} // namespace qmix::config
