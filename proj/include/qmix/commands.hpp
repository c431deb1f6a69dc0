#pragma once

// Subcommand bodies: each takes a resolved config and writes its files
// under an output directory. Kept free of argument parsing so they can be
// driven in-process.

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "qmix/classical.hpp"
#include "qmix/config.hpp"
#include "qmix/exponent.hpp"
#include "qmix/fractal.hpp"
#include "qmix/io.hpp"
#include "qmix/pdp.hpp"
#include "qmix/render.hpp"

namespace qmix::commands {

namespace fs = std::filesystem;

struct Output {
    fs::path dir = ".";
    std::string stem;

    fs::path file(const std::string& ext) const { return dir / (stem + ext); }
};

using Runner = std::function<std::vector<fs::path>(const json&, const Output&, std::ostream&)>;

struct Command {
    std::string name;
    std::string summary;
    std::function<json()> defaults;
    Runner run;
};

namespace detail {

inline json header(const std::string& command, const json& cfg, std::uint64_t seed) {
    return {{"qmix", command}, {"config_hash", config_hash(cfg)}, {"seed", seed}, {"config", cfg}};
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json bloch_json(const BlochVector& v) { return json::array({v.x1, v.x2, v.x3}); }

inline DensityMatrix initial_state(const json& cfg, const std::string& key) {
    try {
        return from_bloch(config::vec3(cfg[key], key));
    } catch (const DomainError& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// evolve

inline json evolve_defaults() {
    return {{"model", config::model_defaults("tetrahedron")},
            {"initial", json::array({0.0, 0.0, 1.0})},
            {"t_end", 5.0},
            {"dt", 0.0},
            {"sample_every", 10},
            {"seed", 0}};
}

// CSV rows t, x1, x2, x3, trace distance to the stationary (or, for sigma_x, asymptotic) state.
inline std::vector<fs::path> run_evolve(const json& cfg, const Output& out, std::ostream& log) {
    const auto preset = config::model_preset(cfg["model"]);
    const auto model = build_model(preset);
    const auto rho0 = detail::initial_state(cfg, "initial");
    const double t_end = config::number(cfg, "t_end"), dt = config::number(cfg, "dt");
    if (t_end < 0.0) throw ConfigError("t_end: must be >= 0");
    if (dt < 0.0) throw ConfigError("dt: must be >= 0 (0 selects the default step)");
    const auto every = static_cast<std::size_t>(config::integer(cfg, "sample_every", 1));
    const auto seed = config::seed(cfg);

    const auto st = stationary_state(model);
    const DensityMatrix target = st.unique ? st.state : asymptotic_state(model, rho0);
    const auto traj = evolve(model, rho0, t_end, dt, every);

    const Provenance prov{"evolve", cfg, seed};
    std::string csv = comment_header(prov);
    csv += "# reference " + std::string(st.unique ? "stationary" : "asymptotic") + " " +
           format_fixed17(to_bloch(target).x1) + " " + format_fixed17(to_bloch(target).x2) + " " +
           format_fixed17(to_bloch(target).x3) + "\n";
    csv += "t,x1,x2,x3,distance\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto m = to_bloch(traj.states[i]);
        csv += format_fixed17(traj.times[i]) + "," + format_fixed17(m.x1) + "," + format_fixed17(m.x2) + "," +
               format_fixed17(m.x3) + "," + format_fixed17(trace_distance(traj.states[i], target)) + "\n";
    }
    const auto path = out.file(".csv");
    write_atomic(path, csv);
    if (traj.clamp_count) log << "evolve: " << traj.clamp_count << " samples clamped onto the Bloch ball\n";
    return {path};
}

// ---------------------------------------------------------------------------
// exponent

inline json exponent_defaults() {
    return {{"model", config::model_defaults("tetrahedron")},
            {"reference", "stationary"},
            {"t_max", 0.0},
            {"samples", 200},
            {"integrator", false},
            {"probes", {{"random_pure", 10}, {"random_mixed", 2}}},
            {"sweep", nullptr},
            {"seed", 1}};
}

namespace detail {

inline json exponent_record(const json& model_cfg, const json& cfg, std::uint64_t seed) {
    const auto preset = config::model_preset(model_cfg);
    const auto model = build_model(preset);
    DensityMatrix ref;
    std::string ref_note;
    if (cfg["reference"].is_string()) {
        if (cfg["reference"] != "stationary") throw ConfigError("reference: expected \"stationary\" or [x, y, z]");
        const auto st = stationary_state(model);
        ref = st.state;
        if (!st.unique) ref_note = st.description;
    } else {
        ref = initial_state(cfg, "reference");
    }
    const auto& pc = cfg["probes"];
    const auto probes = default_probes(seed, static_cast<int>(config::integer(pc, "random_pure")),
                                       static_cast<int>(config::integer(pc, "random_mixed")));
    double t_max = config::number(cfg, "t_max");
    if (t_max < 0.0) throw ConfigError("t_max: must be >= 0 (0 selects 20 / rate)");
    if (t_max == 0.0) t_max = default_horizon(model);
    ExponentOptions opt;
    opt.samples = static_cast<std::size_t>(config::integer(cfg, "samples", 10));
    opt.force_integrator = config::boolean(cfg, "integrator");

    const auto est = lambda_q_numeric(model, ref, probes, t_max, opt);
    json rec{{"model", model_cfg}, {"numeric", est.lambda}, {"t_lo", est.t_lo}, {"t_hi", est.t_hi},
             {"argmin", est.argmin}, {"regression_residual", est.regression_residual},
             {"outcome", to_string(est.outcome)}, {"diagnostic", est.diagnostic},
             {"reference", bloch_json(to_bloch(ref))}, {"reference_note", ref_note}};
    rec["analytic"] = std::holds_alternative<preset::SigmaXConjugation>(preset) ? json(nullptr)
                                                                                : json(lambda_q_analytic(preset));
    rec["probes"] = json::array();
    for (const auto& p : est.probes)
        rec["probes"].push_back({{"slope", p.slope}, {"prefactor_order", p.prefactor_order}, {"residual", p.residual},
                                 {"t_lo", p.t_lo}, {"t_hi", p.t_hi}, {"distance_at_t_hi", p.distance_at_t_hi}});
    return rec;
}

} // namespace detail

// JSON with analytic and numeric exponents; `sweep` = {"parameter": name, "values": [...]}
// repeats the estimate over one model parameter.
inline std::vector<fs::path> run_exponent(const json& cfg, const Output& out, std::ostream&) {
    const auto seed = config::seed(cfg);
    config::model_preset(cfg["model"]);
    json doc = detail::header("exponent", cfg, seed);
    doc["results"] = json::array();
    const auto& sweep = cfg["sweep"];
    if (sweep.is_null()) {
        doc["results"].push_back(detail::exponent_record(cfg["model"], cfg, seed));
    } else {
        if (!sweep.is_object() || !sweep.contains("parameter") || !sweep.contains("values") || sweep.size() != 2 ||
            !sweep["values"].is_array())
            throw ConfigError("sweep: expected {\"parameter\": name, \"values\": [numbers]}");
        const std::string param = config::string(sweep, "parameter");
        if (!cfg["model"].contains(param) || param == "preset")
            throw ConfigError("sweep.parameter: '" + param + "' is not a parameter of the model");
        for (const auto& v : sweep["values"]) {
            if (!v.is_number()) throw ConfigError("sweep.values: expected numbers");
            json m = cfg["model"];
            m[param] = v.get<double>();
            doc["results"].push_back(detail::exponent_record(m, cfg, seed));
        }
    }
    const auto path = out.file(".json");
    write_atomic(path, detail::dump(doc));
    return {path};
}

// ---------------------------------------------------------------------------
// pdp

inline json pdp_defaults() {
    return {{"alpha", 0.7},       {"omega", 0.0},  {"kappa", 1.0}, {"rate", "literal"},
            {"initial", json::array({0.0, 0.0, 1.0})}, {"n_points", 100000}, {"burn_in", 100},
            {"log", true},        {"seed", 42}};
}

// Point-cloud CSV of post-jump states after burn-in, plus the JSONL log of every jump.
inline std::vector<fs::path> run_pdp(const json& cfg, const Output& out, std::ostream&) {
    PdpParams params{config::number(cfg, "omega"), config::number(cfg, "kappa"), config::number(cfg, "alpha")};
    const auto rate = config::string(cfg, "rate");
    if (rate == "literal")
        params.rate = RateConvention::literal;
    else if (rate == "trace_lambda")
        params.rate = RateConvention::trace_lambda;
    else
        throw ConfigError("rate: expected \"literal\" or \"trace_lambda\"");
    try {
        params.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
    const BlochVector r0 = config::vec3(cfg["initial"], "initial");
    if (std::abs(r0.norm() - 1.0) > 1e-9) throw ConfigError("initial: must be a unit vector");
    const auto n_points = static_cast<std::size_t>(config::integer(cfg, "n_points", 1));
    const auto burn_in = static_cast<std::size_t>(config::integer(cfg, "burn_in"));
    const auto seed = config::seed(cfg);

    const auto path = sample_path(params, r0, burn_in + n_points, seed);
    PointCloud cloud;
    cloud.points.reserve(n_points);
    for (std::size_t i = burn_in; i < path.jumps.size(); ++i) cloud.points.push_back(path.jumps[i].state);

    const Provenance prov{"pdp", cfg, seed};
    std::vector<fs::path> written{out.file(".csv")};
    write_atomic(written[0], cloud_to_csv(cloud, prov));
    if (config::boolean(cfg, "log")) {
        written.push_back(out.file(".jsonl"));
        write_atomic(written[1], path_to_jsonl(path, prov));
    }
    return written;
}

// ---------------------------------------------------------------------------
// fractal

inline json fractal_defaults() {
    return {{"cloud", ""},
            {"levels", 16},
            {"generate", {{"alpha", 0.75}, {"n_points", 1000000}, {"burn_in", 100}}},
            {"seed", 42}};
}

inline json box_count_json(const BoxCountResult& r) {
    json j{{"points", r.points}, {"levels", r.levels}, {"epsilons", r.epsilons}, {"counts", r.counts}};
    if (r.fit)
        j["fit"] = {{"dimension", r.fit->slope},      {"intercept", r.fit->intercept},
                    {"r_squared", r.fit->r_squared},  {"rms_residual", r.fit->rms_residual},
                    {"first_level", r.fit->first_level}, {"last_level", r.fit->last_level}};
    else
        j["fit"] = nullptr;
    return j;
}

// Box counts of a cloud read from `cloud`, or of a fresh chaos game when it is empty.
inline std::vector<fs::path> run_fractal(const json& cfg, const Output& out, std::ostream&) {
    const auto seed = config::seed(cfg);
    const int levels = static_cast<int>(config::integer(cfg, "levels", 4));
    if (levels > kMaxBoxLevel) throw ConfigError("levels: at most " + std::to_string(kMaxBoxLevel));
    const std::string source = config::string(cfg, "cloud");
    PointCloud cloud;
    json doc = detail::header("fractal", cfg, seed);
    if (source.empty()) {
        const auto& g = cfg["generate"];
        const double alpha = config::number(g, "alpha");
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("generate.alpha: must lie in [0, 1]");
        cloud = chaos_game(alpha, static_cast<std::size_t>(config::integer(g, "n_points", 1)), seed,
                           static_cast<std::size_t>(config::integer(g, "burn_in")));
        doc["source"] = "chaos_game";
    } else {
        cloud = read_cloud_csv(source);
        doc["source"] = source;
        doc["source_hash"] = config_hash(json(read_file(source)));
    }
    const auto r = box_count(cloud, levels);
    doc["box_count"] = box_count_json(r);
    const auto path = out.file(".json");
    write_atomic(path, detail::dump(doc));
    if (!r.fit) estimate_dimension(r);  // raises the diagnostic after the counts are saved
    return {path};
}

// ---------------------------------------------------------------------------
// classical

inline json classical_defaults() {
    return {{"r", 2}, {"n_max", 20}, {"k_max", 5}, {"iterate", {{"density", "two_x"}, {"n", 10}}}, {"seed", 0}};
}

inline CircleDensity named_density(const std::string& name) {
    if (name == "two_x") return CircleDensity::affine({{0.0, 0.0, 2.0}});
    if (name == "half_indicator") return CircleDensity::affine({{0.0, 2.0, 0.0}, {0.5, 0.0, 0.0}});
    if (name == "uniform") return CircleDensity::uniform();
    throw ConfigError("iterate.density: expected two_x, half_indicator or uniform");
}

// lambda(1) from the linear probes f_k, k = 1..k_max, and the orbit P^n f of a named density.
inline std::vector<fs::path> run_classical(const json& cfg, const Output& out, std::ostream&) {
    const auto seed = config::seed(cfg);
    const RadicMap map(static_cast<int>(config::integer(cfg, "r", 2)));
    const int n_max = static_cast<int>(config::integer(cfg, "n_max", 4));
    const int k_max = static_cast<int>(config::integer(cfg, "k_max", 1));
    std::vector<CircleDensity> probes;
    for (int k = 1; k <= k_max; ++k) probes.push_back(linear_probe(k));
    const auto est = lambda_classical(CircleDensity::uniform(), probes, map, n_max);

    json doc = detail::header("classical", cfg, seed);
    doc["lambda"] = {{"estimate", est.lambda}, {"log_r", std::log(map.r)}, {"n_lo", est.n_lo}, {"n_hi", est.n_hi},
                     {"argmin", est.argmin}, {"diagnostic", est.diagnostic}};
    doc["lambda"]["probes"] = json::array();
    for (const auto& p : est.probes)
        doc["lambda"]["probes"].push_back({{"slope", p.slope}, {"residual", p.residual}, {"excluded", p.excluded}});

    const auto& it = cfg["iterate"];
    CircleDensity f = named_density(config::string(it, "density"));
    const int n = static_cast<int>(config::integer(it, "n"));
    doc["orbit"] = json::array();
    for (int k = 0; k <= n; ++k) {
        json pieces = json::array();
        for (const auto& p : f.pieces()) pieces.push_back({{"start", p.start}, {"a", p.a}, {"s", p.s}});
        doc["orbit"].push_back({{"n", k}, {"l1_to_uniform", l1_distance(f, CircleDensity::uniform())},
                                {"entropy", entropy(f)}, {"pieces", pieces}});
        if (k < n) f = pf_apply(f, map);
    }
    const auto path = out.file(".json");
    write_atomic(path, detail::dump(doc));
    return {path};
}

// ---------------------------------------------------------------------------
// render

inline json render_defaults() {
    return {{"cloud", "cloud.csv"}, {"path_log", ""}, {"format", "pgm"}, {"projection", "+z"},
            {"width", 1024},        {"height", 1024},  {"zoom", nullptr}, {"seed", 0}};
}

// PGM of log(1 + hits), or PPM coloured by detector when `path_log` names the
// JSONL log of the same run (its last entries label the cloud points).
inline std::vector<fs::path> run_render(const json& cfg, const Output& out, std::ostream&) {
    const auto seed = config::seed(cfg);
    RenderSpec spec;
    try {
        spec.projection = parse_projection(config::string(cfg, "projection"));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("projection: ") + e.what());
    }
    spec.width = static_cast<int>(config::integer(cfg, "width", 1));
    spec.height = static_cast<int>(config::integer(cfg, "height", 1));
    const std::string format = config::string(cfg, "format");
    if (format != "pgm" && format != "ppm") throw ConfigError("format: expected \"pgm\" or \"ppm\"");
    if (!cfg["zoom"].is_null()) {
        const auto& z = cfg["zoom"];
        if (!z.is_object() || !z.contains("center") || !z.contains("radius_deg") || z.size() != 2)
            throw ConfigError("zoom: expected {\"center\": [x, y, z], \"radius_deg\": degrees}");
        BlochVector c = config::vec3(z["center"], "zoom.center");
        if (c.norm() == 0.0) throw ConfigError("zoom.center: must be nonzero");
        spec.zoom = Zoom{(1.0 / c.norm()) * c, config::number(z, "radius_deg") * M_PI / 180.0};
    }
    try {
        spec.validate();
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }

    PointCloud cloud = read_cloud_csv(config::string(cfg, "cloud"));
    if (cloud.empty()) throw ConfigError("cloud: file holds no points");
    const std::string log_path = config::string(cfg, "path_log");
    if (format == "ppm") {
        if (log_path.empty()) throw ConfigError("format ppm needs path_log for detector labels");
        auto det = read_jsonl_detectors(log_path);
        if (det.size() < cloud.size()) throw ConfigError("path_log has fewer jumps than the cloud has points");
        cloud.detectors.assign(det.end() - static_cast<std::ptrdiff_t>(cloud.size()), det.end());
        spec.mode = PixelMode::detector_color;
    }
    const auto raster = rasterize(cloud, spec);
    const Provenance prov{"render", cfg, seed};
    const auto path = out.file(format == "pgm" ? ".pgm" : ".ppm");
    write_atomic(path, format == "pgm" ? to_pgm(raster, prov) : to_ppm(raster, prov));
    return {path};
}

inline const std::vector<Command>& registry() {
    static const std::vector<Command> cmds{
        {"evolve", "integrate a preset master equation and tabulate the Bloch vector", evolve_defaults, run_evolve},
        {"exponent", "estimate the quantum characteristic exponent", exponent_defaults, run_exponent},
        {"pdp", "sample the jump process and write the point cloud and path log", pdp_defaults, run_pdp},
        {"fractal", "box-counting dimension of a point cloud", fractal_defaults, run_fractal},
        {"classical", "transfer operator of the r-adic map and its exponent", classical_defaults, run_classical},
        {"render", "draw a point cloud as PGM or PPM", render_defaults, run_render},
    };
    return cmds;
}

} // namespace qmix::commands
