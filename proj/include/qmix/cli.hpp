#pragma once

// qmix command-line front end. Exit codes: 0 success, 1 I/O failure or a
// failed acceptance criterion, 2 configuration error, 3 numerical failure.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmix/commands.hpp"
#include "qmix/repro.hpp"

namespace qmix::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline json repro_defaults() { return {{"criteria", json::array({1, 2, 3, 4, 5, 6, 7, 8, 9, 10})}, {"seed", 42}}; }

// Runs the selected acceptance criteria, printing one PASS/FAIL line each.
inline std::vector<commands::fs::path> run_repro(const json& cfg, const commands::Output& out, std::ostream& log,
                                                 bool& all_pass) {
    const auto seed = config::seed(cfg);
    if (!cfg["criteria"].is_array() || cfg["criteria"].empty()) throw ConfigError("criteria: expected a list of 1..10");
    std::vector<int> ids;
    for (const auto& c : cfg["criteria"]) {
        if (!c.is_number() || c.get<double>() != std::floor(c.get<double>()) || c.get<double>() < 1 ||
            c.get<double>() > 10)
            throw ConfigError("criteria: entries must be integers in 1..10");
        ids.push_back(static_cast<int>(c.get<double>()));
    }
    repro::Options opt;
    opt.seed = seed;
    opt.scratch = out.dir;
    json doc = commands::detail::header("repro", cfg, seed);
    doc["results"] = json::array();
    all_pass = true;
    for (int id : ids) {
        const auto v = repro::run_one(id, opt);
        log << repro::verdict_line(v) << "\n";
        for (const auto& n : v.notes) log << "    " << n << "\n";
        log.flush();
        all_pass = all_pass && v.pass;
        doc["results"].push_back(
            {{"criterion", v.id}, {"title", v.title}, {"pass", v.pass}, {"summary", v.summary}, {"notes", v.notes}});
    }
    doc["all_pass"] = all_pass;
    const auto path = out.file(".json");
    write_atomic(path, commands::detail::dump(doc));
    return {path};
}

namespace detail {

struct SubcommandArgs {
    std::string config_file;
    std::vector<std::string> sets;
    std::string out_dir = ".";
    std::string name;
    bool print_defaults = false;
};

inline json load_config_file(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    auto j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError(path + ": not valid JSON");
    return j;
}

inline void add_common(CLI::App& sub, SubcommandArgs& a) {
    sub.add_option("-c,--config", a.config_file, "JSON config overlaid on the defaults");
    sub.add_option("-s,--set", a.sets, "override one field, e.g. --set model.kappa=2 (repeatable)");
    sub.add_option("-o,--out-dir", a.out_dir, "directory for output files")->capture_default_str();
    sub.add_option("-n,--name", a.name, "output file stem (default: command name)");
    sub.add_flag("--print-defaults", a.print_defaults, "print the default config (the schema) and exit");
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"qmix: Lindblad dynamics, jump processes, chaos-game fractals and transfer operators"};
    app.require_subcommand(1);

    struct Entry {
        std::string name;
        std::function<json()> defaults;
        CLI::App* sub;
    };
    std::vector<Entry> entries;
    detail::SubcommandArgs args;
    for (const auto& c : commands::registry()) {
        auto* sub = app.add_subcommand(c.name, c.summary);
        detail::add_common(*sub, args);
        entries.push_back({c.name, c.defaults, sub});
    }
    auto* repro_sub = app.add_subcommand("repro", "run the acceptance recipes and write a pass/fail report");
    detail::add_common(*repro_sub, args);
    entries.push_back({"repro", repro_defaults, repro_sub});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    const Entry* chosen = nullptr;
    for (const auto& e : entries)
        if (e.sub->parsed()) chosen = &e;
    if (args.print_defaults) {
        out << chosen->defaults().dump(2) << "\n";
        return kExitOk;
    }

    try {
        json file;
        if (!args.config_file.empty()) file = detail::load_config_file(args.config_file);
        const json cfg = config::resolve(chosen->defaults(), args.config_file.empty() ? nullptr : &file, args.sets);
        const commands::Output where{args.out_dir, args.name.empty() ? chosen->name : args.name};
        std::vector<commands::fs::path> written;
        bool ok = true;
        if (chosen->name == "repro") {
            written = run_repro(cfg, where, out, ok);
        } else {
            for (const auto& c : commands::registry())
                if (c.name == chosen->name) written = c.run(cfg, where, err);
        }
        for (const auto& p : written) out << p.string() << "\n";
        return ok ? kExitOk : kExitFailure;
    } catch (const ConfigError& e) {
        err << "qmix " << chosen->name << ": config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        err << "qmix " << chosen->name << ": invalid input: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        err << "qmix " << chosen->name << ": config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericalError& e) {
        err << "qmix " << chosen->name << ": numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "qmix " << chosen->name << ": " << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace qmix::cli
