#include "pnmzi/harness.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

enum Exit { kOk = 0, kToleranceFailure = 1, kConfigError = 2 };

struct Common {
    std::string config;
    std::string preset;
    std::string out;
    std::string format;
    double tolerance = 0.0;
    bool timing = false;
};

void add_common(CLI::App* cmd, Common& o, bool with_tolerance) {
    auto* cfg = cmd->add_option("--config", o.config, "scenario config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--preset", o.preset, "named preset")->excludes(cfg);
    cmd->add_option("--out", o.out, "output directory (default: config, then $PNMZI_OUT_DIR, then ./pnmzi-out)");
    cmd->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    if (with_tolerance)
        cmd->add_option("--tolerance", o.tolerance, "oracle integrator relative tolerance")->check(CLI::PositiveNumber);
    cmd->add_flag("--timing", o.timing, "include wall-clock time in the record");
}

pnmzi::ScenarioConfig resolve(const Common& o) {
    if (o.config.empty() && o.preset.empty()) throw pnmzi::ConfigError({"one of --config or --preset is required"});
    pnmzi::ScenarioConfig cfg = o.config.empty() ? pnmzi::preset(o.preset) : pnmzi::load_config(o.config);
    if (!o.format.empty()) cfg.format = o.format;
    if (o.tolerance > 0.0) cfg.tolerances.oracle_rel = o.tolerance;
    if (o.timing) cfg.timing = true;
    if (auto errs = pnmzi::validate_config(cfg); !errs.empty()) throw pnmzi::ConfigError(std::move(errs));
    return cfg;
}

std::string output_dir(const Common& o, const pnmzi::ScenarioConfig& cfg) {
    if (!o.out.empty()) return o.out;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("PNMZI_OUT_DIR"); env && *env) return env;
    return "pnmzi-out";
}

void report(const pnmzi::RunRecord& rec) {
    for (const auto& r : rec.residuals)
        std::cout << (r.passed ? "ok   " : "FAIL ") << r.scenario << "  " << pnmzi::format_double(r.value) << " <= "
                  << pnmzi::format_double(r.tolerance) << (r.note.empty() ? "" : "  (" + r.note + ")") << '\n';
}

int finish(const pnmzi::RunRecord& rec, const Common& o, const pnmzi::ScenarioConfig& cfg, const std::string& stem) {
    const std::string path = pnmzi::emit(rec, cfg.format, output_dir(o, cfg), stem, cfg.timing);
    std::cout << "wrote " << path << '\n';
    for (const auto& [suffix, text] : rec.attachments)
        std::cout << "wrote " << (std::filesystem::path(path).parent_path() / (stem + "-" + suffix + ".csv")).string() << '\n';
    if (!rec.residuals.empty()) report(rec);
    return rec.passed() ? kOk : kToleranceFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Post-Newtonian Mach-Zehnder interferometer phase and polarization calculator"};
    app.set_version_flag("--version", std::string(PNMZI_VERSION));
    app.require_subcommand(1);

    Common run_opt, sweep_opt, val_opt;
    auto* run = app.add_subcommand("run", "run a single scenario");
    add_common(run, run_opt, true);
    auto* sweep = app.add_subcommand("sweep", "run the sweep in the config");
    add_common(sweep, sweep_opt, true);
    auto* val = app.add_subcommand("validate", "oracle cross-validation suite");
    add_common(val, val_opt, true);
    auto* pre = app.add_subcommand("presets", "list presets, or write them as config files with --out");
    std::string pre_out;
    pre->add_option("--out", pre_out, "directory to write preset configs into");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (*pre) {
            for (const auto& name : pnmzi::preset_names()) {
                const pnmzi::ScenarioConfig cfg = pnmzi::preset(name);
                std::cout << name << "  " << pnmzi::to_string(cfg.kind) << '\n';
                if (!pre_out.empty()) {
                    std::filesystem::create_directories(pre_out);
                    std::ofstream(std::filesystem::path(pre_out) / (name + ".json")) << pnmzi::to_json(cfg).dump(2) << '\n';
                }
            }
            return kOk;
        }
        if (*run) {
            const pnmzi::ScenarioConfig cfg = resolve(run_opt);
            return finish(pnmzi::run_scenario(cfg), run_opt, cfg, cfg.name + "-" + pnmzi::to_string(cfg.kind));
        }
        if (*sweep) {
            const pnmzi::ScenarioConfig cfg = resolve(sweep_opt);
            if (!cfg.sweep) throw pnmzi::ConfigError({"sweep: config has no sweep section"});
            return finish(pnmzi::run_sweep(cfg), sweep_opt, cfg, cfg.name + "-sweep-" + cfg.sweep->parameter);
        }
        pnmzi::ScenarioConfig cfg = resolve(val_opt);
        cfg.kind = pnmzi::ScenarioKind::Validate;
        return finish(pnmzi::validate_suite(cfg), val_opt, cfg, cfg.name + "-validate");
    } catch (const pnmzi::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kConfigError;
    } catch (const pnmzi::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
}
