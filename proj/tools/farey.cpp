#include "commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace farey;
using namespace farey::cli;

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Farey projection data: axiom checks, thin and thick covers, amenability defects"};
    app.require_subcommand(0, 1);
    app.fallthrough();
    std::string config_path, out_dir = "out", scene = "all";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> max_refine;
    std::optional<long> samples;
    bool calibrate = false;
    app.add_option("--config", config_path, "flat JSON config");
    app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out_dir, "report directory");
    app.add_option("--max-refine", max_refine, "refinement levels for certified comparisons");
    app.add_flag("--calibrate", calibrate, "run the brute-force oracles and write a pinned config");

    std::vector<CLI::App*> cmds;
    for (const char* name : {"axioms", "complex", "thin", "thick", "amenability", "render"}) cmds.push_back(app.add_subcommand(name));
    cmds[0]->description("projection axioms P1-P5 on sampled and windowed data");
    cmds[1]->description("projection complex constants on the reference windows");
    cmds[2]->description("thin cover theorem on sampled thin pairs");
    cmds[3]->description("thick cover theorem on rays toward quadratic surds");
    cmds[4]->description("combined cover, nerve-map defects and coinduction");
    cmds[5]->description("SVG scenes");
    cmds[5]->add_option("--scene", scene, "thin, thick or all");
    for (auto* c : {cmds[0], cmds[2], cmds[3]}) c->add_option("--samples", samples, "sample size override");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        if (seed) cfg.doc["seed"] = *seed;
        if (max_refine) cfg.doc["max_refine"] = *max_refine;
        farey::max_refine() = static_cast<unsigned>(cfg.integer("max_refine"));
        std::filesystem::path out(out_dir);

        if (calibrate) {
            auto r = cmd_calibrate(cfg);
            write_file(out / "calibrated.json", r.results["config"].dump(2) + "\n");
            r.results.erase("config");
            write_file(out / "calibrate.json", make_report("calibrate", cfg, r.results).dump(2) + "\n");
            std::cout << "theta_hat " << r.results["theta_hat"].get<std::string>() << ", pinned config in "
                      << (out / "calibrated.json").string() << "\n";
            if (app.get_subcommands().empty()) return r.code;
        }
        if (app.get_subcommands().empty()) {
            std::cout << app.help();
            return 0;
        }
        const std::string name = app.get_subcommands().front()->get_name();
        if (samples) {
            const char* key = name == "axioms" ? "axiom_samples" : name == "thin" ? "thin_samples" : "thick_extra";
            cfg.doc[key] = *samples;
        }
        if (name == "render") {
            for (const auto& [file, svg] : cmd_render(cfg, scene)) {
                write_file(out / file, svg);
                std::cout << (out / file).string() << "\n";
            }
            return 0;
        }
        Outcome r = name == "axioms"        ? cmd_axioms(cfg)
                    : name == "complex"     ? cmd_complex(cfg)
                    : name == "thin"        ? cmd_thin(cfg)
                    : name == "thick"       ? cmd_thick(cfg)
                                            : cmd_amenability(cfg);
        write_file(out / (name + ".json"), make_report(name, cfg, r.results).dump(2) + "\n");
        std::cout << name << ": " << (r.code == 0 ? "passed" : "failed") << " (" << (out / (name + ".json")).string()
                  << ")\n";
        return r.code;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
