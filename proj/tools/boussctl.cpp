#include <bouss/errors.hpp>
#include <bouss/exec.hpp>
#include <bouss/scenario.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Boundary controllability lab for the Boussinesq system"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    std::string config, out = "run", field;
    int workers = -1;
    bool verbose = false;
    app.add_option("--config", config, "JSON run configuration (defaults apply when omitted)");
    app.add_option("--out", out, "run directory for artifacts");
    app.add_option("--workers", workers, "worker threads (overrides BOUSSCTL_WORKERS and the config)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--verbose", verbose, "print progress to stderr");
    for (const auto& name : bouss::scenario_names()) {
        auto* sub = app.add_subcommand(name, "run the '" + name + "' scenario");
        if (name == "norms") sub->add_option("--field", field, "field dump to analyse")->required();
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        bouss::RunConfig cfg = config.empty() ? bouss::RunConfig{} : bouss::load_run_config(config);
        if (const char* env = std::getenv("BOUSSCTL_WORKERS")) {
            char* end = nullptr;
            const long n = std::strtol(env, &end, 10);
            if (*env == '\0' || *end != '\0' || n < 0) throw bouss::ValidationError("BOUSSCTL_WORKERS must be a non-negative integer");
            cfg.workers = int(n);
        }
        if (workers >= 0) cfg.workers = workers;
        bouss::ScenarioOptions opt;
        opt.field_path = field;
        if (verbose) opt.progress = &std::cerr;
        const std::string sub = app.get_subcommands().front()->get_name();
        const bouss::ScenarioOutcome o = bouss::run_scenario(sub, cfg, out, opt);
        std::cout << sub << ": " << o.message << " (exit " << o.exit_code << ")\n";
        for (const auto& a : o.audits)
            if (!a.pass) std::cout << "  failed: " << a.module << ": " << a.audit << (a.detail.empty() ? "" : " - " + a.detail) << '\n';
        return o.exit_code;
    } catch (const bouss::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
