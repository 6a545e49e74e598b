#pragma once

#include <bouss/config.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace bouss {

struct AuditLine {
    std::string module, audit;
    bool pass = false;
    double value = 0.0, tolerance = 0.0;
    std::string detail;
};

struct ScenarioOutcome {
    int exit_code = 0;  // 0 all audits pass, 1 usage/validation error, 2 audit or solver failure
    std::vector<AuditLine> audits;
    std::vector<std::string> artifacts;  // paths relative to the run directory
    std::string message;
};

struct ScenarioOptions {
    std::string field_path;           // input dump for 'norms'
    std::ostream* progress = nullptr;  // verbose progress sink
};

const std::vector<std::string>& scenario_names();

// Runs one subcommand and writes its artifacts, a deterministic log and manifest.json under out_dir.
ScenarioOutcome run_scenario(const std::string& subcommand, const RunConfig& cfg, const std::string& out_dir,
                             const ScenarioOptions& opt = {});

} // namespace bouss
