#include <doctest.h>

#include <bouss/config.hpp>
#include <bouss/scenario.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bouss;

namespace {

std::string out_dir(const std::string& name) {
    const auto d = std::filesystem::temp_directory_path() / "bouss_scenario_test" / name;
    std::filesystem::remove_all(d);
    return d.string();
}

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("potential scenario writes a manifest and passes") {
    RunConfig c;
    c.nx = 32;
    const std::string d = out_dir("potential");
    const ScenarioOutcome o = run_scenario("potential", c, d);
    CHECK(o.exit_code == 0);
    CHECK(std::filesystem::exists(d + "/manifest.json"));
    CHECK(std::filesystem::exists(d + "/log.txt"));
    CHECK(slurp(d + "/manifest.json").find("\"linear profile on the strip\"") != std::string::npos);
    const ScenarioOutcome again = run_scenario("potential", c, d);
    CHECK(slurp(d + "/log.txt") == slurp(d + "/log.txt"));
    CHECK(again.audits.size() == o.audits.size());
}

TEST_CASE("unknown subcommand and missing field give exit code 1") {
    RunConfig c;
    CHECK(run_scenario("bogus", c, out_dir("bogus")).exit_code == 1);
    CHECK(run_scenario("norms", c, out_dir("norms")).exit_code == 1);
}

TEST_CASE("local scenario with zero data reports one iteration") {
    RunConfig c = parse_run_config(R"({"grid": {"nx": 32, "n_steps": 32},
        "data": {"y0": {"kind": "zero"}, "theta0": {"kind": "zero"}}})");
    const std::string d = out_dir("local_zero");
    const ScenarioOutcome o = run_scenario("local", c, d);
    CHECK(o.exit_code == 0);
    const std::string fp = slurp(d + "/fixed_point.csv");
    CHECK(std::count(fp.begin(), fp.end(), '\n') == 2);  // header plus one iteration
}

TEST_CASE("norms scenario reads a field dump") {
    RunConfig c;
    c.nx = 32;
    const std::string d = out_dir("norms_src");
    REQUIRE(run_scenario("potential", c, d).exit_code == 0);
    ScenarioOptions opt;
    opt.field_path = d + "/phi_strip.field";
    const std::string n = out_dir("norms_run");
    CHECK(run_scenario("norms", c, n, opt).exit_code == 0);
    CHECK(slurp(n + "/norms.csv").find("norms,0,2") != std::string::npos);
}
