#include <doctest.h>

#include <bouss/config.hpp>
#include <bouss/errors.hpp>

#include <string>

using namespace bouss;

namespace {

std::string error_of(const std::string& text) {
    try {
        (void)parse_run_config(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("empty object gives the defaults") {
    const RunConfig c = parse_run_config("{}");
    CHECK(c.nx == 128);
    CHECK(c.n_steps == 64);
    CHECK(c.nu == 1000.0);
    CHECK(c.seed == 11);
}

TEST_CASE("blocks override fields") {
    const RunConfig c = parse_run_config(R"({
        "grid": {"nx": 64, "n_steps": 32},
        "tolerances": {"glue_tol": 1e-4, "eps_sweep": [1e-2, 1e-3]},
        "physics": {"kappa": 0.2, "k": [1, 0]},
        "data": {"theta0": {"kind": "bump", "amplitude": 0.01, "center": [1.0, 0.5], "radius": 0.1}},
        "seed": 5
    })");
    CHECK(c.nx == 64);
    CHECK(c.n_steps == 32);
    CHECK(c.glue_tol == 1e-4);
    CHECK(c.eps_sweep.size() == 2);
    CHECK(c.kappa == 0.2);
    CHECK(c.k == Vec2{1, 0});
    CHECK(c.theta0.shape.radius == 0.1);
    CHECK(c.seed == 5);
    CHECK(c.return_config().nx == 64);
    CHECK(c.heat_config().kappa == 0.2);
}

TEST_CASE("canonical JSON re-parses to the same configuration") {
    const RunConfig c = parse_run_config(R"({"grid": {"nx": 64}, "seed": 3})");
    CHECK(parse_run_config(c.to_json()).to_json() == c.to_json());
}

TEST_CASE("invalid configurations are rejected with a reason") {
    CHECK(error_of(R"({"grid": {"nxx": 3}})").find("grid.nxx") != std::string::npos);
    CHECK(error_of(R"({"bogus": 1})").find("bogus") != std::string::npos);
    CHECK(error_of(R"({"grid": {"nx": "many"}})").find("grid.nx") != std::string::npos);
    CHECK(error_of(R"({"grid": {"n_steps": 63}})").find("even") != std::string::npos);
    CHECK(error_of(R"({"tolerances": {"fp_tol": -1}})").find("fp_tol") != std::string::npos);
    CHECK(error_of(R"({"physics": {"T": 0.5, "T_star": 0.5}})").find("T_star") != std::string::npos);
    CHECK(error_of(R"({"data": {"y0": {"kind": "bump"}}})").find("velocity") != std::string::npos);
    CHECK(error_of(R"({"data": {"theta0": {"kind": "vortex"}}})").find("vortex") != std::string::npos);
    CHECK(error_of(R"({"grid": {"ny": 7}})").find("ny") != std::string::npos);
    CHECK(error_of("{").find("parse") != std::string::npos);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), ValidationError);
}

TEST_CASE("data resolution") {
    const Grid2D g(0.5, 0.25, 1.0 / 32, 32, 16);
    DataSpec d;
    d.shape = {"bump", 0.01, {1.0, 0.5}, 0.2};
    const ScalarField f = resolve_scalar(d, g);
    CHECK(f(16, 8) == doctest::Approx(0.01));
    CHECK(f(0, 0) == 0.0);
    DataSpec v;
    v.shape = {"solenoidal", 0.02, {1.0, 0.5}, 0.2};
    CHECK(resolve_vector(v, g).max_abs() == doctest::Approx(0.02));
}
