#include <doctest.h>

#include <bouss/errors.hpp>
#include <bouss/field_io.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bouss;

namespace {

std::string tmp(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "bouss_field_io_test";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& p, const std::string& s) { std::ofstream(p) << s; }

std::string message_of(const std::string& path, const Grid2D* expect = nullptr) {
    try {
        (void)load_scalar(path, expect);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("scalar and vector dumps round-trip exactly") {
    const Grid2D g(0.5, 0.25, 1.0 / 7, 7, 3);
    ScalarField f = sample(g, [](Vec2 p) { return std::exp(p.x) / 3.0 - 1e-300 * p.y; });
    f.time = 0.125;
    f.name = "theta";
    dump_field(tmp("s.field"), f);
    const ScalarField r = load_scalar(tmp("s.field"), &g);
    CHECK(r.v == f.v);
    CHECK(r.time == 0.125);
    CHECK(r.name == "theta");
    CHECK(r.grid.same_as(g));

    VectorField v(g, "y");
    for (std::size_t k = 0; k < g.size(); ++k) {
        v.u[k] = std::sin(double(k));
        v.w[k] = -1.0 / (1.0 + k);
    }
    dump_field(tmp("v.field"), v);
    const VectorField rv = load_vector(tmp("v.field"));
    CHECK(rv.u == v.u);
    CHECK(rv.w == v.w);
}

TEST_CASE("truncated file is rejected") {
    const Grid2D g(0, 0, 0.25, 4, 4);
    dump_field(tmp("t.field"), ScalarField(g, 1.0));
    std::string s = slurp(tmp("t.field"));
    s.resize(s.size() - 60);
    spit(tmp("t.field"), s);
    const std::string m = message_of(tmp("t.field"));
    CHECK(m.find("of 25") != std::string::npos);
}

TEST_CASE("grid mismatch names both values") {
    const Grid2D g(0, 0, 0.25, 4, 4), other(0, 0, 0.25, 8, 4);
    dump_field(tmp("m.field"), ScalarField(g, 1.0));
    const std::string m = message_of(tmp("m.field"), &other);
    CHECK(m.find("nx") != std::string::npos);
    CHECK(m.find('4') != std::string::npos);
    CHECK(m.find('8') != std::string::npos);
}

TEST_CASE("malformed headers and values are rejected") {
    spit(tmp("bad.field"), "not a field\n");
    CHECK(message_of(tmp("bad.field")).find("magic") != std::string::npos);
    const Grid2D g(0, 0, 0.5, 2, 2);
    dump_field(tmp("nan.field"), ScalarField(g, 1.0));
    std::string s = slurp(tmp("nan.field"));
    s.replace(s.rfind("+1.0"), 23, "nan");
    spit(tmp("nan.field"), s);
    CHECK_FALSE(message_of(tmp("nan.field")).empty());
    CHECK_THROWS_AS(load_scalar(tmp("does_not_exist.field")), ValidationError);
    dump_field(tmp("vec.field"), VectorField(g));
    CHECK_THROWS_AS(load_scalar(tmp("vec.field")), ValidationError);
}
