#include <bouss/field_io.hpp>
#include <bouss/errors.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace bouss {

namespace {

constexpr const char* kMagic = "# bouss-field 1";

void put(std::string& s, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%+.17e", v);
    s += buf;
}

std::string header(const Grid2D& g, const char* kind, const std::string& name, double time) {
    std::string s = kMagic;
    s += "\nkind ";
    s += kind;
    s += "\nname ";
    s += name.empty() ? "-" : name;
    s += "\ntime ";
    put(s, time);
    s += "\nx0 ";
    put(s, g.x0());
    s += "\ny0 ";
    put(s, g.y0());
    s += "\nh ";
    put(s, g.h());
    s += "\nnx " + std::to_string(g.nx()) + "\nny " + std::to_string(g.ny()) + "\ndata\n";
    return s;
}

struct Header {
    std::string kind, name;
    double time = 0, x0 = 0, y0 = 0, h = 0;
    int nx = 0, ny = 0;
};

double parse_double(const std::string& tok, const std::string& path, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0') throw ValidationError(path + ": malformed number '" + tok + "' in " + what);
    return v;
}

Header read_header(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw ValidationError(path + ": not a field file (bad magic line)");
    Header h;
    bool seen[8] = {};
    const char* keys[8] = {"kind", "name", "time", "x0", "y0", "h", "nx", "ny"};
    while (std::getline(in, line)) {
        if (line == "data") {
            for (int k = 0; k < 8; ++k)
                if (!seen[k]) throw ValidationError(path + ": header lacks '" + keys[k] + "'");
            if (h.nx < 1 || h.ny < 1 || !(h.h > 0)) throw ValidationError(path + ": invalid grid in header");
            return h;
        }
        std::istringstream ls(line);
        std::string key, val;
        ls >> key >> val;
        int k = 0;
        while (k < 8 && key != keys[k]) ++k;
        if (k == 8) throw ValidationError(path + ": unknown header key '" + key + "'");
        seen[k] = true;
        switch (k) {
        case 0: h.kind = val; break;
        case 1: h.name = val == "-" ? "" : val; break;
        case 2: h.time = parse_double(val, path, "time"); break;
        case 3: h.x0 = parse_double(val, path, "x0"); break;
        case 4: h.y0 = parse_double(val, path, "y0"); break;
        case 5: h.h = parse_double(val, path, "h"); break;
        case 6: h.nx = int(parse_double(val, path, "nx")); break;
        case 7: h.ny = int(parse_double(val, path, "ny")); break;
        }
    }
    throw ValidationError(path + ": truncated header");
}

void check_expect(const Grid2D& g, const Grid2D* expect, const std::string& path) {
    if (!expect || g.same_as(*expect)) return;
    std::ostringstream os;
    os << path << ": grid mismatch: file has nx=" << g.nx() << " ny=" << g.ny() << " h=" << g.h() << " origin ("
       << g.x0() << "," << g.y0() << "), expected nx=" << expect->nx() << " ny=" << expect->ny() << " h=" << expect->h()
       << " origin (" << expect->x0() << "," << expect->y0() << ")";
    throw ValidationError(os.str());
}

std::vector<double> read_values(std::istream& in, std::size_t count, const std::string& path) {
    std::vector<double> v;
    v.reserve(count);
    std::string tok;
    while (v.size() < count && in >> tok) {
        const double x = parse_double(tok, path, "data");
        if (!std::isfinite(x)) throw ValidationError(path + ": non-finite value at entry " + std::to_string(v.size()));
        v.push_back(x);
    }
    if (v.size() < count)
        throw ValidationError(path + ": truncated data: " + std::to_string(v.size()) + " of " + std::to_string(count) +
                              " values");
    if (in >> tok) throw ValidationError(path + ": trailing data after " + std::to_string(count) + " values");
    return v;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open field file " + path);
    return in;
}

} // namespace

std::string format_field(const ScalarField& f) {
    const Grid2D& g = f.grid;
    std::string s = header(g, "scalar", f.name, f.time);
    s.reserve(s.size() + f.v.size() * 25);
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            if (i) s += ' ';
            put(s, f(i, j));
        }
        s += '\n';
    }
    return s;
}

std::string format_field(const VectorField& f) {
    const Grid2D& g = f.grid;
    std::string s = header(g, "vector", f.name, f.time);
    s.reserve(s.size() + f.u.size() * 50);
    for (int j = 0; j <= g.ny(); ++j) {
        for (int i = 0; i <= g.nx(); ++i) {
            if (i) s += ' ';
            put(s, f.u[g.idx(i, j)]);
            s += ' ';
            put(s, f.w[g.idx(i, j)]);
        }
        s += '\n';
    }
    return s;
}

void write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out << text;
    if (!out) throw ValidationError("write failed for " + path);
}

void dump_field(const std::string& path, const ScalarField& f) { write_text(path, format_field(f)); }
void dump_field(const std::string& path, const VectorField& f) { write_text(path, format_field(f)); }

ScalarField load_scalar(const std::string& path, const Grid2D* expect) {
    std::ifstream in = open_in(path);
    const Header h = read_header(in, path);
    if (h.kind != "scalar") throw ValidationError(path + ": expected a scalar field, found '" + h.kind + "'");
    const Grid2D g(h.x0, h.y0, h.h, h.nx, h.ny);
    check_expect(g, expect, path);
    ScalarField f(g, 0.0, h.name);
    f.time = h.time;
    f.v = read_values(in, g.size(), path);
    return f;
}

VectorField load_vector(const std::string& path, const Grid2D* expect) {
    std::ifstream in = open_in(path);
    const Header h = read_header(in, path);
    if (h.kind != "vector") throw ValidationError(path + ": expected a vector field, found '" + h.kind + "'");
    const Grid2D g(h.x0, h.y0, h.h, h.nx, h.ny);
    check_expect(g, expect, path);
    VectorField f(g, h.name);
    f.time = h.time;
    const std::vector<double> v = read_values(in, 2 * g.size(), path);
    for (std::size_t q = 0; q < g.size(); ++q) {
        f.u[q] = v[2 * q];
        f.w[q] = v[2 * q + 1];
    }
    return f;
}

} // namespace bouss
