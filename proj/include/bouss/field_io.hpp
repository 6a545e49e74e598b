#pragma once

#include <bouss/field.hpp>

#include <string>

namespace bouss {

// Text format: a header of key/value lines, then one line per grid row (j ascending) holding
// nx+1 values (scalar) or nx+1 "u w" pairs (vector), each printed with %+.17e so that finite
// values round-trip exactly.
void dump_field(const std::string& path, const ScalarField& f);
void dump_field(const std::string& path, const VectorField& f);
std::string format_field(const ScalarField& f);
std::string format_field(const VectorField& f);

// expect, when given, must match the file's grid; mismatches name both values.
ScalarField load_scalar(const std::string& path, const Grid2D* expect = nullptr);
VectorField load_vector(const std::string& path, const Grid2D* expect = nullptr);

// Writes text to path, creating parent directories.
void write_text(const std::string& path, const std::string& text);

} // namespace bouss
