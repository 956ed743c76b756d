#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "bolab/field.hpp"

namespace bolab {

/// Column CSV: a `# n=<int> L=<float>` header, then one sample per row, x ascending.
void write_field_csv(std::ostream& out, const Field& f);
void write_field_csv(const std::filesystem::path& path, const Field& f);

/// Reads a column CSV. If `grid` is given it must match the header; otherwise a grid is built.
Field read_field_csv(std::istream& in, GridPtr grid = nullptr);
Field read_field_csv(const std::filesystem::path& path, GridPtr grid = nullptr);

/// Flat binary: "BOLF", uint64 n, float64 L, then n float64 samples (host byte order).
void write_field_binary(const std::filesystem::path& path, const Field& f);
Field read_field_binary(const std::filesystem::path& path, GridPtr grid = nullptr);

/// Strict finite decimal parse (surrounding blanks allowed); throws ValidationError naming `what`.
double parse_double(const std::string& s, const std::string& what);

/// Shortest round-trip decimal representation of a double.
std::string format_double(double v);

}  // namespace bolab
