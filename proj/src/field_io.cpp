#include "bolab/field_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bolab/errors.hpp"

namespace bolab {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t' || last[-1] == '\r')) --last;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
    throw ValidationError("cannot parse " + what + ": '" + s + "'");
  return v;
}

namespace {

GridPtr resolve_grid(GridPtr grid, std::size_t n, double L) {
  if (!grid) return make_grid(n, L);
  if (grid->n_points() != n || grid->half_length() != L)
    throw ValidationError("field header does not match the requested grid");
  return grid;
}

}  // namespace

void write_field_csv(std::ostream& out, const Field& f) {
  out << "# n=" << f.grid().n_points() << " L=" << format_double(f.grid().half_length()) << '\n';
  for (double v : f.values()) out << format_double(v) << '\n';
}

void write_field_csv(const std::filesystem::path& path, const Field& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_field_csv(out, f);
}

Field read_field_csv(std::istream& in, GridPtr grid) {
  std::string line;
  std::size_t n = 0;
  double L = 0.0;
  bool header = false;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string tok;
      while (hs >> tok) {
        if (tok.rfind("n=", 0) == 0) n = static_cast<std::size_t>(parse_double(tok.substr(2), "n"));
        if (tok.rfind("L=", 0) == 0) L = parse_double(tok.substr(2), "L");
      }
      header = n > 0 && L > 0.0;
      continue;
    }
    values.push_back(parse_double(line, "sample"));
  }
  if (!header) throw ValidationError("field CSV lacks a '# n=<int> L=<float>' header");
  if (values.size() != n)
    throw ValidationError("field CSV has " + std::to_string(values.size()) + " samples, header says " +
                          std::to_string(n));
  return Field(resolve_grid(std::move(grid), n, L), std::move(values));
}

Field read_field_csv(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open field file " + path.string());
  return read_field_csv(in, std::move(grid));
}

void write_field_binary(const std::filesystem::path& path, const Field& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::uint64_t n = f.size();
  const double L = f.grid().half_length();
  out.write("BOLF", 4);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&L), sizeof L);
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(n * sizeof(double)));
}

Field read_field_binary(const std::filesystem::path& path, GridPtr grid) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open field file " + path.string());
  char magic[4];
  std::uint64_t n = 0;
  double L = 0.0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&n), sizeof n);
  in.read(reinterpret_cast<char*>(&L), sizeof L);
  if (!in || std::memcmp(magic, "BOLF", 4) != 0) throw ValidationError("not a binary field file");
  std::vector<double> values(n);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw ValidationError("truncated binary field file");
  return Field(resolve_grid(std::move(grid), n, L), std::move(values));
}

}  // namespace bolab
