#pragma once

// Plain-text field dump format, written so that a read-back is bit-exact:
//
//   levex-field 1
//   ndim <2|3>
//   dims <n0> <n1> [n2]
//   origin <x0> <x1> [x2]
//   spacing <h0> <h1> [h2]
//   values <count>
//   <count lines, one %.17g value each, axis-0 fastest>
//
// Doubles are printed with %.17g, which round-trips IEEE binary64 exactly.

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "levex/grid.hpp"

namespace levex {

inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_field(const std::string& path, const ScalarField& f) {
  const Grid& g = f.grid;
  for (std::int64_t k = 0; k < g.node_count(); ++k)
    if (!std::isfinite(f[k]))
      throw std::runtime_error("write_field: non-finite value at linear index " +
                               std::to_string(k));
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_field: cannot open " + path);
  os << "levex-field 1\n";
  os << "ndim " << g.ndim << "\n";
  os << "dims";
  for (int a = 0; a < g.ndim; ++a) os << " " << g.dims[a];
  os << "\norigin";
  for (int a = 0; a < g.ndim; ++a) os << " " << fmt_g17(g.origin[a]);
  os << "\nspacing";
  for (int a = 0; a < g.ndim; ++a) os << " " << fmt_g17(g.spacing[a]);
  os << "\nvalues " << g.node_count() << "\n";
  for (std::int64_t k = 0; k < g.node_count(); ++k) os << fmt_g17(f[k]) << "\n";
  if (!os) throw std::runtime_error("write_field: write failed for " + path);
}

namespace detail {

[[noreturn]] inline void io_fail(const std::string& path, int line,
                                 const std::string& what) {
  throw std::runtime_error("read_field: " + path + ":" + std::to_string(line) +
                           ": " + what);
}

}  // namespace detail

inline ScalarField read_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_field: cannot open " + path);
  std::string line;
  int lineno = 0;
  auto next = [&](const char* what) {
    if (!std::getline(is, line)) detail::io_fail(path, lineno + 1, std::string("missing ") + what);
    ++lineno;
  };

  next("magic header");
  if (line != "levex-field 1") detail::io_fail(path, lineno, "bad magic, expected 'levex-field 1'");

  int ndim = 0;
  next("ndim");
  if (std::sscanf(line.c_str(), "ndim %d", &ndim) != 1 || (ndim != 2 && ndim != 3))
    detail::io_fail(path, lineno, "bad ndim line '" + line + "'");

  Grid g;
  g.ndim = ndim;
  auto parse_vec = [&](const char* key, auto&& store) {
    next(key);
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != key) detail::io_fail(path, lineno, std::string("expected '") + key + "' line");
    for (int a = 0; a < ndim; ++a) {
      if (!store(ss, a)) detail::io_fail(path, lineno, std::string("bad ") + key + " entry");
    }
  };
  parse_vec("dims", [&](std::istringstream& ss, int a) {
    if (!(ss >> g.dims[a]) || g.dims[a] < 1) return false;
    return true;
  });
  parse_vec("origin", [&](std::istringstream& ss, int a) { return bool(ss >> g.origin[a]); });
  parse_vec("spacing", [&](std::istringstream& ss, int a) { return bool(ss >> g.spacing[a]); });

  std::int64_t count = 0;
  next("values");
  if (std::sscanf(line.c_str(), "values %" SCNd64, &count) != 1)
    detail::io_fail(path, lineno, "bad values line '" + line + "'");
  if (count != g.node_count())
    detail::io_fail(path, lineno, "value count " + std::to_string(count) +
                                      " does not match dims");

  ScalarField f = make_field(g);
  for (std::int64_t k = 0; k < count; ++k) {
    next("value");
    char* end = nullptr;
    double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || !std::isfinite(v))
      detail::io_fail(path, lineno, "bad value '" + line + "'");
    f[k] = v;
  }
  return f;
}

}  // namespace levex
