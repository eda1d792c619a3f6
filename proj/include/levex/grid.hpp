#pragma once

// Node-centered tensor-product grids and the masks/level sets built on them.
//
// Conventions used throughout the library:
//   * Grids are 2D or 3D; inactive axes have dims = 1, spacing = 1, origin = 0.
//   * Nodes include both extent endpoints: spacing[a] = (hi - lo) / (dims[a] - 1).
//     (Periodic problems pass extents that already exclude the duplicate
//     endpoint; the grid itself is boundary-condition agnostic.)
//   * Linear node index is axis-0 fastest: k = i0 + dims[0]*(i1 + dims[1]*i2).
//   * Level sets follow the sign convention phi < 0 inside, phi > 0 outside.
//   * Mask.known flags the marked node set (known values for extension masks,
//     in-band nodes for interface bands); unknown_index lists the complement
//     in ascending linear order.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace levex {

enum class BcKind { DirichletZero, NeumannZero, Periodic };

inline const char* bc_name(BcKind k) {
  switch (k) {
    case BcKind::DirichletZero: return "dirichlet";
    case BcKind::NeumannZero: return "neumann";
    case BcKind::Periodic: return "periodic";
  }
  return "?";
}

// Per-face boundary conditions, faces[axis][0] = low face, faces[axis][1] = high.
struct BcSpec {
  std::array<std::array<BcKind, 2>, 3> faces{};

  static BcSpec uniform(BcKind k) {
    BcSpec bc;
    for (auto& f : bc.faces) f = {k, k};
    return bc;
  }

  static BcSpec per_axis(std::initializer_list<BcKind> kinds) {
    BcSpec bc = uniform(BcKind::NeumannZero);
    int a = 0;
    for (BcKind k : kinds) {
      if (a >= 3) throw std::invalid_argument("BcSpec: more than 3 axes");
      bc.faces[a++] = {k, k};
    }
    return bc;
  }

  // Periodic makes sense only as a matched pair on an axis.
  void validate(int ndim) const {
    for (int a = 0; a < ndim; ++a) {
      bool lo = faces[a][0] == BcKind::Periodic;
      bool hi = faces[a][1] == BcKind::Periodic;
      if (lo != hi)
        throw std::invalid_argument(
            "BcSpec: axis " + std::to_string(a) +
            " pairs periodic with a non-periodic face");
    }
  }
};

struct Grid {
  int ndim = 2;
  std::array<int, 3> dims{1, 1, 1};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};

  std::int64_t node_count() const {
    return std::int64_t(dims[0]) * dims[1] * dims[2];
  }

  std::int64_t index(int i, int j, int k = 0) const {
    return i + std::int64_t(dims[0]) * (j + std::int64_t(dims[1]) * k);
  }

  std::array<int, 3> decompose(std::int64_t lin) const {
    int i = int(lin % dims[0]);
    lin /= dims[0];
    int j = int(lin % dims[1]);
    int k = int(lin / dims[1]);
    return {i, j, k};
  }

  double coord(int axis, int i) const { return origin[axis] + spacing[axis] * i; }

  std::array<double, 3> node(std::int64_t lin) const {
    auto ijk = decompose(lin);
    return {coord(0, ijk[0]), coord(1, ijk[1]), coord(2, ijk[2])};
  }

  double min_spacing() const {
    double h = spacing[0];
    for (int a = 1; a < ndim; ++a) h = std::min(h, spacing[a]);
    return h;
  }

  double max_spacing() const {
    double h = spacing[0];
    for (int a = 1; a < ndim; ++a) h = std::max(h, spacing[a]);
    return h;
  }

  bool same_layout(const Grid& o) const {
    return ndim == o.ndim && dims == o.dims && origin == o.origin &&
           spacing == o.spacing;
  }
};

namespace detail {

inline Grid make_grid_impl(int ndim,
                           const std::array<std::array<double, 2>, 3>& extents,
                           const std::array<int, 3>& dims) {
  Grid g;
  g.ndim = ndim;
  for (int a = 0; a < ndim; ++a) {
    if (dims[a] < 4)
      throw std::invalid_argument("make_grid: axis " + std::to_string(a) +
                                  " needs at least 4 nodes, got " +
                                  std::to_string(dims[a]));
    double lo = extents[a][0], hi = extents[a][1];
    if (!(hi > lo))
      throw std::invalid_argument("make_grid: axis " + std::to_string(a) +
                                  " has non-increasing extents");
    g.dims[a] = dims[a];
    g.origin[a] = lo;
    g.spacing[a] = (hi - lo) / (dims[a] - 1);
  }
  return g;
}

}  // namespace detail

inline Grid make_grid(std::array<double, 2> xext, std::array<double, 2> yext,
                      int nx, int ny) {
  return detail::make_grid_impl(2, {xext, yext, {{0.0, 1.0}}}, {nx, ny, 1});
}

inline Grid make_grid(std::array<double, 2> xext, std::array<double, 2> yext,
                      std::array<double, 2> zext, int nx, int ny, int nz) {
  return detail::make_grid_impl(3, {xext, yext, zext}, {nx, ny, nz});
}

struct ScalarField {
  Grid grid;
  std::vector<double> values;

  double& operator[](std::int64_t k) { return values[k]; }
  double operator[](std::int64_t k) const { return values[k]; }
  double& at(int i, int j, int k = 0) { return values[grid.index(i, j, k)]; }
  double at(int i, int j, int k = 0) const { return values[grid.index(i, j, k)]; }
};

inline ScalarField make_field(const Grid& g, double fill = 0.0) {
  return ScalarField{g, std::vector<double>(std::size_t(g.node_count()), fill)};
}

// Evaluate f(x, y, z) at every node. Rejects non-finite samples because every
// downstream operation assumes finite fields.
template <class F>
ScalarField sample(const Grid& g, F&& f) {
  ScalarField out = make_field(g);
  std::int64_t lin = 0;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i, ++lin) {
        double v = f(g.coord(0, i), g.coord(1, j), g.coord(2, k));
        if (!std::isfinite(v))
          throw std::runtime_error(
              "sample: non-finite value at node (" + std::to_string(i) + "," +
              std::to_string(j) + "," + std::to_string(k) + ") = (" +
              std::to_string(g.coord(0, i)) + "," + std::to_string(g.coord(1, j)) +
              "," + std::to_string(g.coord(2, k)) + ")");
        out.values[std::size_t(lin)] = v;
      }
  return out;
}

struct LevelSet {
  ScalarField phi;  // phi < 0 inside, phi > 0 outside
};

struct Mask {
  Grid grid;
  std::vector<std::uint8_t> known;          // marked set, 1 per node
  std::vector<std::int64_t> unknown_index;  // complement, ascending

  std::int64_t known_count() const {
    return grid.node_count() - std::int64_t(unknown_index.size());
  }
};

inline Mask make_mask(const Grid& g, std::vector<std::uint8_t> known) {
  if (std::int64_t(known.size()) != g.node_count())
    throw std::invalid_argument("make_mask: flag count does not match grid");
  Mask m{g, std::move(known), {}};
  for (std::int64_t k = 0; k < g.node_count(); ++k)
    if (!m.known[std::size_t(k)]) m.unknown_index.push_back(k);
  return m;
}

enum class ExtendSide { InsideKnown, OutsideKnown };

// Known set from the level set sign; phi == 0 ties break to known.
inline Mask mask_from_levelset(const LevelSet& ls, ExtendSide side) {
  const Grid& g = ls.phi.grid;
  std::vector<std::uint8_t> known(std::size_t(g.node_count()), 0);
  for (std::int64_t k = 0; k < g.node_count(); ++k) {
    double p = ls.phi[k];
    known[std::size_t(k)] = (side == ExtendSide::InsideKnown) ? (p <= 0.0) : (p >= 0.0);
  }
  Mask m = make_mask(g, std::move(known));
  if (m.unknown_index.empty())
    throw std::runtime_error("mask_from_levelset: all nodes known, nothing to extend");
  if (m.known_count() == 0)
    throw std::runtime_error("mask_from_levelset: level set leaves no known nodes");
  return m;
}

// Nodes with |phi| <= cells * max active spacing. cells = 0 marks only exact
// zero-crossing nodes.
inline Mask interface_band(const LevelSet& ls, double cells) {
  if (!(cells >= 0.0))
    throw std::invalid_argument("interface_band: cells must be >= 0");
  const Grid& g = ls.phi.grid;
  double width = cells * g.max_spacing();
  std::vector<std::uint8_t> in(std::size_t(g.node_count()), 0);
  for (std::int64_t k = 0; k < g.node_count(); ++k)
    in[std::size_t(k)] = std::fabs(ls.phi[k]) <= width;
  return make_mask(g, std::move(in));
}

}  // namespace levex
