#pragma once

// Dimensionless 13-point (2D) / 25-point (3D) biharmonic stencil, built as the
// composition of two applications of the dimensionless 5/7-point Laplacian on
// a field padded with two ghost layers per face:
//
//   DirichletZero  outer ghost = -(first interior), inner ghost = 0
//                  (zero boundary one spacing outside the stored extent)
//   NeumannZero    half-sample reflection: ghosts mirror the first two
//                  interior layers (wall half a spacing outside)
//   Periodic       wraparound
//
// No grid-spacing factors appear anywhere; the solve is scale-free.
//
// Neighbor sums are accumulated as symmetric pairs, (west+east) + (south+north),
// so that mirror-symmetric inputs produce bitwise mirror-symmetric outputs.

#include "levex/grid.hpp"

namespace levex {

struct PaddedField {
  Grid grid;                   // the interior grid
  std::array<int, 3> pdims{};  // dims + 4 on active axes, 1 otherwise
  std::vector<double> values;

  // i,j,k in interior coordinates; ghosts at -2..-1 and dims..dims+1.
  double at(int i, int j, int k = 0) const {
    std::array<int, 3> off{grid.ndim > 0 ? 2 : 0, grid.ndim > 1 ? 2 : 0,
                           grid.ndim > 2 ? 2 : 0};
    return values[std::size_t((i + off[0]) +
                              std::int64_t(pdims[0]) *
                                  ((j + off[1]) + std::int64_t(pdims[1]) * (k + off[2])))];
  }
};

namespace detail {

inline void pad_into(const Grid& g, const BcSpec& bc, const double* f,
                     std::vector<double>& P, std::array<int, 3>& pd) {
  bc.validate(g.ndim);
  for (int a = 0; a < 3; ++a) pd[a] = (a < g.ndim) ? g.dims[a] + 4 : 1;
  P.assign(std::size_t(pd[0]) * pd[1] * pd[2], 0.0);

  const std::array<int, 3> off{2, g.ndim > 1 ? 2 : 0, g.ndim > 2 ? 2 : 0};
  std::int64_t lin = 0;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i, ++lin)
        P[std::size_t((i + off[0]) +
                      std::int64_t(pd[0]) * ((j + off[1]) + std::int64_t(pd[1]) * (k + off[2])))] =
            f[std::size_t(lin)];

  // Fill ghosts axis by axis. Transverse ranges cover already-padded axes in
  // full and not-yet-padded axes on their interior, so corners resolve after
  // the later axis runs; the fill rules commute between axes.
  for (int a = 0; a < g.ndim; ++a) {
    const int m = g.dims[a];
    std::array<std::int64_t, 3> strides{1, pd[0], std::int64_t(pd[0]) * pd[1]};
    std::array<int, 3> lo{0, 0, 0}, hi{1, 1, 1};
    for (int b = 0; b < 3; ++b) {
      if (b == a) { lo[b] = 0; hi[b] = 1; continue; }
      if (b >= g.ndim) { lo[b] = 0; hi[b] = 1; continue; }
      if (b < a) { lo[b] = 0; hi[b] = pd[b]; }
      else { lo[b] = 2; hi[b] = g.dims[b] + 2; }
    }
    const std::int64_t sa = strides[a];
    const BcKind blo = bc.faces[a][0], bhi = bc.faces[a][1];
    for (int t2 = lo[2]; t2 < hi[2]; ++t2)
      for (int t1 = lo[1]; t1 < hi[1]; ++t1)
        for (int t0 = lo[0]; t0 < hi[0]; ++t0) {
          std::int64_t base = t0 * strides[0] + t1 * strides[1] + t2 * strides[2];
          auto at = [&](int i) -> double& {
            return P[std::size_t(base + (i + 2) * sa)];
          };
          switch (blo) {
            case BcKind::DirichletZero: at(-1) = 0.0; at(-2) = -at(0); break;
            case BcKind::NeumannZero: at(-1) = at(0); at(-2) = at(1); break;
            case BcKind::Periodic: at(-1) = at(m - 1); at(-2) = at(m - 2); break;
          }
          switch (bhi) {
            case BcKind::DirichletZero: at(m) = 0.0; at(m + 1) = -at(m - 1); break;
            case BcKind::NeumannZero: at(m) = at(m - 1); at(m + 1) = at(m - 2); break;
            case BcKind::Periodic: at(m) = at(0); at(m + 1) = at(1); break;
          }
        }
  }
}

struct BiharmonicWorkspace {
  std::vector<double> padded;
  std::vector<double> ring;
};

inline void apply_biharmonic_into(const Grid& g, const BcSpec& bc, const double* in,
                                  double* out, BiharmonicWorkspace& ws) {
  std::array<int, 3> pd;
  pad_into(g, bc, in, ws.padded, pd);

  std::array<int, 3> rd;  // one retained ghost ring
  for (int a = 0; a < 3; ++a) rd[a] = (a < g.ndim) ? g.dims[a] + 2 : 1;
  ws.ring.resize(std::size_t(rd[0]) * rd[1] * rd[2]);

  const double* P = ws.padded.data();
  double* L = ws.ring.data();
  const std::int64_t ps0 = 1, ps1 = pd[0], ps2 = std::int64_t(pd[0]) * pd[1];
  const std::int64_t rs0 = 1, rs1 = rd[0], rs2 = std::int64_t(rd[0]) * rd[1];
  const double center = 2.0 * g.ndim;

  for (int k = 0; k < rd[2]; ++k)
    for (int j = 0; j < rd[1]; ++j)
      for (int i = 0; i < rd[0]; ++i) {
        // ring (i,j,k) sits at padded (i+1, j+1, k+1) on active axes
        std::int64_t p = (i + 1) * ps0 + (g.ndim > 1 ? (j + 1) * ps1 : 0) +
                         (g.ndim > 2 ? (k + 1) * ps2 : 0);
        double s = P[p - ps0] + P[p + ps0];
        if (g.ndim > 1) s += P[p - ps1] + P[p + ps1];
        if (g.ndim > 2) s += P[p - ps2] + P[p + ps2];
        L[i * rs0 + j * rs1 + k * rs2] = center * P[p] - s;
      }

  std::int64_t lin = 0;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i, ++lin) {
        std::int64_t r = (i + 1) * rs0 + (g.ndim > 1 ? (j + 1) * rs1 : 0) +
                         (g.ndim > 2 ? (k + 1) * rs2 : 0);
        double s = L[r - rs0] + L[r + rs0];
        if (g.ndim > 1) s += L[r - rs1] + L[r + rs1];
        if (g.ndim > 2) s += L[r - rs2] + L[r + rs2];
        out[std::size_t(lin)] = center * L[r] - s;
      }
}

}  // namespace detail

inline PaddedField pad(const ScalarField& f, const BcSpec& bc) {
  PaddedField p;
  p.grid = f.grid;
  detail::pad_into(f.grid, bc, f.values.data(), p.values, p.pdims);
  return p;
}

inline ScalarField apply_biharmonic(const ScalarField& f, const BcSpec& bc) {
  ScalarField out = make_field(f.grid);
  detail::BiharmonicWorkspace ws;
  detail::apply_biharmonic_into(f.grid, bc, f.values.data(), out.values.data(), ws);
  return out;
}

// Right-hand side of the constrained system: -(biharmonic of the known field)
// restricted to unknown nodes. The known field must carry exact zeros at every
// unknown node so that the stencil sees only prescribed data.
inline std::vector<double> build_rhs(const ScalarField& known, const Mask& mask,
                                     const BcSpec& bc) {
  if (!known.grid.same_layout(mask.grid))
    throw std::invalid_argument("build_rhs: field and mask grids differ");
  for (std::int64_t u : mask.unknown_index)
    if (known[u] != 0.0)
      throw std::invalid_argument("build_rhs: known field has nonzero value " +
                                  std::to_string(known[u]) + " at unknown node " +
                                  std::to_string(u));
  ScalarField B = apply_biharmonic(known, bc);
  std::vector<double> rhs(mask.unknown_index.size());
  for (std::size_t p = 0; p < rhs.size(); ++p)
    rhs[p] = -B[mask.unknown_index[p]];
  return rhs;
}

// Action of the induced operator on unknown-node vectors: embed with zeros at
// known nodes, apply the full-grid stencil, restrict back.
inline std::vector<double> matvec(const std::vector<double>& u, const Mask& mask,
                                  const BcSpec& bc) {
  if (u.size() != mask.unknown_index.size())
    throw std::invalid_argument("matvec: vector length " + std::to_string(u.size()) +
                                " does not match unknown count " +
                                std::to_string(mask.unknown_index.size()));
  const Grid& g = mask.grid;
  std::vector<double> full(std::size_t(g.node_count()), 0.0);
  for (std::size_t p = 0; p < u.size(); ++p)
    full[std::size_t(mask.unknown_index[p])] = u[p];
  std::vector<double> out(full.size());
  detail::BiharmonicWorkspace ws;
  detail::apply_biharmonic_into(g, bc, full.data(), out.data(), ws);
  std::vector<double> r(u.size());
  for (std::size_t p = 0; p < u.size(); ++p)
    r[p] = out[std::size_t(mask.unknown_index[p])];
  return r;
}

}  // namespace levex
