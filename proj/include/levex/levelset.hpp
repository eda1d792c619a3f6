#pragma once

// Level set machinery: interface normals, Godunov upwind advection in normal
// direction, reinitialization to signed distance, curvature, and band-limited
// error reporting. phi < 0 inside, phi > 0 outside throughout.
//
// One-sided differences that would reach past a domain face copy the interior
// side instead, so boundary nodes behave as fully upwinded from within.

#include "levex/grid.hpp"

namespace levex {

struct VectorField {
  Grid grid;
  std::array<std::vector<double>, 3> comp;
};

namespace detail {

// Per-axis neighbor fetch with clamped indices.
inline double fval(const ScalarField& f, int i, int j, int k) {
  const Grid& g = f.grid;
  i = std::max(0, std::min(i, g.dims[0] - 1));
  j = std::max(0, std::min(j, g.dims[1] - 1));
  k = std::max(0, std::min(k, g.dims[2] - 1));
  return f.at(i, j, k);
}

struct UpwindDiffs {
  double minus, plus;  // backward and forward one-sided slopes
};

inline UpwindDiffs axis_diffs(const ScalarField& f, int axis, int i, int j, int k) {
  const Grid& g = f.grid;
  const double h = g.spacing[axis];
  std::array<int, 3> c{i, j, k}, lo{i, j, k}, hi{i, j, k};
  lo[axis] -= 1;
  hi[axis] += 1;
  const double fc = f.at(c[0], c[1], c[2]);
  const bool has_lo = lo[axis] >= 0;
  const bool has_hi = hi[axis] < g.dims[axis];
  double dm = has_lo ? (fc - f.at(lo[0], lo[1], lo[2])) / h : 0.0;
  double dp = has_hi ? (f.at(hi[0], hi[1], hi[2]) - fc) / h : 0.0;
  if (!has_lo) dm = dp;
  if (!has_hi) dp = dm;
  return {dm, dp};
}

// Godunov upwind gradient magnitude for propagation speed of sign s.
inline double godunov_grad(const ScalarField& phi, double s, int i, int j, int k) {
  double acc = 0.0;
  for (int a = 0; a < phi.grid.ndim; ++a) {
    auto d = axis_diffs(phi, a, i, j, k);
    double u, v;
    if (s > 0.0) {
      u = std::max(d.minus, 0.0);
      v = std::min(d.plus, 0.0);
    } else {
      u = std::min(d.minus, 0.0);
      v = std::max(d.plus, 0.0);
    }
    acc += std::max(u * u, v * v);
  }
  return std::sqrt(acc);
}

}  // namespace detail

// Unit normals n = grad(phi)/|grad(phi)|, central differences away from faces,
// one-sided at faces, magnitude floored at 1e-12.
inline VectorField normals(const LevelSet& ls) {
  const Grid& g = ls.phi.grid;
  VectorField n;
  n.grid = g;
  for (int a = 0; a < g.ndim; ++a)
    n.comp[a].assign(std::size_t(g.node_count()), 0.0);

  std::int64_t lin = 0;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i, ++lin) {
        std::array<double, 3> grad{0, 0, 0};
        for (int a = 0; a < g.ndim; ++a) {
          std::array<int, 3> lo{i, j, k}, hi{i, j, k};
          lo[a] -= 1;
          hi[a] += 1;
          double span = 2.0 * g.spacing[a];
          if (lo[a] < 0) { lo[a] = 0; span = g.spacing[a]; }
          if (hi[a] >= g.dims[a]) { hi[a] = g.dims[a] - 1; span = g.spacing[a]; }
          grad[a] = (ls.phi.at(hi[0], hi[1], hi[2]) - ls.phi.at(lo[0], lo[1], lo[2])) / span;
        }
        double mag = 0.0;
        for (int a = 0; a < g.ndim; ++a) mag += grad[a] * grad[a];
        mag = std::max(std::sqrt(mag), 1e-12);
        for (int a = 0; a < g.ndim; ++a)
          n.comp[a][std::size_t(lin)] = grad[a] / mag;
      }
  return n;
}

// One forward-Euler Godunov step of phi_t + vn |grad phi| = 0. Enforces the
// CFL bound dt * max|vn| / min spacing <= 0.9 up front.
inline LevelSet advect(const LevelSet& ls, const ScalarField& vn, double dt) {
  const Grid& g = ls.phi.grid;
  if (!g.same_layout(vn.grid))
    throw std::invalid_argument("advect: speed field grid differs");
  if (!(dt >= 0.0)) throw std::invalid_argument("advect: dt must be >= 0");
  double vmax = 0.0;
  for (std::int64_t k = 0; k < g.node_count(); ++k)
    vmax = std::max(vmax, std::fabs(vn[k]));
  double ratio = dt * vmax / g.min_spacing();
  if (ratio > 0.9)
    throw std::runtime_error("advect: CFL ratio " + std::to_string(ratio) +
                             " exceeds 0.9 (dt too large for this speed)");

  LevelSet out{make_field(g)};
  std::int64_t lin = 0;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i, ++lin) {
        double s = vn[lin];
        double grad = detail::godunov_grad(ls.phi, s, i, j, k);
        out.phi[lin] = ls.phi[lin] - dt * s * grad;
      }
  return out;
}

// Pseudo-time relaxation of |grad phi| = 1 keeping the zero set in place:
// phi_tau = S(phi0) (1 - |grad phi|), S = phi0 / sqrt(phi0^2 + h^2),
// dtau = h/2 with h the min spacing.
inline LevelSet reinitialize(const LevelSet& ls, int iterations) {
  if (iterations < 1)
    throw std::invalid_argument("reinitialize: iterations must be >= 1");
  const Grid& g = ls.phi.grid;
  const double h = g.min_spacing();
  const double dtau = 0.5 * h;

  std::vector<double> S(std::size_t(g.node_count()), 0.0);
  for (std::int64_t k = 0; k < g.node_count(); ++k) {
    double p = ls.phi[k];
    S[std::size_t(k)] = p / std::sqrt(p * p + h * h);
  }

  LevelSet cur{ls.phi};
  LevelSet next{make_field(g)};
  for (int it = 0; it < iterations; ++it) {
    std::int64_t lin = 0;
    for (int k = 0; k < g.dims[2]; ++k)
      for (int j = 0; j < g.dims[1]; ++j)
        for (int i = 0; i < g.dims[0]; ++i, ++lin) {
          double s = S[std::size_t(lin)];
          double grad = detail::godunov_grad(cur.phi, s, i, j, k);
          next.phi[lin] = cur.phi[lin] - dtau * s * (grad - 1.0);
        }
    std::swap(cur.phi.values, next.phi.values);
  }
  return cur;
}

// kappa = div(grad phi / |grad phi|) by central differences of the unit
// normal, clamped to +-1/min spacing.
inline ScalarField curvature(const LevelSet& ls) {
  const Grid& g = ls.phi.grid;
  VectorField n = normals(ls);
  ScalarField kappa = make_field(g);
  const double cap = 1.0 / g.min_spacing();

  std::int64_t lin = 0;
  for (int k = 0; k < g.dims[2]; ++k)
    for (int j = 0; j < g.dims[1]; ++j)
      for (int i = 0; i < g.dims[0]; ++i, ++lin) {
        double div = 0.0;
        for (int a = 0; a < g.ndim; ++a) {
          std::array<int, 3> lo{i, j, k}, hi{i, j, k};
          lo[a] -= 1;
          hi[a] += 1;
          double span = 2.0 * g.spacing[a];
          if (lo[a] < 0) { lo[a] = 0; span = g.spacing[a]; }
          if (hi[a] >= g.dims[a]) { hi[a] = g.dims[a] - 1; span = g.spacing[a]; }
          const auto& c = n.comp[a];
          div += (c[std::size_t(g.index(hi[0], hi[1], hi[2]))] -
                  c[std::size_t(g.index(lo[0], lo[1], lo[2]))]) / span;
        }
        kappa[lin] = std::max(-cap, std::min(cap, div));
      }
  return kappa;
}

// Max |f - ref| over the band |phi| <= cells * max spacing, optionally further
// restricted to the marked set of `restrict_to`. An empty measurement set is
// an error rather than a silent zero.
inline double band_error(const ScalarField& f, const ScalarField& ref,
                         const LevelSet& ls, double cells,
                         const Mask* restrict_to = nullptr) {
  const Grid& g = f.grid;
  if (!g.same_layout(ref.grid) || !g.same_layout(ls.phi.grid))
    throw std::invalid_argument("band_error: grids differ");
  if (restrict_to && !g.same_layout(restrict_to->grid))
    throw std::invalid_argument("band_error: restriction mask grid differs");
  double width = cells * g.max_spacing();
  double err = 0.0;
  std::int64_t count = 0;
  for (std::int64_t k = 0; k < g.node_count(); ++k) {
    if (std::fabs(ls.phi[k]) > width) continue;
    if (restrict_to && !restrict_to->known[std::size_t(k)]) continue;
    err = std::max(err, std::fabs(f[k] - ref[k]));
    ++count;
  }
  if (count == 0) throw std::runtime_error("band_error: no nodes in band");
  return err;
}

// log2 ratios of successive errors on a grid-doubling ladder.
inline std::vector<double> estimated_orders(const std::vector<double>& errors) {
  if (errors.size() < 2)
    throw std::invalid_argument("estimated_orders: need at least two errors");
  for (double e : errors)
    if (!(e > 0.0))
      throw std::invalid_argument("estimated_orders: errors must be positive");
  std::vector<double> orders;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    orders.push_back(std::log2(errors[i] / errors[i + 1]));
  return orders;
}

}  // namespace levex
