#pragma once

// Fast Poisson preconditioner: the inverse of the squared full-grid Laplacian,
// applied by per-axis diagonalizing transforms.
//
//   M^-1 b = R  T^-1 [ T (E b) / (sum_a lambda_a)^2 ]
//
// where E embeds unknown-node values with zeros at known nodes and R restricts
// back. Axes whose two faces agree use the fast transform for that kind
// (SineI / CosineEven / FourierReal); an axis with differing faces falls back
// to a cached dense symmetric eigenbasis of its 1D folded second-difference
// operator. Coefficients whose eigenvalue sum vanishes (the constant mode of
// all-Neumann or all-periodic problems) are projected to zero, which keeps the
// operator symmetric positive semidefinite and strictly positive definite on
// any proper unknown subset.

#include <Eigen/Dense>

#include <random>

#include "levex/biharmonic.hpp"
#include "levex/transforms.hpp"

namespace levex {

namespace detail {

struct AxisBasis {
  bool fast = true;
  TransformKind kind = TransformKind::SineI;
  std::vector<double> lambda;
  Eigen::MatrixXd V;  // dense-path eigenvectors, orthonormal columns
};

// 1D folded second-difference matrix for one ghost layer under the face pair.
inline Eigen::MatrixXd folded_second_difference(int m, BcKind lo, BcKind hi) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    A(i, i) = 2.0;
    if (i > 0) A(i, i - 1) -= 1.0;
    if (i + 1 < m) A(i, i + 1) -= 1.0;
  }
  auto fold = [&](int row, int ghost, BcKind k) {
    switch (k) {
      case BcKind::DirichletZero: break;  // ghost value 0
      case BcKind::NeumannZero: A(row, row) -= 1.0; break;  // ghost mirrors row
      case BcKind::Periodic: A(row, ghost) -= 1.0; break;
    }
  };
  fold(0, m - 1, lo);
  fold(m - 1, 0, hi);
  return A;
}

inline const AxisBasis& axis_basis(int m, BcKind lo, BcKind hi) {
  thread_local std::map<std::tuple<int, int, int>, AxisBasis> cache;
  auto key = std::make_tuple(m, int(lo), int(hi));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  AxisBasis b;
  if (lo == hi) {
    b.fast = true;
    switch (lo) {
      case BcKind::DirichletZero: b.kind = TransformKind::SineI; break;
      case BcKind::NeumannZero: b.kind = TransformKind::CosineEven; break;
      case BcKind::Periodic: b.kind = TransformKind::FourierReal; break;
    }
    b.lambda = laplacian_eigenvalues(b.kind, m);
  } else {
    b.fast = false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(folded_second_difference(m, lo, hi));
    if (es.info() != Eigen::Success)
      throw std::runtime_error("precond: 1D eigendecomposition failed");
    b.V = es.eigenvectors();
    b.lambda.assign(es.eigenvalues().data(), es.eigenvalues().data() + m);
  }
  return cache.emplace(key, std::move(b)).first->second;
}

inline void dense_transform_lines(const Eigen::MatrixXd& V, bool fwd, int axis,
                                  const Grid& g, std::vector<double>& data) {
  const int m = g.dims[axis];
  std::int64_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= g.dims[a];
  std::int64_t outer = 1, inner = stride;
  for (int a = axis + 1; a < 3; ++a) outer *= g.dims[a];

  Eigen::VectorXd line(m), tline(m);
  for (std::int64_t o = 0; o < outer; ++o) {
    std::int64_t base_o = o * stride * m;
    for (std::int64_t in = 0; in < inner; ++in) {
      std::int64_t base = base_o + in;
      for (int i = 0; i < m; ++i) line[i] = data[std::size_t(base + i * stride)];
      if (fwd) tline.noalias() = V.transpose() * line;
      else tline.noalias() = V * line;
      for (int i = 0; i < m; ++i) data[std::size_t(base + i * stride)] = tline[i];
    }
  }
}

inline void apply_precond_into(const Mask& mask, const BcSpec& bc, const double* b,
                               double* out, std::vector<double>& full) {
  const Grid& g = mask.grid;
  bc.validate(g.ndim);
  full.assign(std::size_t(g.node_count()), 0.0);
  for (std::size_t p = 0; p < mask.unknown_index.size(); ++p)
    full[std::size_t(mask.unknown_index[p])] = b[p];

  std::array<const AxisBasis*, 3> bases{nullptr, nullptr, nullptr};
  for (int a = 0; a < g.ndim; ++a)
    bases[a] = &axis_basis(g.dims[a], bc.faces[a][0], bc.faces[a][1]);

  for (int a = 0; a < g.ndim; ++a) {
    if (bases[a]->fast) transform_lines(bases[a]->kind, true, a, g, full);
    else dense_transform_lines(bases[a]->V, true, a, g, full);
  }

  const double* l0 = bases[0]->lambda.data();
  const double* l1 = g.ndim > 1 ? bases[1]->lambda.data() : nullptr;
  const double* l2 = g.ndim > 2 ? bases[2]->lambda.data() : nullptr;
  std::int64_t lin = 0;
  for (int k = 0; k < g.dims[2]; ++k) {
    double lk = l2 ? l2[k] : 0.0;
    for (int j = 0; j < g.dims[1]; ++j) {
      double ljk = lk + (l1 ? l1[j] : 0.0);
      for (int i = 0; i < g.dims[0]; ++i, ++lin) {
        double s = ljk + l0[i];
        if (s < 1e-13) full[std::size_t(lin)] = 0.0;  // project the constant mode
        else full[std::size_t(lin)] /= s * s;
      }
    }
  }

  for (int a = 0; a < g.ndim; ++a) {
    if (bases[a]->fast) transform_lines(bases[a]->kind, false, a, g, full);
    else dense_transform_lines(bases[a]->V, false, a, g, full);
  }

  for (std::size_t p = 0; p < mask.unknown_index.size(); ++p)
    out[p] = full[std::size_t(mask.unknown_index[p])];
}

}  // namespace detail

inline std::vector<double> apply_precond(const std::vector<double>& b, const Mask& mask,
                                         const BcSpec& bc) {
  if (b.size() != mask.unknown_index.size())
    throw std::invalid_argument("apply_precond: vector length " +
                                std::to_string(b.size()) +
                                " does not match unknown count " +
                                std::to_string(mask.unknown_index.size()));
  std::vector<double> out(b.size());
  std::vector<double> full;
  detail::apply_precond_into(mask, bc, b.data(), out.data(), full);
  return out;
}

struct SpdReport {
  double max_asymmetry = 0.0;  // max |<Mu,v> - <u,Mv>| / (|u| |v|)
  double min_rayleigh = 0.0;   // min <Mu,u> / <u,u>
  bool symmetric(double tol = 1e-12) const { return max_asymmetry <= tol; }
  bool positive() const { return min_rayleigh > 0.0; }
};

// Randomized symmetry / positivity probe of the preconditioner on the unknown
// subspace. With an all-unknown mask under all-Neumann or all-periodic faces
// the projected constant mode makes the operator only semidefinite; on any
// proper subset it is positive definite.
inline SpdReport precond_is_spd_check(const Mask& mask, const BcSpec& bc, int trials,
                                      std::uint64_t seed = 0x5eed) {
  SpdReport rep;
  if (trials <= 0) return rep;
  const std::size_t n = mask.unknown_index.size();
  if (n == 0) return rep;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  rep.min_rayleigh = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    std::vector<double> u(n), v(n);
    for (auto& x : u) x = gauss(rng);
    for (auto& x : v) x = gauss(rng);
    std::vector<double> Mu = apply_precond(u, mask, bc);
    std::vector<double> Mv = apply_precond(v, mask, bc);
    double muv = 0, umv = 0, uu = 0, vv = 0, muu = 0;
    for (std::size_t i = 0; i < n; ++i) {
      muv += Mu[i] * v[i];
      umv += u[i] * Mv[i];
      uu += u[i] * u[i];
      vv += v[i] * v[i];
      muu += Mu[i] * u[i];
    }
    rep.max_asymmetry = std::max(rep.max_asymmetry,
                                 std::fabs(muv - umv) / (std::sqrt(uu) * std::sqrt(vv)));
    rep.min_rayleigh = std::min(rep.min_rayleigh, muu / uu);
  }
  return rep;
}

}  // namespace levex
