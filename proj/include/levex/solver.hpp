#pragma once

// Conjugate gradient driver for the constrained biharmonic extension, plus a
// dense reference path and a Lanczos-based condition estimate recovered from
// the CG coefficients.
//
// pcg() starts from x = 0, uses the residual recurrence, and stops when
// |r| / |b| <= tol in the Euclidean norm or maxit is reached (converged =
// false, partial iterate returned). Non-finite recurrence values are hard
// errors. Every iteration records the relative residual and its (alpha, beta)
// pair; the final iteration's beta slot stays 0 and is never used.

#include <Eigen/Dense>

#include <utility>

#include "levex/precond.hpp"

namespace levex {

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;
  std::vector<std::pair<double, double>> alpha_beta;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Number of eigenvalues of the symmetric tridiagonal (diag, sub) below x,
// by counting negative pivots of the shifted LDL^T sweep.
inline int sturm_count(const std::vector<double>& diag, const std::vector<double>& sub,
                       double x) {
  int cnt = 0;
  double q = diag[0] - x;
  if (q < 0.0) ++cnt;
  for (std::size_t j = 1; j < diag.size(); ++j) {
    double den = q;
    if (den == 0.0) den = 1e-300;
    q = diag[j] - x - sub[j - 1] * sub[j - 1] / den;
    if (q < 0.0) ++cnt;
  }
  return cnt;
}

// Smallest point with at least `want` eigenvalues below it, bisected to
// relative precision within [lo, hi].
inline double sturm_bisect(const std::vector<double>& diag, const std::vector<double>& sub,
                           double lo, double hi, int want) {
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (sturm_count(diag, sub, mid) >= want)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-12 * std::max(std::fabs(lo), std::fabs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// applyA / applyM are callables void(const std::vector<double>& in,
// std::vector<double>& out); out is pre-sized.
template <class ApplyA, class ApplyM>
std::pair<std::vector<double>, SolveStats> pcg(ApplyA&& applyA, ApplyM&& applyM,
                                               const std::vector<double>& b,
                                               double tol, int maxit) {
  if (!(tol >= 0.0)) throw std::invalid_argument("pcg: tol must be >= 0");
  if (maxit < 1) throw std::invalid_argument("pcg: maxit must be >= 1");
  const std::size_t n = b.size();
  SolveStats stats;
  std::vector<double> x(n, 0.0);
  if (n == 0) {
    stats.converged = true;
    return {x, stats};
  }
  double bnorm = std::sqrt(detail::dot(b, b));
  if (bnorm == 0.0) {
    stats.converged = true;
    return {x, stats};
  }

  std::vector<double> r = b, z(n), p(n), q(n);
  applyM(r, z);
  p = z;
  double rz = detail::dot(r, z);
  if (!std::isfinite(rz)) throw std::runtime_error("pcg: non-finite preconditioned residual");

  for (int it = 1; it <= maxit; ++it) {
    applyA(p, q);
    double pq = detail::dot(p, q);
    if (!std::isfinite(pq)) throw std::runtime_error("pcg: non-finite curvature at iteration " + std::to_string(it));
    if (pq <= 0.0)
      throw std::runtime_error("pcg: nonpositive curvature " + std::to_string(pq) +
                               " at iteration " + std::to_string(it) +
                               " (operator not positive definite)");
    double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * q[i];
    double rnorm = std::sqrt(detail::dot(r, r));
    if (!std::isfinite(rnorm)) throw std::runtime_error("pcg: non-finite residual at iteration " + std::to_string(it));
    double relres = rnorm / bnorm;
    stats.iterations = it;
    stats.relative_residual = relres;
    stats.residual_history.push_back(relres);
    stats.alpha_beta.emplace_back(alpha, 0.0);
    if (relres <= tol) {
      stats.converged = true;
      break;
    }
    if (it == maxit) break;
    applyM(r, z);
    double rz_new = detail::dot(r, z);
    if (!std::isfinite(rz_new)) throw std::runtime_error("pcg: non-finite preconditioned residual at iteration " + std::to_string(it));
    double beta = rz_new / rz;
    stats.alpha_beta.back().second = beta;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return {x, stats};
}

// Extreme-eigenvalue ratio of the Lanczos tridiagonal reconstructed from the
// recorded CG coefficients; a lower-bound-flavored estimate of the condition
// number of the (preconditioned) operator.
inline double condition_estimate(const SolveStats& stats) {
  const int k = int(stats.alpha_beta.size());
  if (k == 0) throw std::runtime_error("condition_estimate: no CG iterations recorded");
  std::vector<double> diag(std::size_t(k), 0.0), sub(std::size_t(std::max(k - 1, 0)), 0.0);
  for (int j = 0; j < k; ++j) {
    double a = stats.alpha_beta[std::size_t(j)].first;
    diag[std::size_t(j)] = 1.0 / a;
    if (j > 0) {
      double bprev = stats.alpha_beta[std::size_t(j - 1)].second;
      double aprev = stats.alpha_beta[std::size_t(j - 1)].first;
      diag[std::size_t(j)] += bprev / aprev;
      sub[std::size_t(j - 1)] = std::sqrt(std::max(bprev, 0.0)) / aprev;
    }
  }
  // Extreme Ritz values by Sturm bisection inside the Gershgorin interval.
  // QR-type dense eigensolvers stall on the very long, graded chains a
  // stagnated unpreconditioned run records; bisection has no such failure
  // mode and only the two end eigenvalues are needed.
  double glo = std::numeric_limits<double>::infinity(), ghi = -glo;
  for (int j = 0; j < k; ++j) {
    double r = (j > 0 ? std::fabs(sub[std::size_t(j - 1)]) : 0.0) +
               (j + 1 < k ? std::fabs(sub[std::size_t(j)]) : 0.0);
    glo = std::min(glo, diag[std::size_t(j)] - r);
    ghi = std::max(ghi, diag[std::size_t(j)] + r);
  }
  double lmin = detail::sturm_bisect(diag, sub, glo, ghi, 1);
  double lmax = detail::sturm_bisect(diag, sub, glo, ghi, k);
  if (!(lmin > 0.0))
    throw std::runtime_error("condition_estimate: nonpositive Ritz value " + std::to_string(lmin));
  return lmax / lmin;
}

namespace detail {

struct MaskedBiharmonic {
  const Mask& mask;
  const BcSpec& bc;
  std::vector<double> full_in, full_out;
  BiharmonicWorkspace ws;

  explicit MaskedBiharmonic(const Mask& m, const BcSpec& b)
      : mask(m), bc(b),
        full_in(std::size_t(m.grid.node_count())),
        full_out(std::size_t(m.grid.node_count())) {}

  void operator()(const std::vector<double>& u, std::vector<double>& out) {
    std::fill(full_in.begin(), full_in.end(), 0.0);
    for (std::size_t p = 0; p < u.size(); ++p)
      full_in[std::size_t(mask.unknown_index[p])] = u[p];
    apply_biharmonic_into(mask.grid, bc, full_in.data(), full_out.data(), ws);
    out.resize(u.size());
    for (std::size_t p = 0; p < u.size(); ++p)
      out[p] = full_out[std::size_t(mask.unknown_index[p])];
  }
};

struct MaskedPrecond {
  const Mask& mask;
  const BcSpec& bc;
  std::vector<double> full;

  explicit MaskedPrecond(const Mask& m, const BcSpec& b) : mask(m), bc(b) {}

  void operator()(const std::vector<double>& r, std::vector<double>& out) {
    out.resize(r.size());
    apply_precond_into(mask, bc, r.data(), out.data(), full);
  }
};

}  // namespace detail

enum class ExtendMethod { PcgFastPoisson, Dense };

struct ExtendParams {
  ExtendMethod method = ExtendMethod::PcgFastPoisson;
  double tol = 1e-6;
  int maxit = 0;  // 0 picks max over active dims
  int dense_cap = 4096;
};

struct ExtendResult {
  ScalarField field;
  SolveStats stats;
};

// Dense reference solve of the constrained system. The induced matrix is
// assembled column by column via matvec on unit vectors, factored with LDLT,
// and the solution is accepted only if the relative residual is <= 1e-10.
// Refuses systems larger than `cap` unknowns.
inline ScalarField dense_solve(const ScalarField& known, const Mask& mask,
                               const BcSpec& bc, int cap = 4096) {
  const std::int64_t n = std::int64_t(mask.unknown_index.size());
  if (n > cap)
    throw std::invalid_argument("dense_solve: " + std::to_string(n) +
                                " unknowns exceeds cap " + std::to_string(cap));
  ScalarField out = known;
  if (n == 0) return out;
  std::vector<double> b = build_rhs(known, mask, bc);

  Eigen::MatrixXd A(n, n);
  std::vector<double> e(std::size_t(n), 0.0), col;
  for (std::int64_t j = 0; j < n; ++j) {
    e[std::size_t(j)] = 1.0;
    col = matvec(e, mask, bc);
    for (std::int64_t i = 0; i < n; ++i) A(i, j) = col[std::size_t(i)];
    e[std::size_t(j)] = 0.0;
  }
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  Eigen::VectorXd x = A.ldlt().solve(bv);
  double bn = bv.norm();
  double res = (A * x - bv).norm();
  if (bn > 0.0 && !(res <= 1e-10 * bn))
    throw std::runtime_error("dense_solve: singular or ill-posed system (residual " +
                             std::to_string(res / bn) + ", bc kinds may leave a nullspace)");
  for (std::int64_t p = 0; p < n; ++p)
    out[mask.unknown_index[std::size_t(p)]] = x(p);
  return out;
}

// Biharmonic extension of the known values onto the unknown set. Known nodes
// pass through bitwise untouched; unknown nodes receive the solve result.
inline ExtendResult extend(const ScalarField& known, const Mask& mask,
                           const BcSpec& bc, const ExtendParams& params = {}) {
  if (!known.grid.same_layout(mask.grid))
    throw std::invalid_argument("extend: field and mask grids differ");
  if (mask.unknown_index.empty())
    throw std::invalid_argument("extend: mask has no unknown nodes, nothing to extend");
  if (mask.known_count() == 0)
    throw std::invalid_argument("extend: mask has no known nodes");

  ExtendResult res{known, {}};
  if (params.method == ExtendMethod::Dense) {
    res.field = dense_solve(known, mask, bc, params.dense_cap);
    res.stats.converged = true;
    return res;
  }

  int maxit = params.maxit;
  if (maxit <= 0) {
    maxit = 0;
    for (int a = 0; a < mask.grid.ndim; ++a) maxit = std::max(maxit, mask.grid.dims[a]);
  }
  std::vector<double> b = build_rhs(known, mask, bc);
  detail::MaskedBiharmonic A(mask, bc);
  detail::MaskedPrecond M(mask, bc);
  auto [x, stats] = pcg(A, M, b, params.tol, maxit);
  res.stats = std::move(stats);
  for (std::size_t p = 0; p < x.size(); ++p)
    res.field[mask.unknown_index[p]] = x[p];
  return res;
}

}  // namespace levex
