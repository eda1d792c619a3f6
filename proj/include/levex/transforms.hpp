#pragma once

// 1D trigonometric transforms used to diagonalize the dimensionless
// second-difference operator under each boundary treatment, plus the matching
// eigenvalue tables. FFTW r2r plans provide the fast paths:
//
//   SineI       RODFT00 both ways      round trip scale 2(m+1)
//   CosineEven  REDFT10 / REDFT01      round trip scale 2m
//   FourierReal R2HC / HC2R            round trip scale m
//
// The inverse carries the whole normalization, so forward(x) is the raw FFTW
// sum. Eigenvalue slot k matches coefficient slot k of forward():
//
//   SineI        lambda_k = 2(1 - cos((k+1) pi / (m+1)))          k = 0..m-1
//   CosineEven   lambda_k = 2(1 - cos(k pi / m))                  (lambda_0 = 0)
//   FourierReal  lambda_k = 2(1 - cos(2 pi min(k, m-k) / m))      (lambda_0 = 0)
//
// FourierReal uses FFTW halfcomplex layout (r0, r1, ..., r_{m/2}, i_..., i_1);
// both halves of a conjugate pair share one eigenvalue, which the min() above
// encodes. Plans are cached per (kind, direction, length) in thread-local
// storage and deliberately leaked at process exit.

#include <fftw3.h>

#include <map>
#include <tuple>

#include "levex/grid.hpp"

namespace levex {

enum class TransformKind { SineI, CosineEven, FourierReal };

inline const char* transform_name(TransformKind k) {
  switch (k) {
    case TransformKind::SineI: return "sine-I";
    case TransformKind::CosineEven: return "cosine-even";
    case TransformKind::FourierReal: return "fourier-real";
  }
  return "?";
}

namespace detail {

struct PlanSlot {
  fftw_plan plan = nullptr;
  double* in = nullptr;
  double* out = nullptr;
};

inline PlanSlot& plan_for(TransformKind kind, bool fwd, int m) {
  thread_local std::map<std::tuple<int, int, int>, PlanSlot> cache;
  auto key = std::make_tuple(int(kind), int(fwd), m);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  PlanSlot slot;
  slot.in = fftw_alloc_real(std::size_t(m));
  slot.out = fftw_alloc_real(std::size_t(m));
  fftw_r2r_kind fk;
  switch (kind) {
    case TransformKind::SineI: fk = FFTW_RODFT00; break;
    case TransformKind::CosineEven: fk = fwd ? FFTW_REDFT10 : FFTW_REDFT01; break;
    case TransformKind::FourierReal: fk = fwd ? FFTW_R2HC : FFTW_HC2R; break;
    default: throw std::invalid_argument("transforms: unsupported kind");
  }
  slot.plan = fftw_plan_r2r_1d(m, slot.in, slot.out, fk, FFTW_ESTIMATE);
  if (!slot.plan) throw std::runtime_error("transforms: fftw plan creation failed");
  return cache.emplace(key, slot).first->second;
}

inline double inverse_scale(TransformKind kind, int m) {
  switch (kind) {
    case TransformKind::SineI: return 1.0 / (2.0 * (m + 1));
    case TransformKind::CosineEven: return 1.0 / (2.0 * m);
    case TransformKind::FourierReal: return 1.0 / m;
  }
  return 1.0;
}

inline void run_plan(TransformKind kind, bool fwd, int m, const double* x,
                     double* y) {
  PlanSlot& slot = plan_for(kind, fwd, m);
  for (int i = 0; i < m; ++i) slot.in[i] = x[i];
  fftw_execute(slot.plan);
  if (fwd) {
    for (int i = 0; i < m; ++i) y[i] = slot.out[i];
  } else {
    double s = inverse_scale(kind, m);
    for (int i = 0; i < m; ++i) y[i] = s * slot.out[i];
  }
}

}  // namespace detail

inline std::vector<double> forward(TransformKind kind, const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("forward: empty input");
  std::vector<double> y(x.size());
  detail::run_plan(kind, true, int(x.size()), x.data(), y.data());
  return y;
}

inline std::vector<double> inverse(TransformKind kind, const std::vector<double>& c) {
  if (c.empty()) throw std::invalid_argument("inverse: empty input");
  std::vector<double> y(c.size());
  detail::run_plan(kind, false, int(c.size()), c.data(), y.data());
  return y;
}

inline std::vector<double> laplacian_eigenvalues(TransformKind kind, int m) {
  if (m < 1) throw std::invalid_argument("laplacian_eigenvalues: length must be >= 1");
  std::vector<double> lam(std::size_t(m), 0.0);
  const double pi = 3.14159265358979323846;
  switch (kind) {
    case TransformKind::SineI:
      for (int k = 0; k < m; ++k) lam[k] = 2.0 * (1.0 - std::cos((k + 1) * pi / (m + 1)));
      break;
    case TransformKind::CosineEven:
      for (int k = 0; k < m; ++k) lam[k] = 2.0 * (1.0 - std::cos(k * pi / m));
      break;
    case TransformKind::FourierReal:
      for (int k = 0; k < m; ++k) {
        int f = std::min(k, m - k);
        lam[k] = 2.0 * (1.0 - std::cos(2.0 * pi * f / m));
      }
      break;
  }
  return lam;
}

namespace detail {

// In-place 1D transform applied to every grid line along `axis`.
inline void transform_lines(TransformKind kind, bool fwd, int axis, const Grid& g,
                            std::vector<double>& data) {
  const int m = g.dims[axis];
  std::int64_t stride = 1;
  for (int a = 0; a < axis; ++a) stride *= g.dims[a];

  std::vector<double> line(std::size_t(m), 0.0), tline(std::size_t(m), 0.0);
  std::int64_t outer = 1, inner = stride;
  for (int a = axis + 1; a < 3; ++a) outer *= g.dims[a];

  for (std::int64_t o = 0; o < outer; ++o) {
    std::int64_t base_o = o * stride * m;
    for (std::int64_t in = 0; in < inner; ++in) {
      std::int64_t base = base_o + in;
      for (int i = 0; i < m; ++i) line[std::size_t(i)] = data[std::size_t(base + i * stride)];
      run_plan(kind, fwd, m, line.data(), tline.data());
      for (int i = 0; i < m; ++i) data[std::size_t(base + i * stride)] = tline[std::size_t(i)];
    }
  }
}

}  // namespace detail

}  // namespace levex
