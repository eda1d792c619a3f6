#include <catch2/catch_amalgamated.hpp>

#include <chrono>

#include "levex/precond.hpp"
#include "oracle_helpers.hpp"

using namespace levex;

namespace {

Mask all_unknown(const Grid& g) {
  return make_mask(g, std::vector<std::uint8_t>(std::size_t(g.node_count()), 0));
}

}  // namespace

TEST_CASE("apply_precond maps zero to zero and validates sizes") {
  Grid g = make_grid({0, 1}, {0, 1}, 6, 6);
  Mask mask = all_unknown(g);
  BcSpec bc = BcSpec::uniform(BcKind::DirichletZero);
  std::vector<double> z(mask.unknown_index.size(), 0.0);
  for (double v : apply_precond(z, mask, bc)) CHECK(v == 0.0);
  std::vector<double> wrong(3, 0.0);
  CHECK_THROWS_AS(apply_precond(wrong, mask, bc), std::invalid_argument);
}

TEST_CASE("all-unknown dirichlet: tensor sine mode is scaled by (sum lambda)^-2") {
  const int m = 8, n = 6;
  Grid g = make_grid({0, 1}, {0, 1}, m, n);
  Mask mask = all_unknown(g);
  BcSpec bc = BcSpec::uniform(BcKind::DirichletZero);
  const int p = 3, q = 2;  // mode numbers (1-based)
  std::vector<double> b(std::size_t(g.node_count()), 0.0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      b[std::size_t(g.index(i, j))] =
          std::sin(oracle::kPi * p * (i + 1.0) / (m + 1.0)) *
          std::sin(oracle::kPi * q * (j + 1.0) / (n + 1.0));
  double lam = 2.0 * (1.0 - std::cos(p * oracle::kPi / (m + 1.0))) +
               2.0 * (1.0 - std::cos(q * oracle::kPi / (n + 1.0)));
  auto out = apply_precond(b, mask, bc);
  for (std::size_t i = 0; i < b.size(); ++i)
    CHECK(out[i] == Catch::Approx(b[i] / (lam * lam)).margin(1e-13));
}

TEST_CASE("apply_precond matches the spectral oracle") {
  struct Case {
    BcSpec bc;
    const char* name;
  };
  BcSpec mixed;
  mixed.faces[0] = {BcKind::DirichletZero, BcKind::NeumannZero};
  mixed.faces[1] = {BcKind::DirichletZero, BcKind::DirichletZero};
  for (const auto& [bc, name] : {Case{BcSpec::uniform(BcKind::DirichletZero), "dirichlet"},
                                 Case{BcSpec::uniform(BcKind::NeumannZero), "neumann"},
                                 Case{BcSpec::uniform(BcKind::Periodic), "periodic"},
                                 Case{mixed, "mixed-faces"}}) {
    INFO(name);
    Grid g = make_grid({0, 1}, {0, 2}, 6, 7);
    {
      Mask mask = all_unknown(g);
      auto b = oracle::random_vector(std::size_t(g.node_count()), 31);
      Eigen::Map<Eigen::VectorXd> bv(b.data(), g.node_count());
      Eigen::VectorXd ref = oracle::precond_reference(g, bc, bv);
      auto got = apply_precond(b, mask, bc);
      for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == Catch::Approx(ref[std::int64_t(i)]).margin(1e-10));
    }
    {
      Mask mask = make_mask(g, oracle::random_mask_flags(std::size_t(g.node_count()), 600));
      auto b = oracle::random_vector(mask.unknown_index.size(), 32);
      Eigen::VectorXd b_full = Eigen::VectorXd::Zero(g.node_count());
      for (std::size_t p = 0; p < b.size(); ++p)
        b_full[mask.unknown_index[p]] = b[p];
      Eigen::VectorXd ref_full = oracle::precond_reference(g, bc, b_full);
      auto got = apply_precond(b, mask, bc);
      for (std::size_t p = 0; p < got.size(); ++p)
        CHECK(got[p] == Catch::Approx(ref_full[mask.unknown_index[p]]).margin(1e-10));
    }
  }
}

TEST_CASE("preconditioner inverts the full-grid operator exactly (dirichlet)") {
  for (int n : {8, 16, 32}) {
    Grid g = make_grid({0, 1}, {0, 1}, n, n);
    Mask mask = all_unknown(g);
    BcSpec bc = BcSpec::uniform(BcKind::DirichletZero);
    auto x = oracle::random_vector(std::size_t(g.node_count()), 70 + std::uint64_t(n));
    auto Ax = matvec(x, mask, bc);
    auto back = apply_precond(Ax, mask, bc);
    double scale = 0;
    for (double v : x) scale = std::max(scale, std::fabs(v));
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(back[i] == Catch::Approx(x[i]).margin(1e-10 * scale));
  }
}

TEST_CASE("spd probe: symmetric, and positive definite on proper subsets") {
  Grid g = make_grid({0, 1}, {0, 1}, 8, 8);

  SECTION("dirichlet all-unknown is SPD") {
    auto rep = precond_is_spd_check(all_unknown(g), BcSpec::uniform(BcKind::DirichletZero), 20);
    CHECK(rep.max_asymmetry < 1e-12);
    CHECK(rep.min_rayleigh > 0.0);
  }
  SECTION("periodic all-unknown is symmetric PSD with projected constant mode") {
    Mask mask = all_unknown(g);
    BcSpec bc = BcSpec::uniform(BcKind::Periodic);
    auto rep = precond_is_spd_check(mask, bc, 20);
    CHECK(rep.max_asymmetry < 1e-12);
    CHECK(rep.min_rayleigh >= -1e-13);
    // the embedded constant vector is annihilated
    std::vector<double> ones(mask.unknown_index.size(), 1.0);
    auto Mo = apply_precond(ones, mask, bc);
    for (double v : Mo) CHECK(std::fabs(v) < 1e-12);
  }
  SECTION("periodic on a proper unknown subset is positive") {
    auto flags = std::vector<std::uint8_t>(std::size_t(g.node_count()), 0);
    flags[10] = 1;  // one known node
    auto rep = precond_is_spd_check(make_mask(g, flags), BcSpec::uniform(BcKind::Periodic), 20);
    CHECK(rep.max_asymmetry < 1e-12);
    CHECK(rep.min_rayleigh > 0.0);
  }
  SECTION("zero trials is vacuous") {
    auto rep = precond_is_spd_check(all_unknown(g), BcSpec::uniform(BcKind::DirichletZero), 0);
    CHECK(rep.max_asymmetry == 0.0);
  }
}

TEST_CASE("per-node preconditioner cost grows at most 2.5x per grid doubling") {
  auto time_apply = [](int n) {
    Grid g = make_grid({0, 1}, {0, 1}, n, n);
    Mask mask = make_mask(g, std::vector<std::uint8_t>(std::size_t(g.node_count()), 0));
    BcSpec bc = BcSpec::uniform(BcKind::NeumannZero);
    auto b = oracle::random_vector(mask.unknown_index.size(), 5);
    auto out = apply_precond(b, mask, bc);  // warm the plan cache
    double best = 1e300;
    for (int rep = 0; rep < 3; ++rep) {
      auto t0 = std::chrono::steady_clock::now();
      out = apply_precond(b, mask, bc);
      auto t1 = std::chrono::steady_clock::now();
      best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best / (double(n) * n);
  };
  double a = time_apply(128);
  double b = time_apply(256);
  CHECK(b / a < 2.5);
}
