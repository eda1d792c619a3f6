#include <catch2/catch_amalgamated.hpp>

#include <cstring>

#include "levex/solver.hpp"
#include "oracle_helpers.hpp"

using namespace levex;

namespace {

auto identity_op() {
  return [](const std::vector<double>& in, std::vector<double>& out) { out = in; };
}

auto diag_op(std::vector<double> d) {
  return [d = std::move(d)](const std::vector<double>& in, std::vector<double>& out) {
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = d[i] * in[i];
  };
}

}  // namespace

TEST_CASE("pcg solves the identity system in one exact step") {
  auto b = oracle::random_vector(17, 3);
  auto [x, stats] = pcg(identity_op(), identity_op(), b, 1e-12, 10);
  CHECK(stats.converged);
  CHECK(stats.iterations == 1);
  CHECK(stats.residual_history.size() == 1);
  CHECK(stats.alpha_beta.size() == 1);
  CHECK(stats.alpha_beta[0].first == 1.0);
  CHECK(stats.alpha_beta[0].second == 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(x[i] == b[i]);
}

TEST_CASE("pcg with a zero right-hand side returns zero without iterating") {
  std::vector<double> b(9, 0.0);
  auto [x, stats] = pcg(identity_op(), identity_op(), b, 1e-12, 10);
  CHECK(stats.converged);
  CHECK(stats.iterations == 0);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("pcg matches a dense factorization on a random SPD system") {
  const int n = 40;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd G(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) G(i, j) = gauss(rng);
  Eigen::MatrixXd A = G.transpose() * G + Eigen::MatrixXd::Identity(n, n);
  auto applyA = [&](const std::vector<double>& in, std::vector<double>& out) {
    Eigen::Map<const Eigen::VectorXd> vi(in.data(), n);
    Eigen::VectorXd vo = A * vi;
    out.assign(vo.data(), vo.data() + n);
  };
  auto b = oracle::random_vector(n, 12);
  auto [x, stats] = pcg(applyA, identity_op(), b, 1e-13, 500);
  REQUIRE(stats.converged);
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  Eigen::VectorXd ref = A.ldlt().solve(bv);
  for (int i = 0; i < n; ++i) CHECK(x[std::size_t(i)] == Catch::Approx(ref(i)).margin(1e-8));
}

TEST_CASE("pcg stops at maxit with a partial iterate") {
  std::vector<double> d(10);
  for (int i = 0; i < 10; ++i) d[std::size_t(i)] = i + 1.0;
  std::vector<double> b(10, 1.0);
  auto [x, stats] = pcg(diag_op(d), identity_op(), b, 1e-14, 2);
  CHECK_FALSE(stats.converged);
  CHECK(stats.iterations == 2);
  CHECK(stats.residual_history.size() == 2);
  CHECK(stats.relative_residual > 1e-14);
  CHECK(stats.relative_residual < 1.0);  // progress was made
}

TEST_CASE("pcg rejects indefinite operators and non-finite values") {
  std::vector<double> b(5, 1.0);
  auto negate = [](const std::vector<double>& in, std::vector<double>& out) {
    out.resize(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = -in[i];
  };
  CHECK_THROWS_WITH(pcg(negate, identity_op(), b, 1e-10, 10),
                    Catch::Matchers::ContainsSubstring("nonpositive curvature"));
  auto poison = [](const std::vector<double>& in, std::vector<double>& out) {
    out.assign(in.size(), std::numeric_limits<double>::quiet_NaN());
  };
  CHECK_THROWS_AS(pcg(poison, identity_op(), b, 1e-10, 10), std::runtime_error);
  CHECK_THROWS_AS(pcg(identity_op(), identity_op(), b, -1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(pcg(identity_op(), identity_op(), b, 1e-10, 0), std::invalid_argument);
}

TEST_CASE("condition_estimate recovers eigenvalue ratios from CG coefficients") {
  SECTION("identity gives 1") {
    auto b = oracle::random_vector(8, 21);
    auto [x, stats] = pcg(identity_op(), identity_op(), b, 1e-12, 10);
    CHECK(condition_estimate(stats) == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("diag(1..10) gives an estimate in [9, 10]") {
    std::vector<double> d(10);
    for (int i = 0; i < 10; ++i) d[std::size_t(i)] = i + 1.0;
    auto b = oracle::random_vector(10, 22);
    auto [x, stats] = pcg(diag_op(d), identity_op(), b, 1e-13, 50);
    REQUIRE(stats.converged);
    double est = condition_estimate(stats);
    CHECK(est >= 9.0);
    CHECK(est <= 10.0 + 1e-6);
  }
  SECTION("no iterations is an error") {
    SolveStats empty;
    CHECK_THROWS_AS(condition_estimate(empty), std::runtime_error);
  }
}

TEST_CASE("dense_solve passes known values through and enforces its cap") {
  Grid g = make_grid({0, 1}, {0, 1}, 5, 5);
  BcSpec bc = BcSpec::uniform(BcKind::NeumannZero);
  SECTION("no unknowns returns the input bitwise") {
    Mask mask = make_mask(g, std::vector<std::uint8_t>(25, 1));
    ScalarField f = sample(g, [](double x, double y, double) { return x - 3 * y; });
    ScalarField out = dense_solve(f, mask, bc);
    for (std::int64_t k = 0; k < g.node_count(); ++k) CHECK(out[k] == f[k]);
  }
  SECTION("cap exceeded throws") {
    Mask mask = make_mask(g, std::vector<std::uint8_t>(25, 0));
    ScalarField f = make_field(g);
    CHECK_THROWS_AS(dense_solve(f, mask, bc, 10), std::invalid_argument);
  }
}

TEST_CASE("pcg extension agrees with the dense reference across bc kinds and masks") {
  Grid g = make_grid({0, 1}, {0, 2}, 7, 6);
  BcSpec mixed;
  mixed.faces[0] = {BcKind::NeumannZero, BcKind::DirichletZero};
  mixed.faces[1] = {BcKind::NeumannZero, BcKind::NeumannZero};
  struct Case {
    BcSpec bc;
    const char* name;
  };
  for (const auto& [bc, name] : {Case{BcSpec::uniform(BcKind::DirichletZero), "dirichlet"},
                                 Case{BcSpec::uniform(BcKind::NeumannZero), "neumann"},
                                 Case{BcSpec::uniform(BcKind::Periodic), "periodic"},
                                 Case{mixed, "mixed"}}) {
    for (std::uint64_t seed : {101u, 202u, 303u}) {
      INFO(name << " seed " << seed);
      Mask mask = make_mask(g, oracle::random_mask_flags(std::size_t(g.node_count()), seed));
      ScalarField f = make_field(g);
      std::mt19937_64 rng(seed + 7);
      std::normal_distribution<double> gauss;
      for (std::int64_t k = 0; k < g.node_count(); ++k)
        if (mask.known[std::size_t(k)]) f[k] = gauss(rng);

      ScalarField ref = dense_solve(f, mask, bc);
      ExtendParams params;
      params.tol = 1e-12;
      params.maxit = 500;
      ExtendResult res = extend(f, mask, bc, params);
      REQUIRE(res.stats.converged);
      double range = 0;
      for (std::int64_t k = 0; k < g.node_count(); ++k)
        range = std::max(range, std::fabs(ref[k]));
      for (std::int64_t k = 0; k < g.node_count(); ++k)
        CHECK(res.field[k] == Catch::Approx(ref[k]).margin(1e-8 * std::max(1.0, range)));
    }
  }
}

TEST_CASE("extension reproduces constants under neumann and periodic faces") {
  Grid g = make_grid({0, 1}, {0, 1}, 12, 10);
  for (BcKind kind : {BcKind::NeumannZero, BcKind::Periodic}) {
    INFO(bc_name(kind));
    Mask mask = make_mask(g, oracle::random_mask_flags(std::size_t(g.node_count()), 40));
    ScalarField f = make_field(g);
    for (std::int64_t k = 0; k < g.node_count(); ++k)
      if (mask.known[std::size_t(k)]) f[k] = 2.75;
    ExtendParams params;
    params.tol = 1e-13;
    params.maxit = 500;
    ExtendResult res = extend(f, mask, BcSpec::uniform(kind), params);
    REQUIRE(res.stats.converged);
    for (std::int64_t k = 0; k < g.node_count(); ++k)
      CHECK(res.field[k] == Catch::Approx(2.75).margin(1e-9));
  }
}

TEST_CASE("extend leaves known nodes bitwise untouched, even when stopped early") {
  Grid g = make_grid({0, 1}, {0, 1}, 9, 8);
  Mask mask = make_mask(g, oracle::random_mask_flags(std::size_t(g.node_count()), 55));
  ScalarField f = make_field(g);
  std::mt19937_64 rng(56);
  std::normal_distribution<double> gauss;
  for (std::int64_t k = 0; k < g.node_count(); ++k)
    if (mask.known[std::size_t(k)]) f[k] = gauss(rng) * 1e-3;
  BcSpec bc = BcSpec::uniform(BcKind::NeumannZero);

  ExtendParams partial;
  partial.tol = 1e-15;
  partial.maxit = 1;
  ExtendResult res = extend(f, mask, bc, partial);
  CHECK_FALSE(res.stats.converged);
  CHECK(res.stats.iterations == 1);
  for (std::int64_t k = 0; k < g.node_count(); ++k)
    if (mask.known[std::size_t(k)])
      CHECK(std::memcmp(&res.field[k], &f[k], sizeof(double)) == 0);

  ExtendParams full;
  full.tol = 1e-10;
  full.maxit = 500;
  res = extend(f, mask, bc, full);
  REQUIRE(res.stats.converged);
  for (std::int64_t k = 0; k < g.node_count(); ++k)
    if (mask.known[std::size_t(k)])
      CHECK(std::memcmp(&res.field[k], &f[k], sizeof(double)) == 0);
}

TEST_CASE("extend validates its inputs") {
  Grid g = make_grid({0, 1}, {0, 1}, 6, 6);
  BcSpec bc = BcSpec::uniform(BcKind::DirichletZero);
  ScalarField f = make_field(g);
  CHECK_THROWS_WITH(extend(f, make_mask(g, std::vector<std::uint8_t>(36, 1)), bc),
                    Catch::Matchers::ContainsSubstring("no unknown"));
  CHECK_THROWS_WITH(extend(f, make_mask(g, std::vector<std::uint8_t>(36, 0)), bc),
                    Catch::Matchers::ContainsSubstring("no known"));
  Grid g2 = make_grid({0, 1}, {0, 1}, 6, 7);
  Mask mask2 = make_mask(g2, oracle::random_mask_flags(42, 9));
  CHECK_THROWS_WITH(extend(f, mask2, bc), Catch::Matchers::ContainsSubstring("grids differ"));
}

TEST_CASE("circular interface extension converges quickly at moderate size") {
  const int n = 64;
  Grid g = make_grid({-oracle::kPi, oracle::kPi}, {-oracle::kPi, oracle::kPi}, n, n);
  ScalarField phi = sample(g, [](double x, double y, double) {
    return std::sqrt(x * x + y * y) - 1.5;
  });
  Mask mask = mask_from_levelset(LevelSet{phi}, ExtendSide::InsideKnown);
  ScalarField f = make_field(g);
  for (std::int64_t k = 0; k < g.node_count(); ++k)
    if (mask.known[std::size_t(k)]) {
      auto p = g.node(k);
      f[k] = std::cos(p[0]) * std::sin(p[1]);
    }
  ExtendResult res = extend(f, mask, BcSpec::uniform(BcKind::DirichletZero));
  CHECK(res.stats.converged);
  CHECK(res.stats.iterations < n);
  CHECK(res.stats.iterations > 5);
  // residual history is recorded one entry per iteration
  CHECK(int(res.stats.residual_history.size()) == res.stats.iterations);
  CHECK(res.stats.relative_residual <= 1e-6);
}
