#include <catch2/catch_amalgamated.hpp>

#include "levex/biharmonic.hpp"
#include "oracle_helpers.hpp"

using namespace levex;

TEST_CASE("pad ghost layers follow the face rules") {
  Grid g = make_grid({0, 1}, {0, 1}, 5, 5);
  ScalarField ones = make_field(g, 1.0);

  SECTION("dirichlet: inner ghost 0, outer ghost -(first interior)") {
    PaddedField p = pad(ones, BcSpec::uniform(BcKind::DirichletZero));
    for (int j = 0; j < 5; ++j) {
      CHECK(p.at(-1, j) == 0.0);
      CHECK(p.at(-2, j) == -1.0);
      CHECK(p.at(5, j) == 0.0);
      CHECK(p.at(6, j) == -1.0);
      CHECK(p.at(j, -1) == 0.0);
      CHECK(p.at(j, -2) == -1.0);
    }
    // corners resolve consistently: both reflections give +1 here
    CHECK(p.at(-2, -2) == 1.0);
    CHECK(p.at(-1, -1) == 0.0);
  }

  SECTION("neumann: half-sample mirror of first two layers") {
    ScalarField f = sample(g, [](double x, double y, double) { return 10 * x + y; });
    PaddedField p = pad(f, BcSpec::uniform(BcKind::NeumannZero));
    for (int j = 0; j < 5; ++j) {
      CHECK(p.at(-1, j) == f.at(0, j));
      CHECK(p.at(-2, j) == f.at(1, j));
      CHECK(p.at(5, j) == f.at(4, j));
      CHECK(p.at(6, j) == f.at(3, j));
    }
    CHECK(p.at(2, -1) == f.at(2, 0));
    CHECK(p.at(2, -2) == f.at(2, 1));
  }

  SECTION("periodic wraps") {
    ScalarField f = sample(g, [](double x, double y, double) { return x + 100 * y; });
    PaddedField p = pad(f, BcSpec::uniform(BcKind::Periodic));
    for (int j = 0; j < 5; ++j) {
      CHECK(p.at(-1, j) == f.at(4, j));
      CHECK(p.at(-2, j) == f.at(3, j));
      CHECK(p.at(5, j) == f.at(0, j));
      CHECK(p.at(6, j) == f.at(1, j));
    }
  }
}

TEST_CASE("pad validates periodic pairing") {
  Grid g = make_grid({0, 1}, {0, 1}, 5, 5);
  ScalarField f = make_field(g);
  BcSpec bad = BcSpec::uniform(BcKind::NeumannZero);
  bad.faces[0][0] = BcKind::Periodic;
  CHECK_THROWS_AS(pad(f, bad), std::invalid_argument);
}

TEST_CASE("constant field is annihilated exactly under periodic and neumann") {
  Grid g = make_grid({0, 1}, {0, 1}, 6, 7);
  ScalarField c = make_field(g, 3.7);
  for (auto bc : {BcKind::Periodic, BcKind::NeumannZero}) {
    ScalarField B = apply_biharmonic(c, BcSpec::uniform(bc));
    for (std::int64_t k = 0; k < g.node_count(); ++k) CHECK(B[k] == 0.0);
  }
}

TEST_CASE("deep-interior delta reproduces the 13-point weights") {
  Grid g = make_grid({0, 1}, {0, 1}, 12, 12);
  ScalarField f = make_field(g);
  f.at(6, 6) = 1.0;
  ScalarField B = apply_biharmonic(f, BcSpec::uniform(BcKind::DirichletZero));
  auto w = [&](int di, int dj) { return B.at(6 + di, 6 + dj); };
  CHECK(w(0, 0) == 20.0);
  for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}})
    CHECK(w(di, dj) == -8.0);
  for (auto [di, dj] : {std::pair{1, 1}, {1, -1}, {-1, 1}, {-1, -1}})
    CHECK(w(di, dj) == 2.0);
  for (auto [di, dj] : {std::pair{2, 0}, {-2, 0}, {0, 2}, {0, -2}})
    CHECK(w(di, dj) == 1.0);
  CHECK(w(2, 1) == 0.0);
  CHECK(w(3, 0) == 0.0);
}

TEST_CASE("apply_biharmonic matches the dense oracle") {
  SECTION("2D, each BC kind") {
    Grid g = make_grid({0, 1}, {0, 1}, 6, 6);
    auto x = oracle::random_vector(std::size_t(g.node_count()), 99);
    ScalarField f = make_field(g);
    f.values = x;
    for (auto kind : {BcKind::DirichletZero, BcKind::NeumannZero, BcKind::Periodic}) {
      BcSpec bc = BcSpec::uniform(kind);
      Eigen::MatrixXd A = oracle::dense_biharmonic(g, bc);
      Eigen::Map<Eigen::VectorXd> xv(x.data(), g.node_count());
      Eigen::VectorXd ref = A * xv;
      ScalarField B = apply_biharmonic(f, bc);
      for (std::int64_t k = 0; k < g.node_count(); ++k)
        CHECK(B[k] == Catch::Approx(ref[k]).margin(1e-12));
    }
  }
  SECTION("2D, mixed faces per axis") {
    Grid g = make_grid({0, 1}, {0, 1}, 5, 7);
    auto x = oracle::random_vector(std::size_t(g.node_count()), 123);
    ScalarField f = make_field(g);
    f.values = x;
    BcSpec bc;
    bc.faces[0] = {BcKind::DirichletZero, BcKind::NeumannZero};
    bc.faces[1] = {BcKind::NeumannZero, BcKind::NeumannZero};
    Eigen::MatrixXd A = oracle::dense_biharmonic(g, bc);
    Eigen::Map<Eigen::VectorXd> xv(x.data(), g.node_count());
    Eigen::VectorXd ref = A * xv;
    ScalarField B = apply_biharmonic(f, bc);
    for (std::int64_t k = 0; k < g.node_count(); ++k)
      CHECK(B[k] == Catch::Approx(ref[k]).margin(1e-12));
  }
  SECTION("3D periodic") {
    Grid g = make_grid({0, 1}, {0, 1}, {0, 1}, 4, 5, 4);
    auto x = oracle::random_vector(std::size_t(g.node_count()), 7);
    ScalarField f = make_field(g);
    f.values = x;
    BcSpec bc = BcSpec::uniform(BcKind::Periodic);
    Eigen::MatrixXd A = oracle::dense_biharmonic(g, bc);
    Eigen::Map<Eigen::VectorXd> xv(x.data(), g.node_count());
    Eigen::VectorXd ref = A * xv;
    ScalarField B = apply_biharmonic(f, bc);
    for (std::int64_t k = 0; k < g.node_count(); ++k)
      CHECK(B[k] == Catch::Approx(ref[k]).margin(1e-11));
  }
}

TEST_CASE("translation equivariance deep in the interior") {
  Grid g = make_grid({0, 1}, {0, 1}, 16, 16);
  ScalarField f1 = make_field(g), f2 = make_field(g);
  // compact blob, support at least 4 cells from every face in both placements
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di) {
      f1.at(6 + di, 7 + dj) = 1.0 + di + 2 * dj;
      f2.at(8 + di, 9 + dj) = 1.0 + di + 2 * dj;
    }
  BcSpec bc = BcSpec::uniform(BcKind::DirichletZero);
  ScalarField B1 = apply_biharmonic(f1, bc), B2 = apply_biharmonic(f2, bc);
  for (int j = 3; j < 12; ++j)
    for (int i = 3; i < 12; ++i)
      CHECK(B1.at(i, j) == B2.at(i + 2, j + 2));
}

TEST_CASE("build_rhs") {
  Grid g = make_grid({0, 1}, {0, 1}, 8, 8);
  LevelSet ls{sample(g, [](double x, double y, double) {
    return std::sqrt((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)) - 0.3;
  })};
  Mask mask = mask_from_levelset(ls, ExtendSide::InsideKnown);
  BcSpec bc = BcSpec::uniform(BcKind::DirichletZero);

  SECTION("zero known field gives zero rhs") {
    ScalarField z = make_field(g);
    auto rhs = build_rhs(z, mask, bc);
    for (double v : rhs) CHECK(v == 0.0);
  }

  SECTION("rejects nonzero values at unknown nodes") {
    ScalarField f = make_field(g);
    f[mask.unknown_index[0]] = 1.0;
    CHECK_THROWS_WITH(build_rhs(f, mask, bc),
                      Catch::Matchers::ContainsSubstring("unknown node"));
  }

  SECTION("support is confined to stencil reach of known nodes") {
    ScalarField f = make_field(g);
    // single known node: find one and set it
    std::int64_t kn = -1;
    for (std::int64_t k = 0; k < g.node_count(); ++k)
      if (mask.known[std::size_t(k)]) { kn = k; break; }
    REQUIRE(kn >= 0);
    f[kn] = 2.5;
    auto rhs = build_rhs(f, mask, bc);
    auto c = g.decompose(kn);
    for (std::size_t p = 0; p < rhs.size(); ++p) {
      auto u = g.decompose(mask.unknown_index[p]);
      int d = std::abs(u[0] - c[0]) + std::abs(u[1] - c[1]);
      bool reachable = std::abs(u[0] - c[0]) <= 2 && std::abs(u[1] - c[1]) <= 2 && d <= 2;
      if (!reachable) CHECK(rhs[p] == 0.0);
    }
  }

  SECTION("linear in the known data") {
    ScalarField f = sample(g, [](double x, double y, double) { return x - y * y; });
    for (std::int64_t u : mask.unknown_index) f[u] = 0.0;
    auto r1 = build_rhs(f, mask, bc);
    ScalarField f2 = f;
    for (auto& v : f2.values) v *= 3.0;
    auto r3 = build_rhs(f2, mask, bc);
    for (std::size_t p = 0; p < r1.size(); ++p)
      CHECK(r3[p] == Catch::Approx(3.0 * r1[p]).margin(1e-13));
  }
}

TEST_CASE("matvec equals the dense induced operator") {
  Grid g = make_grid({0, 1}, {0, 1}, 8, 8);
  for (auto kind : {BcKind::DirichletZero, BcKind::NeumannZero, BcKind::Periodic}) {
    BcSpec bc = BcSpec::uniform(kind);
    Mask mask = make_mask(g, oracle::random_mask_flags(std::size_t(g.node_count()),
                                                       400 + int(kind)));
    Eigen::MatrixXd A =
        oracle::induced_matrix(oracle::dense_biharmonic(g, bc), mask.unknown_index);
    auto u = oracle::random_vector(mask.unknown_index.size(), 41);
    Eigen::Map<Eigen::VectorXd> uv(u.data(), std::int64_t(u.size()));
    Eigen::VectorXd ref = A * uv;
    auto got = matvec(u, mask, bc);
    for (std::size_t p = 0; p < got.size(); ++p)
      CHECK(got[p] == Catch::Approx(ref[std::int64_t(p)]).margin(1e-12));
  }
}

TEST_CASE("matvec is Euclidean symmetric to 1e-12") {
  Grid g = make_grid({0, 2}, {0, 1}, 7, 9);
  for (auto kind : {BcKind::DirichletZero, BcKind::NeumannZero, BcKind::Periodic}) {
    BcSpec bc = BcSpec::uniform(kind);
    Mask mask = make_mask(g, oracle::random_mask_flags(std::size_t(g.node_count()),
                                                       500 + int(kind)));
    auto u = oracle::random_vector(mask.unknown_index.size(), 1);
    auto v = oracle::random_vector(mask.unknown_index.size(), 2);
    auto Au = matvec(u, mask, bc);
    auto Av = matvec(v, mask, bc);
    double uav = 0, vau = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      uav += u[i] * Av[i];
      vau += v[i] * Au[i];
      nu += u[i] * u[i];
      nv += v[i] * v[i];
    }
    CHECK(std::fabs(uav - vau) / std::sqrt(nu * nv) < 1e-12);
  }
}

TEST_CASE("matvec is linear and zero maps to zero") {
  Grid g = make_grid({0, 1}, {0, 1}, 6, 6);
  BcSpec bc = BcSpec::uniform(BcKind::NeumannZero);
  Mask mask = make_mask(g, oracle::random_mask_flags(std::size_t(g.node_count()), 77));
  std::vector<double> z(mask.unknown_index.size(), 0.0);
  for (double v : matvec(z, mask, bc)) CHECK(v == 0.0);

  auto a = oracle::random_vector(z.size(), 11);
  auto b = oracle::random_vector(z.size(), 12);
  std::vector<double> ab(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) ab[i] = 2.0 * a[i] - 3.0 * b[i];
  auto Aab = matvec(ab, mask, bc);
  auto Aa = matvec(a, mask, bc);
  auto Ab = matvec(b, mask, bc);
  for (std::size_t i = 0; i < z.size(); ++i)
    CHECK(Aab[i] == Catch::Approx(2.0 * Aa[i] - 3.0 * Ab[i]).margin(1e-11));
}

TEST_CASE("induced dirichlet operator is positive definite") {
  Grid g = make_grid({0, 1}, {0, 1}, 9, 10);
  BcSpec bc = BcSpec::uniform(BcKind::DirichletZero);
  Mask mask = make_mask(g, oracle::random_mask_flags(std::size_t(g.node_count()), 321));
  Eigen::MatrixXd A =
      oracle::induced_matrix(oracle::dense_biharmonic(g, bc), mask.unknown_index);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("matvec validates vector length") {
  Grid g = make_grid({0, 1}, {0, 1}, 5, 5);
  Mask mask = make_mask(g, oracle::random_mask_flags(std::size_t(g.node_count()), 9));
  std::vector<double> wrong(mask.unknown_index.size() + 1, 0.0);
  CHECK_THROWS_AS(matvec(wrong, mask, BcSpec::uniform(BcKind::DirichletZero)),
                  std::invalid_argument);
}
