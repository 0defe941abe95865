#include <doctest.h>

#include <cmath>
#include <random>

#include "adiaspec/lattice.hpp"
#include "oracles.hpp"

using namespace adiaspec;

namespace {

std::vector<std::vector<int>> adjacency(const Lattice& lat) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(lat.size()));
  for (auto [a, b] : lat.edges()) {
    adj[static_cast<std::size_t>(lat.index_of(a))].push_back(lat.index_of(b));
    adj[static_cast<std::size_t>(lat.index_of(b))].push_back(lat.index_of(a));
  }
  return adj;
}

}  // namespace

TEST_CASE("chain distances count path steps") {
  Lattice c = make_chain(5);
  CHECK(graph_distance(c, 1, 4) == 3);
  for (int x : c.sites()) CHECK(graph_distance(c, x, x) == 0);
  CHECK_THROWS_AS(graph_distance(c, 0, 17), DomainError);
}

TEST_CASE("grid corner-to-corner distance matches breadth-first search") {
  Lattice g = make_grid(3, 3);
  // site id r*W + c: (0,0) -> 0, (2,2) -> 8
  CHECK(graph_distance(g, 0, 8) == 4);
  auto adj = adjacency(g);
  for (int i = 0; i < g.size(); ++i) {
    auto d = oracle::bfs(adj, i);
    for (int j = 0; j < g.size(); ++j) CHECK(g.dist_idx(i, j) == d[static_cast<std::size_t>(j)]);
  }
}

TEST_CASE("metric axioms hold exhaustively on small lattices") {
  for (const Lattice& lat : {make_chain(30), make_grid(5, 4), make_grid(10, 10)}) {
    const int n = lat.size();
    bool ok = true;
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        ok = ok && lat.dist_idx(x, y) == lat.dist_idx(y, x);
        ok = ok && ((lat.dist_idx(x, y) == 0) == (x == y));
        for (int z = 0; z < n; ++z) ok = ok && lat.dist_idx(x, z) <= lat.dist_idx(x, y) + lat.dist_idx(y, z);
      }
    CHECK(ok);
  }
}

TEST_CASE("disconnected graphs and bad kappa are rejected") {
  CHECK_THROWS_AS(Lattice({0, 1, 2}, {{0, 1}}, 1), DomainError);
  CHECK_THROWS_AS(Lattice({0, 1, 2}, {{0, 1}, {1, 2}}, 1, 0.5), DomainError);
  Lattice ok({0, 1, 2}, {{0, 1}, {1, 2}}, 1, 10.0);
  CHECK(ok.kappa() == 10.0);
}

TEST_CASE("presets and JSON lattices") {
  CHECK(lattice_from_preset("chain:7").size() == 7);
  Lattice g = lattice_from_preset("grid:3x4");
  CHECK(g.size() == 12);
  CHECK(g.dim_d() == 2);
  CHECK_THROWS_AS(lattice_from_preset("ring:4"), ConfigError);
  CHECK_THROWS_AS(lattice_from_preset("chain:x"), ConfigError);
  auto j = nlohmann::json::parse(R"({"sites":[3,5,9],"edges":[[3,5],[5,9],[9,3]]})");
  Lattice t = lattice_from_json(j);
  CHECK(t.diameter() == 1);
  CHECK(graph_distance(t, 3, 9) == 1);
}

TEST_CASE("ball growth bound on a long chain gives kappa 3") {
  Lattice c = make_chain(100);
  DecayConstants k = decay_constants(c, DecayProfile::tabulated({1.0}, 1));
  CHECK(k.kappa_min == doctest::Approx(3.0).epsilon(1e-14));
  // every ball obeys the bound with the measured constant
  for (int y = 0; y < c.size(); y += 7)
    for (int r = 1; r < 40; ++r) CHECK(fattening(c, {y}, r).size() <= k.kappa_min * r + 1e-12);
}

TEST_CASE("single-site lattice has one-term decay sums") {
  Lattice one = make_chain(1);
  DecayProfile p = DecayProfile::exponential(0.7, 1);
  DecayConstants k = decay_constants(one, p);
  CHECK(k.c_f == doctest::Approx(p.f_zeta(0)));
  CHECK(k.f_one_norm == doctest::Approx(p.f_zeta(0)));
}

TEST_CASE("decay constants match direct summation and bound every convolution") {
  Lattice c = make_chain(50);
  DecayProfile p = DecayProfile::exponential(1.0, 1);
  DecayConstants k = decay_constants(c, p);
  auto fz = [](int r) { return std::exp(-r) * std::pow(1.0 + r, -2.0); };
  double cf = 0, one = 0;
  for (int x = 0; x < 50; ++x) {
    double row = 0;
    for (int z = 0; z < 50; ++z) row += fz(std::abs(x - z));
    one = std::max(one, row);
    for (int y = 0; y < 50; ++y) {
      double conv = 0;
      for (int z = 0; z < 50; ++z) conv += fz(std::abs(x - z)) * fz(std::abs(z - y));
      cf = std::max(cf, conv / fz(std::abs(x - y)));
      CHECK(conv <= k.c_f * fz(std::abs(x - y)) * (1 + 1e-12));
    }
  }
  CHECK(std::isfinite(k.c_f));
  CHECK(k.c_f == doctest::Approx(cf).epsilon(1e-12));
  CHECK(k.f_one_norm == doctest::Approx(one).epsilon(1e-12));
}

TEST_CASE("convolution bound holds on a grid with tabulated zeta") {
  Lattice g = make_grid(4, 4);
  std::vector<double> zeta;
  for (int r = 0; r <= g.diameter(); ++r) zeta.push_back(std::pow(1.0 + r, -0.5));
  DecayProfile p = DecayProfile::tabulated(zeta, 2);
  DecayConstants k = decay_constants(g, p);
  for (int x = 0; x < g.size(); ++x)
    for (int y = 0; y < g.size(); ++y) {
      double conv = 0;
      for (int z = 0; z < g.size(); ++z) conv += p.f_zeta(g.dist_idx(x, z)) * p.f_zeta(g.dist_idx(z, y));
      CHECK(conv <= k.c_f * p.f_zeta(g.dist_idx(x, y)) * (1 + 1e-12));
    }
}

TEST_CASE("tabulated zeta must be positive, non-increasing and log-superadditive") {
  CHECK_THROWS_AS(DecayProfile::tabulated({1.0, 0.0}, 1), DomainError);
  CHECK_THROWS_AS(DecayProfile::tabulated({0.5, 0.6}, 1), DomainError);
  // zeta(2) = 0.1 < zeta(1)^2 = 0.25
  CHECK_THROWS_AS(DecayProfile::tabulated({1.0, 0.5, 0.1}, 1), DomainError);
  CHECK_NOTHROW(DecayProfile::tabulated({1.0, 0.5, 0.25}, 1));
}

TEST_CASE("envelope of a constant is the constant") {
  auto g = subadditive_envelope(std::vector<double>(10, 2.5));
  for (double v : g) CHECK(v == 2.5);
}

TEST_CASE("envelope of 1+x^2 at x=4 is 8") {
  std::vector<double> f;
  for (int x = 0; x <= 12; ++x) f.push_back(1.0 + x * x);
  auto g = subadditive_envelope(f);
  // brute force over part counts k: k + 16/k for equal parts
  double best = f[4];
  for (int k = 1; k <= 4; ++k)
    if (4 % k == 0) best = std::min(best, k * (1.0 + (4.0 / k) * (4.0 / k)));
  CHECK(best == 8.0);
  CHECK(g[4] == doctest::Approx(8.0));
}

TEST_CASE("already subadditive input is left alone") {
  std::vector<double> f;
  for (int x = 0; x <= 30; ++x) f.push_back(std::sqrt(1.0 + x));
  auto g = subadditive_envelope(f);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(g[i] == doctest::Approx(f[i]));
}

TEST_CASE("envelope is subadditive and below f on random inputs") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> f{0.1 + u(rng)};
    for (int i = 1; i < 40; ++i) f.push_back(f.back() + u(rng) * u(rng) * i * 0.1);
    auto g = subadditive_envelope(f);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(g[i] > 0);
      CHECK(g[i] <= f[i]);
      for (std::size_t j = 0; i + j < g.size(); ++j) CHECK(g[i + j] <= g[i] + g[j] + 1e-12);
    }
  }
}

TEST_CASE("envelope rejects f(0) <= 0") {
  CHECK_THROWS_AS(subadditive_envelope({0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(subadditive_envelope({-1.0, 1.0}), DomainError);
}
