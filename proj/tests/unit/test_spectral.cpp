#include <doctest.h>

#include <random>

#include "adiaspec/spectral.hpp"
#include "oracles.hpp"

using namespace adiaspec;

namespace {

Mat diag(std::initializer_list<double> v) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.cast<cplx>().asDiagonal();
}

}  // namespace

TEST_CASE("degenerate diagonal ground space") {
  auto [spec, p] = diagonalize_and_patch(diag({0, 0, 5}), Selector::lowest_k(2));
  CHECK((p.projector - diag({1, 1, 0})).norm() < 1e-14);
  CHECK(p.gap == doctest::Approx(5.0));
  CHECK(p.width == 0.0);
}

TEST_CASE("TFIM in the paramagnetic phase has a gapped unique ground state") {
  auto [spec, p] = diagonalize_and_patch(oracle::tfim(8, 1.5), Selector::lowest_k(1));
  CHECK(p.gap > 0.5);
  CHECK(p.width == 0.0);
  CHECK(p.count == 1);
}

TEST_CASE("window selection on an unsorted diagonal") {
  auto [spec, p] = diagonalize_and_patch(diag({0, 3, 1}), Selector::window(-0.5, 1.5));
  CHECK(p.count == 2);
  CHECK(p.gap == doctest::Approx(2.0));
  CHECK(p.width == doctest::Approx(1.0));
  CHECK_THROWS_AS(diagonalize_and_patch(diag({0, 3, 1}), Selector::window(5, 6)), DomainError);
}

TEST_CASE("cluster selection groups the bottom of the spectrum") {
  auto [s1, p1] = diagonalize_and_patch(diag({0, 1e-12, 2, 2.5}), Selector::cluster());
  CHECK(p1.count == 2);
  auto [s2, p2] = diagonalize_and_patch(diag({0, 0.1, 0.2, 3}), Selector::cluster(0.15));
  CHECK(p2.count == 3);
  CHECK(p2.gap == doctest::Approx(2.8));
}

TEST_CASE("selecting half of a degenerate level violates the gap assumption") {
  CHECK_THROWS_AS(diagonalize_and_patch(diag({0, 0, 5}), Selector::lowest_k(1)), GapError);
  try {
    diagonalize_and_patch(diag({1, 1}), Selector::lowest_k(1));
  } catch (const GapError& e) {
    CHECK(std::string(e.what()).find("gap assumption violated") != std::string::npos);
  }
  CHECK_THROWS_AS(diagonalize_and_patch(diag({0, 1}), Selector::lowest_k(0)), DomainError);
}

TEST_CASE("non-Hermitian input is rejected") {
  Mat a(2, 2);
  a << 0, 1, 0, 0;
  CHECK_THROWS_AS(diagonalize(a), DomainError);
}

TEST_CASE("spectral data and patch invariants on random instances") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const int n = 4 + t;
    Mat h = oracle::random_hermitian(n, rng);
    auto [spec, p] = diagonalize_and_patch(h, Selector::lowest_k(1 + t % 3));
    const Mat& v = spec.eigenvectors;
    CHECK((h * v - v * spec.eigenvalues.cast<cplx>().asDiagonal()).norm() <= 1e-10 * h.norm());
    CHECK((v.adjoint() * v - Mat::Identity(n, n)).norm() <= 1e-10);
    for (int i = 1; i < n; ++i) CHECK(spec.eigenvalues(i) >= spec.eigenvalues(i - 1));
    CHECK((p.projector * p.projector - p.projector).norm() <= 1e-10);
    CHECK((p.projector - p.projector.adjoint()).norm() <= 1e-10);
    CHECK(std::lround(p.projector.trace().real()) == p.count);
    CHECK(op_norm(commutator(h, p.projector)) <= 1e-10 * std::max(1.0, op_norm(h)));
    CHECK(p.gap > 0);
  }
}

TEST_CASE("real and complex solver paths agree") {
  Mat h = oracle::tfim(5, 0.8);
  Mat u = Mat::Identity(32, 32) * std::polar(1.0, 0.3);  // global phase makes nothing complex in H
  auto [s1, p1] = diagonalize_and_patch(h, Selector::lowest_k(1));
  Mat hc = h + cplx(0, 1e-300) * Mat::Identity(32, 32);  // forces the complex path, same matrix numerically
  hc = 0.5 * (hc + hc.adjoint());
  std::mt19937_64 rng(1);
  Mat w = oracle::random_unitary(32, rng);
  auto [s2, p2] = diagonalize_and_patch(w * h * w.adjoint(), Selector::lowest_k(1));
  CHECK((s1.eigenvalues - s2.eigenvalues).norm() < 1e-10);
  CHECK((w * p1.projector * w.adjoint() - p2.projector).norm() < 1e-10);
  (void)u;
}

TEST_CASE("patch projector does not depend on the basis of a degenerate subspace") {
  std::mt19937_64 rng(23);
  // H = diag(-1,-1,-1, random gapped block), then rotate the degenerate block
  Mat h = Mat::Zero(8, 8);
  h.topLeftCorner(3, 3) = -Mat::Identity(3, 3);
  Mat rest = oracle::random_hermitian(5, rng);
  Eigen::SelfAdjointEigenSolver<Mat> es(rest);
  h.bottomRightCorner(5, 5) = rest - (es.eigenvalues()(0) - 1.0) * Mat::Identity(5, 5);
  Mat w = oracle::random_unitary(8, rng);
  Mat hw = w * h * w.adjoint();
  auto [s1, p1] = diagonalize_and_patch(hw, Selector::lowest_k(3));
  Mat r = Mat::Identity(8, 8);
  r.topLeftCorner(3, 3) = oracle::random_unitary(3, rng);
  Mat hr = (w * r) * h * (w * r).adjoint();  // same matrix, different degenerate basis
  auto [s2, p2] = diagonalize_and_patch(hr, Selector::lowest_k(3));
  CHECK((p1.projector - p2.projector).norm() < 1e-10);
  CHECK((p1.projector - w.leftCols(3) * w.leftCols(3).adjoint()).norm() < 1e-10);
}

TEST_CASE("gap along a constant path equals the single-point gap") {
  Lattice lat = make_chain(4);
  HamiltonianPath path(make_model("tfim:1.5:1.5", "constant", lat), Volume::of(lat));
  auto [spec, p] = diagonalize_and_patch(oracle::tfim(4, 1.5), Selector::lowest_k(1));
  GapScan g = gap_along_path(path, {0, 0.25, 0.5, 0.75, 1}, Selector::lowest_k(1));
  CHECK(g.gamma_min == doctest::Approx(p.gap).epsilon(1e-10));
  CHECK(g.delta_max == 0.0);
}

TEST_CASE("TFIM ramp stays gapped on a 21-point grid") {
  Lattice lat = make_chain(6);
  HamiltonianPath path(make_model("tfim:2:1.5", "linear", lat), Volume::of(lat));
  std::vector<double> grid;
  for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
  GapScan g = gap_along_path(path, grid, Selector::lowest_k(1), 0.1);
  CHECK(g.gamma_min > 0.5);
  CHECK(g.patches.size() == 21);
  REQUIRE(g.near_degenerate.has_value());
  CHECK(*g.near_degenerate);
  CHECK(g.delta_bound == doctest::Approx(std::min(0.01, 0.1 / 6)));
}

TEST_CASE("a level crossing is reported at the closing point") {
  Lattice lat = make_chain(1);
  auto j = nlohmann::json::parse(R"({"terms": [{"support": [0], "matrix": [[1,0],[0,-1]]}],
                                     "terms_final": [{"support": [0], "matrix": [[-1,0],[0,1]]}]})");
  HamiltonianPath path(make_model("custom", "linear", lat, j), Volume::of(lat));
  try {
    gap_along_path(path, {0, 0.25, 0.5, 0.75, 1}, Selector::lowest_k(1));
    FAIL("expected a gap error");
  } catch (const GapError& e) {
    CHECK(std::string(e.what()).find("s=0.5") != std::string::npos);
  }
}

TEST_CASE("near-degeneracy check for a split doublet") {
  // rotating Ising doublet is exactly degenerate: width 0 passes any bound
  Lattice lat = make_chain(4);
  HamiltonianPath path(make_model("rotising:0:1", "linear", lat), Volume::of(lat));
  GapScan g = gap_along_path(path, {0, 0.5, 1}, Selector::lowest_k(2), 0.05);
  CHECK(g.delta_max < 1e-12);
  CHECK(*g.near_degenerate);
  CHECK(g.gamma_min == doctest::Approx(2.0).epsilon(1e-10));
}
