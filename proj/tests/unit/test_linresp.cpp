#include <doctest.h>

#include "adiaspec/experiments.hpp"
#include "adiaspec/linresp.hpp"
#include "oracles.hpp"

#include <random>

using namespace adiaspec;

namespace {

// static susceptibility d/dalpha tr(J P(alpha)) at alpha = 0, by central differences
double susceptibility(const Mat& h, const Mat& v, const Mat& j, int rank = 1) {
  auto obs = [&](double a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(h + a * v);
    Mat u = es.eigenvectors().leftCols(rank);
    return (u.adjoint() * j * u).trace().real() / rank;
  };
  const double d = 1e-4;
  return (obs(d) - obs(-d)) / (2 * d);
}

}  // namespace

TEST_CASE("two-level Kubo coefficient") {
  Mat h = -oracle::sz();
  FilterFunction w(0.5);
  KuboValue k = kubo_commutator(h, oracle::sx(), oracle::sx(), w);
  CHECK(k.value == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(k.imag_part) < 1e-14);
  // Y does not respond to an X field
  CHECK(std::abs(kubo_commutator(h, oracle::sx(), oracle::sy(), w).value) < 1e-14);
  // the ground-state derivative of <X> in -Z + a X
  CHECK(k.value == doctest::Approx(susceptibility(h, oracle::sx(), oracle::sx())).epsilon(1e-6));
}

TEST_CASE("commutator formula equals the static susceptibility on TFIM") {
  Mat h = oracle::tfim(6, 1.5);
  Mat vx = Mat::Zero(64, 64), jz = oracle::single(6, 2, oracle::sz()), jx = oracle::single(6, 3, oracle::sx());
  for (int i = 0; i < 6; ++i) vx += oracle::single(6, i, oracle::sx());
  Mat vz = oracle::single(6, 0, oracle::sz());
  FilterFunction w(0.5);
  for (auto [v, j] : {std::pair<Mat, Mat>{vx, jx}, {vz, jz}, {vx, jz}}) {
    KuboValue k = kubo_commutator(h, v, j, w);
    CHECK(std::abs(k.imag_part) < 1e-12);
    CHECK(k.value == doctest::Approx(susceptibility(h, v, j)).epsilon(1e-5));
  }
}

TEST_CASE("the answer does not depend on the filter once gamma is below the gap") {
  Mat h = oracle::tfim(5, 2.0);
  Mat v = oracle::single(5, 1, oracle::sx()), j = oracle::single(5, 3, oracle::sx());
  const double a = kubo_commutator(h, v, j, FilterFunction(0.5)).value;
  const double b = kubo_commutator(h, v, j, FilterFunction(1.0, FilterFunction::Interp::Cubic)).value;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
  CHECK_THROWS_AS(kubo_commutator(h, v, j, FilterFunction(10.0)), GapError);
}

TEST_CASE("energy response vanishes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ud(0.0, 3.0);
  for (int rep = 0; rep < 3; ++rep) {
    RVec e(16);
    e(0) = -1.0;
    for (int i = 1; i < 16; ++i) e(i) = ud(rng);
    Mat u = oracle::random_unitary(16, rng);
    Mat h = u * e.cast<cplx>().asDiagonal() * u.adjoint();
    h = 0.5 * (h + h.adjoint());
    Mat v = oracle::random_hermitian(16, rng);
    KuboValue k = kubo_commutator(h, v, h, FilterFunction(0.5));
    CHECK(std::abs(k.value) <= 1e-10);
    CHECK(std::abs(k.imag_part) <= 1e-10);
  }
}

TEST_CASE("regularized time integral extrapolates to the commutator formula") {
  FilterFunction w(0.5);
  Selector sel = Selector::lowest_k(1);
  {
    Mat h = -oracle::sz();
    KuboIntegral ki = kubo_time_integral(h, oracle::sx(), oracle::sx(), {0.05, 0.025, 0.0125}, sel);
    const double ref = kubo_commutator(h, oracle::sx(), oracle::sx(), w).value;
    CHECK(std::abs(ki.exact_limit - ref) <= 1e-12);
    CHECK(std::abs(ki.extrapolated - ref) <= 1e-6);
    // monotone approach from one side for a single frequency
    CHECK(std::abs(ki.values[2] - ref) < std::abs(ki.values[0] - ref));
  }
  {
    Mat h = oracle::tfim(6, 1.5);
    Mat v = Mat::Zero(64, 64);
    for (int i = 0; i < 6; ++i) v += oracle::single(6, i, oracle::sx());
    Mat j = oracle::single(6, 3, oracle::sx());
    const double gap = 2 * (1.5 - 1.0);
    std::vector<double> deltas{0.1 * gap, 0.05 * gap, 0.025 * gap};
    KuboIntegral ki = kubo_time_integral(h, v, j, deltas, sel);
    const double ref = kubo_commutator(h, v, j, w).value;
    CHECK(std::abs(ki.exact_limit - ref) <= 1e-10);
    CHECK(std::abs(ki.extrapolated - ref) <= 1e-6);
  }
  CHECK_THROWS_AS(kubo_time_integral(-oracle::sz(), oracle::sx(), oracle::sx(), {}, sel), DomainError);
  CHECK_THROWS_AS(kubo_time_integral(-oracle::sz(), oracle::sx(), oracle::sx(), {0.1, -0.1}, sel), DomainError);
}

TEST_CASE("polynomial extrapolation is exact on polynomials") {
  std::vector<double> x{0.4, 0.2, 0.1};
  std::vector<double> y;
  for (double t : x) y.push_back(3 + 2 * t - t * t);
  CHECK(extrapolate_to_zero(x, y) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(extrapolate_to_zero({0.3}, {5.0}) == 5.0);
  CHECK_THROWS_AS(extrapolate_to_zero({0.1, 0.1}, {1.0, 2.0}), DomainError);
  CHECK_THROWS_AS(extrapolate_to_zero({0.1}, {1.0, 2.0}), DomainError);
}

namespace {

ResponseSetup two_level(double alpha, double eps) {
  Lattice lat = make_chain(1);
  ResponseSetup s;
  s.h_init = field(lat, pauli::z(), -1.0);
  s.v = field(lat, pauli::x(), 1.0);
  s.j = LocalOperator({0}, pauli::x());
  s.alpha = alpha;
  s.epsilon = eps;
  s.volume = Volume::of(lat);
  return s;
}

}  // namespace

TEST_CASE("no perturbation means no response") {
  DrivenResponse r = switched_evolution(two_level(0.0, 0.1));
  CHECK(r.omega_driven == r.omega_ground);
  CHECK(std::abs(r.omega_ground) < 1e-14);
}

TEST_CASE("switched two-level response approaches the Kubo slope") {
  const double alpha = 0.05;
  const double f = -1.0;
  std::vector<double> res;
  for (double eps : {0.4, 0.2, 0.1}) {
    DrivenResponse r = switched_evolution(two_level(alpha, eps));
    res.push_back(std::abs((r.omega_driven - r.omega_ground) / alpha - f));
  }
  CHECK(res[0] > res[1]);
  CHECK(res[1] > res[2]);
  // second order in alpha: -a/sqrt(1+a^2) differs from -a by a^3/2
  CHECK(res[2] < 0.02);
}

TEST_CASE("setup validation") {
  ResponseSetup s = two_level(0.05, 0.1);
  CHECK_NOTHROW(validate_setup(s));
  s.epsilon = 0;
  CHECK_THROWS_AS(validate_setup(s), DomainError);
  s = two_level(0.05, 0.1);
  s.s_trunc = -5;
  CHECK_THROWS_AS(validate_setup(s), DomainError);
  s.s_trunc = 1;
  CHECK_THROWS_AS(validate_setup(s), DomainError);
  // -Z + alpha sigma Z closes at sigma alpha = 1
  s = two_level(2.0, 0.1);
  s.v = field(make_chain(1), pauli::z(), 1.0);
  CHECK_THROWS_AS(validate_setup(s), GapError);
  CHECK_THROWS_AS(kubo_commutator(-oracle::sz(), Mat::Identity(4, 4), oracle::sx(), FilterFunction(0.5)), DomainError);
}
