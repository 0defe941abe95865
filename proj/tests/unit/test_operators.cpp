#include <doctest.h>

#include <random>

#include "adiaspec/interactions.hpp"
#include "adiaspec/operators.hpp"
#include "oracles.hpp"

using namespace adiaspec;

TEST_CASE("embedding a middle-site sigma_x is 1 (x) X (x) 1") {
  Volume v = Volume::qubits({1, 2, 3});
  Mat m = embed(LocalOperator({2}, pauli::x()), v);
  CHECK(m.rows() == 8);
  CHECK(m(0, 2) == cplx(1, 0));
  Mat ref = oracle::chain_product({oracle::id2(), oracle::sx(), oracle::id2()});
  CHECK((m - ref).norm() == 0.0);
}

TEST_CASE("identity embeds to identity") {
  Volume v = Volume::qubits({0, 1, 2, 3});
  Mat m = embed(LocalOperator({1, 3}, Mat::Identity(4, 4)), v);
  CHECK((m - Mat::Identity(16, 16)).norm() == 0.0);
}

TEST_CASE("ZZ on sites 1,2 of three qubits has the Kronecker sign pattern") {
  Volume v = Volume::qubits({1, 2, 3});
  Mat m = embed(product_op({{1, pauli::z()}, {2, pauli::z()}}), v);
  Mat ref = oracle::chain_product({oracle::sz(), oracle::sz(), oracle::id2()});
  CHECK((m - ref).norm() == 0.0);
  for (int i = 0; i < 8; ++i) CHECK(m(i, i).real() == (((i >> 2) ^ (i >> 1)) & 1 ? -1.0 : 1.0));
}

TEST_CASE("support order is normalized on construction") {
  // Z on site 5 and X on site 2 given in reverse order
  LocalOperator op({5, 2}, oracle::kron(oracle::sz(), oracle::sx()));
  CHECK(op.support == std::vector<int>{2, 5});
  CHECK((op.matrix - oracle::kron(oracle::sx(), oracle::sz())).norm() == 0.0);
  CHECK_THROWS_AS(LocalOperator({1, 2}, Mat::Identity(2, 2)), DomainError);
}

TEST_CASE("embedding outside the volume fails") {
  Volume v = Volume::qubits({0, 1});
  CHECK_THROWS_AS(embed(LocalOperator({4}, pauli::z()), v), DomainError);
}

TEST_CASE("sparse and dense embeddings agree") {
  std::mt19937_64 rng(3);
  Volume v = Volume::qubits({0, 1, 2, 3, 4});
  LocalOperator op({1, 3}, oracle::random_hermitian(4, rng));
  CHECK((Mat(embed_sparse(op, v)) - embed(op, v)).norm() < 1e-14);
}

TEST_CASE("embedding is an algebra morphism and preserves norms") {
  std::mt19937_64 rng(11);
  Volume v = Volume::qubits({0, 1, 2, 3});
  for (int t = 0; t < 10; ++t) {
    LocalOperator a({0, 2}, oracle::random_hermitian(4, rng));
    LocalOperator b({0, 2}, oracle::random_hermitian(4, rng));
    LocalOperator ab({0, 2}, a.matrix * b.matrix);
    CHECK((embed(ab, v) - embed(a, v) * embed(b, v)).norm() < 1e-12);
    CHECK(op_norm(embed(a, v)) == doctest::Approx(oracle::spectral_norm(a.matrix)).epsilon(1e-12));
  }
}

TEST_CASE("partial trace examples") {
  std::mt19937_64 rng(5);
  Volume v = Volume::qubits({0, 1});
  Mat a = oracle::random_hermitian(4, rng);
  LocalOperator all = conditional_expectation(a, v, {0, 1});
  CHECK((all.matrix - a).norm() < 1e-14);

  Mat zz = oracle::kron(oracle::sz(), oracle::sz());
  CHECK(conditional_expectation(zz, v, {0}).matrix.norm() == 0.0);

  Mat a1 = oracle::random_hermitian(2, rng), b1 = oracle::random_hermitian(2, rng);
  LocalOperator r = conditional_expectation(oracle::kron(a1, b1), v, {0});
  CHECK((r.matrix - a1 * (b1.trace() / 2.0)).norm() < 1e-14);
}

TEST_CASE("conditional expectation inverts embedding and does not increase norms") {
  std::mt19937_64 rng(9);
  Volume v = Volume::qubits({0, 1, 2, 3});
  for (int t = 0; t < 10; ++t) {
    LocalOperator a({1, 3}, oracle::random_hermitian(4, rng));
    CHECK((conditional_expectation(embed(a, v), v, {1, 3}).matrix - a.matrix).norm() < 1e-13);
    Mat big = oracle::random_hermitian(16, rng);
    for (std::vector<int> y : {std::vector<int>{0}, {2, 3}, {0, 1, 3}})
      CHECK(op_norm(conditional_expectation(big, v, y).matrix) <= op_norm(big) * (1 + 1e-12));
  }
  // unital
  CHECK((conditional_expectation(Mat::Identity(16, 16), v, {2}).matrix - Mat::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("local commutators") {
  LocalOperator z({0}, pauli::z()), x({0}, pauli::x());
  LocalOperator c = commutator_local(z, x);
  CHECK((c.matrix - cplx(0, 2) * oracle::sy()).norm() < 1e-15);
  LocalOperator far({7}, pauli::x());
  LocalOperator d = commutator_local(z, far);
  CHECK(d.support == std::vector<int>{0, 7});
  CHECK(d.matrix.norm() == 0.0);
  CHECK(commutator_local(z, z).matrix.norm() == 0.0);
  // overlapping supports against a full-volume oracle
  LocalOperator zz = product_op({{0, pauli::z()}, {1, pauli::z()}});
  LocalOperator x1({1}, pauli::x());
  LocalOperator e = commutator_local(zz, x1);
  Mat ref = oracle::kron(oracle::sz(), oracle::sz()) * oracle::kron(oracle::id2(), oracle::sx()) -
            oracle::kron(oracle::id2(), oracle::sx()) * oracle::kron(oracle::sz(), oracle::sz());
  CHECK((e.matrix - ref).norm() < 1e-14);
  CHECK_THROWS_AS(commutator_local(LocalOperator({0}, Mat::Identity(3, 3), {3}), x), DomainError);
}

TEST_CASE("delta decomposition of an already local operator") {
  Lattice lat = make_chain(5);
  Volume v = Volume::of(lat);
  LocalOperator o({2}, pauli::z());
  auto deltas = delta_decomposition(embed(o, v), v, {2}, lat);
  CHECK((deltas[0].matrix - o.matrix).norm() < 1e-14);
  for (std::size_t n = 1; n < deltas.size(); ++n) CHECK(deltas[n].matrix.norm() < 1e-14);
}

TEST_CASE("delta decomposition telescopes and decays for evolved operators") {
  Lattice lat = make_chain(8);
  Volume v = Volume::of(lat);
  Mat h = oracle::tfim(8, 1.0);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  auto evolve = [&](double t) {
    Eigen::VectorXcd ph = (cplx(0, 1) * t * es.eigenvalues().cast<cplx>()).array().exp();
    Mat u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    return Mat(u * embed(LocalOperator({3}, pauli::z()), v) * u.adjoint());
  };
  Mat ev = evolve(0.5);
  auto deltas = delta_decomposition(ev, v, {3}, lat);
  Mat sum = Mat::Zero(ev.rows(), ev.cols());
  for (auto& d : deltas) sum += embed(d, v);
  CHECK(op_norm(Mat(sum - ev)) <= 1e-12);
  // supports are the fattenings
  for (std::size_t n = 0; n < deltas.size(); ++n) CHECK(deltas[n].support == fattening(lat, {3}, static_cast<int>(n)));
  // decay faster than any fixed polynomial: successive ratios shrink
  std::vector<double> norms;
  for (auto& d : deltas) norms.push_back(op_norm(d.matrix));
  for (std::size_t n = 2; n + 1 < 5; ++n) CHECK(norms[n + 1] / norms[n] < norms[n] / norms[n - 1]);
  CHECK(norms[4] < 1e-3 * norms[0]);

  // random full operator still telescopes
  std::mt19937_64 rng(1);
  Mat r = oracle::random_hermitian(256, rng);
  auto dr = delta_decomposition(r, v, {0, 1}, lat);
  Mat s2 = Mat::Zero(256, 256);
  for (auto& d : dr) s2 += embed(d, v);
  CHECK(op_norm(Mat(s2 - r)) <= 1e-12);
}
