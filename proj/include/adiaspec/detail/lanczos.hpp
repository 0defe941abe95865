#pragma once

#include <algorithm>
#include <cmath>
#include <random>

namespace adiaspec {

template <class Apply>
double hermitian_norm_lanczos(Eigen::Index dim, Apply&& apply, int max_iter, double rel_tol) {
  if (dim == 0) return 0.0;
  const int m_max = static_cast<int>(std::min<Eigen::Index>(max_iter, dim));
  // fixed start vector keeps results reproducible
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd;
  Vec q(dim);
  for (Eigen::Index i = 0; i < dim; ++i) q(i) = cplx(nd(rng), nd(rng));
  q.normalize();

  Mat basis(dim, m_max);
  std::vector<double> alpha, beta;
  double last = -1.0;
  for (int j = 0; j < m_max; ++j) {
    basis.col(j) = q;
    Vec w = apply(q);
    double a = std::real(q.dot(w));
    alpha.push_back(a);
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) {
      Vec c = basis.leftCols(j + 1).adjoint() * w;
      w -= basis.leftCols(j + 1) * c;
    }
    double b = w.norm();

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(j + 1, j + 1);
    for (int k = 0; k <= j; ++k) {
      t(k, k) = alpha[k];
      if (k < j) t(k, k + 1) = t(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    double est = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(j)));
    if (b < 1e-14 * std::max(1.0, est)) return est;  // invariant subspace found
    if (j > 4 && std::abs(est - last) <= rel_tol * std::max(est, 1e-300)) return est;
    last = est;
    beta.push_back(b);
    q = w / b;
  }
  return last;
}

}  // namespace adiaspec
