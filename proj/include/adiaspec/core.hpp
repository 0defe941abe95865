#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace adiaspec {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<cplx>;

// dense operators above this dimension are refused
constexpr Eigen::Index kMaxDenseDim = 4096;

// Bad user input (config keys, presets, malformed JSON).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Precondition violated by an argument of an operation.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: gap closure, non-convergence, loss of unitarity.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GapError : NumericalError {
  using NumericalError::NumericalError;
};

inline Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

// Operator (spectral) norm. Exact for dim <= 512, Lanczos above.
double op_norm(const Mat& a);

// Largest |eigenvalue| of a Hermitian operator given only by its action.
template <class Apply>
double hermitian_norm_lanczos(Eigen::Index dim, Apply&& apply, int max_iter = 80,
                              double rel_tol = 1e-12);

bool is_hermitian(const Mat& a, double tol);

// exp(i*A) for Hermitian A
Mat expi_hermitian(const Mat& a);

// Least-squares line fit y = slope*x + intercept; residual is the RMS misfit.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
// slope of log(y) against log(x)
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace adiaspec

#include "adiaspec/detail/lanczos.hpp"
