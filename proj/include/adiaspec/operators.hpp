#pragma once

#include <map>
#include <vector>

#include "adiaspec/core.hpp"
#include "adiaspec/lattice.hpp"

namespace adiaspec {

// Ordered list of sites with local Hilbert-space dimensions. The first site
// is the most significant tensor factor.
struct Volume {
  std::vector<int> sites;
  std::vector<int> dims;

  static Volume qubits(std::vector<int> sites);
  static Volume of(const Lattice& lat, int local_dim = 2);

  Eigen::Index dim() const;
  int position(int site) const;  // -1 if absent
  bool contains(int site) const { return position(site) >= 0; }
  int local_dim(int site) const;
};

struct LocalOperator {
  std::vector<int> support;  // sorted ascending
  std::vector<int> dims;     // local dimension per support site
  Mat matrix;

  LocalOperator() = default;
  // sorts the support (permuting the matrix accordingly) and checks dimensions
  LocalOperator(std::vector<int> support, Mat matrix, std::vector<int> dims = {});

  Eigen::Index dim() const { return matrix.rows(); }
};

namespace pauli {
Mat id();
Mat x();
Mat y();
Mat z();
}  // namespace pauli

// product of single-site matrices, e.g. {{1, pauli::z()}, {2, pauli::z()}}
LocalOperator product_op(const std::map<int, Mat>& factors);

// op (x) identity on the volume, in volume order
Mat embed(const LocalOperator& op, const Volume& vol);
SpMat embed_sparse(const LocalOperator& op, const Volume& vol);

// Normalized partial trace onto y: unital and norm non-increasing.
LocalOperator conditional_expectation(const Mat& full, const Volume& vol, std::vector<int> y);

// [a, b] on the union of supports; zero without any tensor product when disjoint
LocalOperator commutator_local(const LocalOperator& a, const LocalOperator& b);

// Telescoping localization: entry n is supported on the n-fattening of x_support,
// and the embedded entries sum to `evolved`.
std::vector<LocalOperator> delta_decomposition(const Mat& evolved, const Volume& vol,
                                               const std::vector<int>& x_support, const Lattice& lat);

// Move op onto a (super)set of its support, in sorted order.
LocalOperator extend_support(const LocalOperator& op, const std::vector<int>& sites, const std::vector<int>& dims);

}  // namespace adiaspec
