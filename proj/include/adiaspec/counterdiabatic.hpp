#pragma once

#include <map>
#include <vector>

#include "adiaspec/filter.hpp"
#include "adiaspec/spectral.hpp"

namespace adiaspec {

constexpr int kMaxDressingOrder = 4;

struct DressingSequence {
  int order = 0;
  double epsilon = 0.0;
  double s = 0.0;
  std::vector<Mat> a_ops;         // A_1 .. A_n
  Mat s_sum;                      // sum_a eps^a A_a
  Mat u;                          // exp(i s_sum)
  std::vector<double> residuals;  // ||[Q_{a-1} - H_a, P]|| per order
  PatchData patch;
};

// Builds the dressing operators at one point. Derivatives of A_j are taken by
// order-4 central differences over rebuilds at s + m*fd_step; rebuilt points
// are cached per call so that every nested level is computed once.
class DressingBuilder {
 public:
  DressingBuilder(const HamiltonianPath& path, FilterFunction w, Selector sel, double fd_step = 1e-3,
                  double residual_tol = 1e-6);

  DressingSequence build(double s, int n, double eps) const;

 private:
  struct Level {
    Mat h;
    SpectralData spec;
    PatchData patch;
    std::vector<Mat> a;  // a[j-1] = A_j
    std::vector<double> residuals;
    bool ready = false;
  };
  using Cache = std::map<int, Level>;

  Level& level(Cache& c, double base, int m) const;
  const Mat& a_op(Cache& c, double base, int m, int alpha) const;
  Mat a_dot(Cache& c, double base, int m, int j) const;

  const HamiltonianPath& path_;
  FilterFunction w_;
  Selector sel_;
  double h_;
  double tol_;
};

DressingSequence build_dressing(const HamiltonianPath& path, double s, int n, double eps, const FilterFunction& w,
                                const Selector& sel, double fd_step = 1e-3);

// U P U^dagger
Mat dressed_projector(const DressingSequence& d, const PatchData& p);

// || i eps dPi/ds - [H_s, Pi] ||, Pi differentiated with an order-4 stencil of step h_s
double dressing_defect(const HamiltonianPath& path, double s, int n, double eps, const FilterFunction& w,
                       const Selector& sel, double h_s = 1e-3, double fd_step = 1e-3);

}  // namespace adiaspec
