#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "adiaspec/counterdiabatic.hpp"
#include "adiaspec/filter.hpp"
#include "adiaspec/interactions.hpp"
#include "adiaspec/spectral.hpp"

namespace adiaspec {

enum class Integrator { Magnus4, Midpoint };
Integrator parse_integrator(const std::string& name);
std::string integrator_name(Integrator m);

// s -> H(s), sparse
using SparsePath = std::function<SpMat(double)>;

// Propagates the columns of `frame` from s0 to s1 under i eps dX/ds = H(s) X with
// uniform steps no longer than max_step. Exponentials act through a Taylor
// series with substeps, so H is only ever used in matrix-vector products.
void propagate(const SparsePath& h, Mat& frame, double s0, double s1, double eps, double max_step,
               Integrator method = Integrator::Magnus4);

struct Trajectory {
  std::vector<double> grid;
  std::vector<Mat> frames;  // orthonormal columns at each grid point (one column for states)
  double epsilon = 0.0;
  double step = 0.0;
  std::string method;

  Vec state(std::size_t i) const { return frames[i].col(0); }
  Mat projector(std::size_t i) const { return frames[i] * frames[i].adjoint(); }
  // tr(P O) / tr P
  double expectation(std::size_t i, const Mat& o) const;
  double expectation(std::size_t i, const SpMat& o) const;
};

struct EvolveOptions {
  double max_step = 0.0;  // <= 0: min(eps/10, 1e-3)
  Integrator method = Integrator::Magnus4;
};

double default_step(double eps);

struct DressedMode {
  int order = 1;
  FilterFunction filter{0.5};
  Selector selector = Selector::lowest_k(1);
  double fd_step = 1e-3;
};

// Bare mode integrates the driven equation. Dressed mode returns U_n P_s U_n^dagger
// (as a frame) at each grid point, which is the dressed dynamics for a state
// spanning a one-dimensional patch.
Trajectory evolve_state(const HamiltonianPath& path, double eps, const Vec& psi0, const std::vector<double>& grid,
                        const EvolveOptions& opt = {}, const std::optional<DressedMode>& dressed = std::nullopt);

Trajectory evolve_projector(const HamiltonianPath& path, double eps, const Mat& p0, const std::vector<double>& grid,
                            const EvolveOptions& opt = {});

// Omega_{k+1} = exp(ds [dP, Pbar]) Omega_k with Pbar the midpoint projector and
// dP the central difference across the step. This generator keeps Omega in Ran P_s.
Trajectory parallel_transport(const std::vector<double>& grid, const std::vector<Mat>& projectors, const Vec& psi0);

struct LRProbeResult {
  std::vector<int> distances;
  std::vector<double> times;
  std::vector<std::vector<double>> norms;  // norms[d][t]
  std::vector<double> crossing_times;      // NaN when the threshold is never reached
  double threshold = 0.0;
  double velocity = std::numeric_limits<double>::quiet_NaN();
  double intercept = 0.0;
  double fit_residual = 0.0;
};

// ||[e^{iHt} O_x e^{-iHt}, O_y]|| for each O_y on the time grid. The velocity is
// the slope of distance against first-crossing time of rel_threshold * 2||O_x|| ||O_y||.
LRProbeResult lr_probe(const Mat& h, const Volume& vol, const Lattice& lat, const LocalOperator& ox,
                       const std::vector<LocalOperator>& oys, const std::vector<double>& times,
                       double rel_threshold = 1e-2, int threads = 1);

}  // namespace adiaspec
