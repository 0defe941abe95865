#pragma once

#include <vector>

#include "adiaspec/dynamics.hpp"
#include "adiaspec/filter.hpp"
#include "adiaspec/interactions.hpp"
#include "adiaspec/spectral.hpp"

namespace adiaspec {

// H(s) = H_init + e^s alpha V for s in [s_trunc, 0]; s = eps t.
struct ResponseSetup {
  Interaction h_init;
  Interaction v;
  LocalOperator j;
  double alpha = 0.0;
  double epsilon = 0.1;
  double s_trunc = -30.0;
  Volume volume;
  Selector selector = Selector::lowest_k(1);
  double max_step = 0.0;  // <= 0: min(eps/10, 1e-2)
  Integrator method = Integrator::Magnus4;
};

// Checks the gap of H_init + sigma alpha V on a sigma grid and that the
// truncated switch-on tail is negligible. Throws GapError / DomainError.
void validate_setup(const ResponseSetup& setup, int sigma_points = 11);

struct DrivenResponse {
  double omega_driven = 0.0;  // tr(J P_eps(0)) / tr P
  double omega_ground = 0.0;  // tr(J P_0) / tr P_0
};

DrivenResponse switched_evolution(const ResponseSetup& setup);

struct KuboValue {
  double value = 0.0;
  double imag_part = 0.0;  // should vanish for Hermitian inputs
};

// -i tr([I(V), J] P_0) / tr P_0, with I the filter map of H_init
KuboValue kubo_commutator(const Mat& h_init, const Mat& v, const Mat& j, const FilterFunction& w,
                          const Selector& sel = Selector::lowest_k(1));
KuboValue kubo_commutator(const Interaction& h_init, const Interaction& v, const LocalOperator& j, const Volume& vol,
                          const FilterFunction& w, const Selector& sel = Selector::lowest_k(1));

struct KuboIntegral {
  std::vector<double> deltas;
  std::vector<double> values;  // i int_0^inf e^{-delta t} omega_0([tau_{-t}(V), J]) dt
  double extrapolated = 0.0;   // polynomial (Richardson) extrapolation to delta = 0
  double exact_limit = 0.0;    // closed-form delta -> 0 limit
};

KuboIntegral kubo_time_integral(const Mat& h_init, const Mat& v, const Mat& j, const std::vector<double>& deltas,
                                const Selector& sel = Selector::lowest_k(1));

// Neville evaluation at x = 0 of the interpolating polynomial through (x_i, y_i)
double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace adiaspec
