#pragma once

#include <optional>
#include <string>
#include <vector>

#include "adiaspec/core.hpp"
#include "adiaspec/interactions.hpp"
#include "adiaspec/spectral.hpp"

namespace adiaspec {

// Sampled odd time kernel W(t) on [0, t_max] (W(-t) = -W(t)).
struct TimeKernel {
  double t_max = 0.0;
  double dt = 0.0;
  std::vector<double> samples;  // W(k dt), k = 0..N, with W(0) the one-sided limit
  double tail_bound = 0.0;      // per unit matrix element, from truncating at t_max
  // W(t) ~ tail_amp sin(gamma t) / t^2 beyond t_max; integrated analytically when nonzero
  double tail_amp = 0.0;
  double gamma = 0.0;
};

// The weight is characterized by w(xi) = sqrt(2 pi) What(xi) = -i/xi for |xi| >= gamma.
// Inside the gap it is interpolated oddly: "linear" -i xi/gamma^2 or
// "cubic" -i (2 xi/gamma^2 - xi^3/gamma^4), which is C^1 at the gap edge.
struct FilterFunction {
  enum class Interp { Linear, Cubic };

  double gamma = 1.0;
  Interp interp = Interp::Linear;
  std::optional<TimeKernel> kernel;

  explicit FilterFunction(double gamma_, Interp interp_ = Interp::Linear);

  cplx freq_profile(double xi) const;  // What(xi)
  cplx weight(double xi) const;        // sqrt(2 pi) What(xi)
  double time_kernel(double t) const;  // exact W(t)

  // attach sampled W on [0, t_max] with step dt
  FilterFunction& with_time_kernel(double t_max, double dt);
};

FilterFunction::Interp parse_interp(const std::string& name);

// (I(A))_mn = w(E_n - E_m) A_mn in the eigenbasis
Mat apply_filter_map(const SpectralData& spec, const Mat& a, const FilterFunction& w);

struct TimeDomainResult {
  Mat value;
  double error_bound = 0.0;  // tail cutoff plus quadrature step estimate
};

// Quadrature of int W(t) e^{iHt} A e^{-iHt} dt over [-t_max, t_max].
TimeDomainResult apply_filter_timedomain(const Mat& h, const Mat& a, const FilterFunction& w);

// K_s = I_s(dH/ds); throws GapError if the patch gap at s is below w.gamma
Mat spectral_flow_generator(const HamiltonianPath& path, double s, const Selector& sel, const FilterFunction& w);

// P A (1-P) + (1-P) A P
Mat offdiagonal_part(const Mat& a, const Mat& p);

}  // namespace adiaspec
