#include "adiaspec/filter.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_expint.h>

namespace adiaspec {

namespace {

double sine_integral(double x) {
  static std::once_flag flag;
  std::call_once(flag, [] { gsl_set_error_handler_off(); });
  gsl_sf_result r;
  if (gsl_sf_Si_e(x, &r) != GSL_SUCCESS) throw NumericalError("sine integral evaluation failed");
  return r.val;
}

// M_k(t) = int_0^gamma xi^k sin(xi t) d xi, k in {1, 3}
double sin_moment(int k, double gamma, double t) {
  const double x = gamma * t;
  if (x < 2.0) {
    // alternating series, converges quickly for small x
    double sum = 0.0, term = 1.0;  // term = x^{2j+1}/(2j+1)!
    term = x;
    for (int j = 0; j < 40; ++j) {
      if (j > 0) term *= -x * x / ((2.0 * j) * (2.0 * j + 1.0));
      double add = term / (k + 2.0 * j + 2.0);
      sum += add;
      if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return std::pow(gamma, k + 1) * sum;
  }
  const double s = std::sin(x), c = std::cos(x);
  if (k == 1) return (s - x * c) / (t * t);
  return (-x * x * x * c + 3 * x * x * s + 6 * x * c - 6 * s) / (t * t * t * t);
}

}  // namespace

FilterFunction::FilterFunction(double gamma_, Interp interp_) : gamma(gamma_), interp(interp_) {
  if (!(gamma_ > 0) || !std::isfinite(gamma_)) throw DomainError("filter gamma must be positive");
}

FilterFunction::Interp parse_interp(const std::string& name) {
  if (name == "linear") return FilterFunction::Interp::Linear;
  if (name == "cubic") return FilterFunction::Interp::Cubic;
  throw ConfigError("unknown filter interpolation '" + name + "'");
}

cplx FilterFunction::weight(double xi) const {
  if (std::abs(xi) >= gamma) return {0.0, -1.0 / xi};
  const double u = xi / gamma;
  if (interp == Interp::Linear) return {0.0, -u / gamma};
  return {0.0, -(2.0 * u - u * u * u) / gamma};
}

cplx FilterFunction::freq_profile(double xi) const { return weight(xi) / std::sqrt(2.0 * std::numbers::pi); }

double FilterFunction::time_kernel(double t) const {
  if (t == 0.0) return 0.0;  // odd kernel; one-sided limits are +-1/2
  if (t < 0.0) return -time_kernel(-t);
  const double g = gamma;
  double inside;
  if (interp == Interp::Linear) {
    inside = sin_moment(1, g, t) / (g * g);
  } else {
    inside = 2.0 * sin_moment(1, g, t) / (g * g) - sin_moment(3, g, t) / (g * g * g * g);
  }
  return (inside + std::numbers::pi / 2 - sine_integral(g * t)) / std::numbers::pi;
}

FilterFunction& FilterFunction::with_time_kernel(double t_max, double dt) {
  if (!(t_max > 0) || !(dt > 0) || dt > t_max) throw DomainError("time kernel needs 0 < dt <= t_max");
  TimeKernel k;
  long n = static_cast<long>(std::ceil(t_max / dt));
  if (n % 2) ++n;  // Simpson needs an even count
  k.dt = t_max / static_cast<double>(n);
  k.t_max = t_max;
  k.samples.resize(static_cast<std::size_t>(n) + 1);
  k.samples[0] = 0.5;
  for (long i = 1; i <= n; ++i) k.samples[static_cast<std::size_t>(i)] = time_kernel(i * k.dt);
  // Large t: W ~ (2/pi) sin(gamma t)/(gamma t)^2 - (2/pi) cos(gamma t)/(gamma^3 t^3) (linear)
  // and W ~ -(8/pi) cos(gamma t)/(gamma^3 t^3) (cubic, whose 1/t^2 term cancels).
  k.gamma = gamma;
  const double pi = std::numbers::pi;
  if (gamma * t_max >= 20.0) {
    k.tail_amp = interp == Interp::Linear ? 2.0 / (pi * gamma * gamma) : 0.0;
    const double b3 = (interp == Interp::Linear ? 2.0 : 8.0) / (pi * gamma * gamma * gamma);
    // twice the t^-3 remainder integrated from t_max, doubled again for safety
    k.tail_bound = 2.0 * b3 / (t_max * t_max);
  } else {
    k.tail_bound = 2.0 * (interp == Interp::Linear ? 2.0 : 4.0) / (pi * gamma * gamma * t_max);
  }
  kernel = std::move(k);
  return *this;
}

Mat apply_filter_map(const SpectralData& spec, const Mat& a, const FilterFunction& w) {
  const Eigen::Index n = spec.eigenvalues.size();
  if (a.rows() != n || a.cols() != n) throw DomainError("filter map: dimension mismatch");
  const Mat& v = spec.eigenvectors;
  Mat at = v.adjoint() * a * v;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) at(i, j) *= w.weight(spec.eigenvalues(j) - spec.eigenvalues(i));
  return v * at * v.adjoint();
}

TimeDomainResult apply_filter_timedomain(const Mat& h, const Mat& a, const FilterFunction& w) {
  if (!w.kernel) throw DomainError("filter has no time kernel");
  if (a.rows() != h.rows() || a.cols() != h.cols()) throw DomainError("filter map: dimension mismatch");
  const TimeKernel& k = *w.kernel;
  SpectralData spec = diagonalize(h);
  const Eigen::Index n = h.rows();
  const Mat& v = spec.eigenvectors;
  Mat at = v.adjoint() * a * v;
  const long steps = static_cast<long>(k.samples.size()) - 1;

  // Simpson weights folded into the samples once
  std::vector<double> ws(k.samples.size());
  for (long i = 0; i <= steps; ++i) {
    double c = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    ws[static_cast<std::size_t>(i)] = c * k.samples[static_cast<std::size_t>(i)] * k.dt / 3.0;
  }

  double omega_max = 0.0;
  Mat out = Mat::Zero(n, n);
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index q = m + 1; q < n; ++q) {
      const double omega = spec.eigenvalues(m) - spec.eigenvalues(q);
      omega_max = std::max(omega_max, std::abs(omega));
      if (omega == 0.0) continue;
      // int_0^T W(t) sin(omega t) dt by rotating a phasor, re-synchronized periodically
      const cplx rot = std::polar(1.0, omega * k.dt);
      cplx z(1.0, 0.0);
      double acc = 0.0;
      for (long i = 0; i <= steps; ++i) {
        if (i % 256 == 0) z = std::polar(1.0, omega * k.dt * static_cast<double>(i));
        acc += ws[static_cast<std::size_t>(i)] * z.imag();
        z *= rot;
      }
      if (k.tail_amp != 0.0) {
        // int_T^inf sin(gamma t) sin(omega t) / t^2 dt = (J(gamma - omega) - J(gamma + omega)) / 2
        auto j = [&](double b) {
          b = std::abs(b);
          return std::cos(b * k.t_max) / k.t_max - b * (std::numbers::pi / 2 - sine_integral(b * k.t_max));
        };
        acc += 0.5 * k.tail_amp * (j(k.gamma - omega) - j(k.gamma + omega));
      }
      const cplx f(0.0, 2.0 * acc);
      out(m, q) = f * at(m, q);
      out(q, m) = -f * at(q, m);  // omega -> -omega flips the sine
    }
  }
  TimeDomainResult r;
  r.value = v * out * v.adjoint();
  // Simpson remainder for a W sin(omega t) integrand with frequencies up to omega_max + gamma
  const double f4 = std::pow(omega_max + w.gamma, 4);
  const double step_err = 2.0 * k.t_max * std::pow(k.dt, 4) * f4 / 180.0;
  r.error_bound = (k.tail_bound + step_err) * a.norm();
  return r;
}

Mat spectral_flow_generator(const HamiltonianPath& path, double s, const Selector& sel, const FilterFunction& w) {
  auto [spec, patch] = diagonalize_and_patch(path.dense(s), sel);
  if (patch.gap < w.gamma) {
    std::ostringstream os;
    os << "gap " << patch.gap << " at s=" << s << " is below the filter gamma " << w.gamma;
    throw GapError(os.str());
  }
  Mat k = apply_filter_map(spec, path.dense(s, 1), w);
  return 0.5 * (k + k.adjoint());
}

Mat offdiagonal_part(const Mat& a, const Mat& p) {
  if (a.rows() != p.rows() || a.cols() != p.cols()) throw DomainError("offdiagonal_part: dimension mismatch");
  Mat q = Mat::Identity(p.rows(), p.cols()) - p;
  return p * a * q + q * a * p;
}

}  // namespace adiaspec
