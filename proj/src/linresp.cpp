#include "adiaspec/linresp.hpp"

#include <cmath>
#include <sstream>

namespace adiaspec {

void validate_setup(const ResponseSetup& setup, int sigma_points) {
  if (!(setup.epsilon > 0)) throw DomainError("epsilon must be positive");
  if (!(setup.s_trunc < 0)) throw DomainError("switch-on truncation must be negative");
  const Mat h0 = assemble_hamiltonian(setup.h_init, setup.volume);
  const Mat v = assemble_hamiltonian(setup.v, setup.volume);
  const double tail = std::exp(setup.s_trunc) * std::abs(setup.alpha) * op_norm(v);
  if (tail > 1e-10) {
    std::ostringstream os;
    os << "switch-on truncation too early: e^s alpha ||V|| = " << tail;
    throw DomainError(os.str());
  }
  for (int k = 0; k < sigma_points; ++k) {
    const double sigma = sigma_points > 1 ? static_cast<double>(k) / (sigma_points - 1) : 0.0;
    try {
      diagonalize_and_patch(h0 + sigma * setup.alpha * v, setup.selector);
    } catch (const GapError& ex) {
      std::ostringstream os;
      os << "at sigma=" << sigma << ": " << ex.what();
      throw GapError(os.str());
    }
  }
}

DrivenResponse switched_evolution(const ResponseSetup& setup) {
  validate_setup(setup);
  const Mat h0 = assemble_hamiltonian(setup.h_init, setup.volume);
  const Mat jm = embed(setup.j, setup.volume);
  auto [spec, patch] = diagonalize_and_patch(h0, setup.selector);
  DrivenResponse r;
  const double rank = static_cast<double>(patch.count);
  r.omega_ground = (jm * patch.projector).trace().real() / rank;
  if (setup.alpha == 0.0) {
    // P_0 commutes with H_init: nothing moves
    r.omega_driven = r.omega_ground;
    return r;
  }
  const SpMat h0s = assemble_sparse(setup.h_init, setup.volume);
  const SpMat vs = assemble_sparse(setup.v, setup.volume);
  const double alpha = setup.alpha;
  SparsePath h = [&](double s) -> SpMat { return h0s + (std::exp(s) * alpha) * vs; };
  Mat frame = patch.basis;
  const double step = setup.max_step > 0 ? setup.max_step : std::min(setup.epsilon / 10.0, 1e-2);
  propagate(h, frame, setup.s_trunc, 0.0, setup.epsilon, step, setup.method);
  r.omega_driven = (frame.adjoint() * jm * frame).trace().real() / rank;
  return r;
}

KuboValue kubo_commutator(const Mat& h_init, const Mat& v, const Mat& j, const FilterFunction& w, const Selector& sel) {
  if (v.rows() != h_init.rows() || j.rows() != h_init.rows()) throw DomainError("kubo: dimension mismatch");
  auto [spec, patch] = diagonalize_and_patch(h_init, sel);
  if (patch.gap < w.gamma) {
    std::ostringstream os;
    os << "gap " << patch.gap << " is below the filter gamma " << w.gamma;
    throw GapError(os.str());
  }
  const Mat k0 = apply_filter_map(spec, v, w);
  const cplx val = cplx(0, -1) * (commutator(k0, j) * patch.projector).trace() / static_cast<double>(patch.count);
  return {val.real(), val.imag()};
}

KuboValue kubo_commutator(const Interaction& h_init, const Interaction& v, const LocalOperator& j, const Volume& vol,
                          const FilterFunction& w, const Selector& sel) {
  return kubo_commutator(assemble_hamiltonian(h_init, vol), assemble_hamiltonian(v, vol), embed(j, vol), w, sel);
}

double extrapolate_to_zero(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.empty()) throw DomainError("extrapolation needs matching nonempty samples");
  std::vector<double> p(y);
  const std::size_t n = x.size();
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      const double den = x[i] - x[i + m];
      if (den == 0.0) throw DomainError("extrapolation nodes must be distinct");
      p[i] = (x[i] * p[i + 1] - x[i + m] * p[i]) / den;
    }
  }
  return p[0];
}

KuboIntegral kubo_time_integral(const Mat& h_init, const Mat& v, const Mat& j, const std::vector<double>& deltas,
                                const Selector& sel) {
  if (deltas.empty()) throw DomainError("no regularization values given");
  for (double d : deltas)
    if (!(d > 0)) throw DomainError("regularization delta must be positive");
  if (v.rows() != h_init.rows() || j.rows() != h_init.rows()) throw DomainError("kubo: dimension mismatch");
  auto [spec, patch] = diagonalize_and_patch(h_init, sel);
  const Mat& u = spec.eigenvectors;
  const Mat vt = u.adjoint() * v * u;
  const Mat jt = u.adjoint() * j * u;
  const Eigen::Index n = h_init.rows();
  const int lo = patch.first, hi = patch.first + patch.count;
  auto in_patch = [&](Eigen::Index m) { return m >= lo && m < hi; };
  // [J, P] in the eigenbasis, where P is diagonal
  Mat jp = Mat::Zero(n, n);
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < n; ++a) jp(a, b) = jt(a, b) * ((in_patch(b) ? 1.0 : 0.0) - (in_patch(a) ? 1.0 : 0.0));

  // tr(X [J,P]) with X_mn = i V_mn / (delta + i omega_mn), patch/complement pairs only
  auto evaluate = [&](double delta, bool limit) {
    cplx acc = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      for (Eigen::Index q = 0; q < n; ++q) {
        if (in_patch(m) == in_patch(q)) continue;
        const double omega = spec.eigenvalues(m) - spec.eigenvalues(q);
        const cplx x = limit ? vt(m, q) / omega : cplx(0, 1) * vt(m, q) / cplx(delta, omega);
        acc += x * jp(q, m);
      }
    }
    return acc.real() / static_cast<double>(patch.count);
  };

  KuboIntegral out;
  out.deltas = deltas;
  for (double d : deltas) out.values.push_back(evaluate(d, false));
  out.extrapolated = extrapolate_to_zero(out.deltas, out.values);
  out.exact_limit = evaluate(0.0, true);
  return out;
}

}  // namespace adiaspec
