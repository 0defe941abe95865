#include "adiaspec/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace adiaspec {

Integrator parse_integrator(const std::string& name) {
  if (name == "magnus4") return Integrator::Magnus4;
  if (name == "midpoint") return Integrator::Midpoint;
  throw ConfigError("unknown integrator '" + name + "'");
}

std::string integrator_name(Integrator m) { return m == Integrator::Magnus4 ? "magnus4" : "midpoint"; }

double default_step(double eps) { return std::min(eps / 10.0, 1e-3); }

namespace {

// max absolute row sum: an upper bound for the spectral norm of a Hermitian matrix
double row_sum_bound(const SpMat& h) {
  RVec rows = RVec::Zero(h.rows());
  for (Eigen::Index k = 0; k < h.outerSize(); ++k)
    for (SpMat::InnerIterator it(h, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

// x <- exp(Omega) x given y -> Omega y and a bound on ||Omega||
template <class Apply>
void taylor_expv(Apply&& apply, Mat& x, double bound) {
  const int sub = std::max(1, static_cast<int>(std::ceil(bound / 0.5)));
  for (int j = 0; j < sub; ++j) {
    Mat term = x;
    Mat acc = x;
    for (int k = 1; k <= 60; ++k) {
      term = apply(term) / (static_cast<double>(sub) * k);
      acc += term;
      if (term.norm() <= 1e-17 * acc.norm()) break;
    }
    x = std::move(acc);
  }
}

Mat frame_of_projector(const Mat& p) {
  const double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  if (p.rows() != p.cols() || !is_hermitian(p, 1e-10 * scale)) throw DomainError("initial projector is not Hermitian");
  if ((p * p - p).cwiseAbs().maxCoeff() > 1e-10) throw DomainError("initial projector is not idempotent");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (p + p.adjoint()));
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    if (es.eigenvalues()(i) > 0.5) cols.push_back(i);
  if (cols.empty()) throw DomainError("initial projector is zero");
  Mat f(p.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) f.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(cols[j]);
  return f;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("empty s-grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("s-grid must be strictly ascending");
}

SparsePath sparse_path(const HamiltonianPath& path) {
  return [&path](double s) { return path.sparse(s); };
}

}  // namespace

void propagate(const SparsePath& h, Mat& frame, double s0, double s1, double eps, double max_step, Integrator method) {
  if (!(eps > 0)) throw DomainError("epsilon must be positive");
  if (!(max_step > 0)) throw DomainError("step must be positive");
  if (s1 == s0) return;
  const long n = std::max(1L, static_cast<long>(std::ceil((s1 - s0) / max_step - 1e-9)));
  const double ds = (s1 - s0) / static_cast<double>(n);
  const double c = std::sqrt(3.0) / 6.0;
  for (long k = 0; k < n; ++k) {
    const double s = s0 + ds * static_cast<double>(k);
    if (method == Integrator::Midpoint) {
      SpMat hm = h(s + 0.5 * ds);
      const cplx f(0.0, -ds / eps);
      taylor_expv([&](const Mat& y) -> Mat { return f * (hm * y); }, frame, std::abs(f) * row_sum_bound(hm));
      continue;
    }
    SpMat h1 = h(s + ds * (0.5 - c));
    SpMat h2 = h(s + ds * (0.5 + c));
    // Omega = -i ds/(2 eps) (H1 + H2) - sqrt(3) ds^2 / (12 eps^2) [H2, H1]
    const cplx f1(0.0, -ds / (2.0 * eps));
    const double f2 = -std::sqrt(3.0) * ds * ds / (12.0 * eps * eps);
    const double b1 = row_sum_bound(h1), b2 = row_sum_bound(h2);
    const double bound = std::abs(f1) * (b1 + b2) + 2.0 * std::abs(f2) * b1 * b2;
    taylor_expv(
        [&](const Mat& y) -> Mat {
          Mat a = h1 * y;
          Mat b = h2 * y;
          Mat out = f1 * (a + b);
          out += f2 * (h2 * a - h1 * b);
          return out;
        },
        frame, bound);
  }
}

double Trajectory::expectation(std::size_t i, const Mat& o) const {
  const Mat& f = frames.at(i);
  return (f.adjoint() * o * f).trace().real() / static_cast<double>(f.cols());
}

double Trajectory::expectation(std::size_t i, const SpMat& o) const {
  const Mat& f = frames.at(i);
  return (f.adjoint() * (o * f)).trace().real() / static_cast<double>(f.cols());
}

Trajectory evolve_state(const HamiltonianPath& path, double eps, const Vec& psi0, const std::vector<double>& grid,
                        const EvolveOptions& opt, const std::optional<DressedMode>& dressed) {
  check_grid(grid);
  if (!(eps > 0)) throw DomainError("epsilon must be positive");
  if (psi0.size() != path.dim()) throw DomainError("initial state has the wrong dimension");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw DomainError("initial state is not normalized");
  Trajectory tr;
  tr.grid = grid;
  tr.epsilon = eps;
  tr.step = opt.max_step > 0 ? opt.max_step : default_step(eps);

  if (dressed) {
    tr.method = "dressed" + std::to_string(dressed->order);
    DressingBuilder b(path, dressed->filter, dressed->selector, dressed->fd_step);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      DressingSequence d = b.build(grid[i], dressed->order, eps);
      if (i == 0) {
        Vec out = psi0 - d.patch.projector * psi0;
        if (out.norm() > 1e-8) throw DomainError("initial state is not in the selected patch");
      }
      tr.frames.push_back(d.u * d.patch.basis);
    }
    return tr;
  }

  tr.method = integrator_name(opt.method);
  Mat frame = psi0;
  tr.frames.push_back(frame);
  auto h = sparse_path(path);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    propagate(h, frame, grid[i - 1], grid[i], eps, tr.step, opt.method);
    tr.frames.push_back(frame);
  }
  return tr;
}

Trajectory evolve_projector(const HamiltonianPath& path, double eps, const Mat& p0, const std::vector<double>& grid,
                            const EvolveOptions& opt) {
  check_grid(grid);
  if (!(eps > 0)) throw DomainError("epsilon must be positive");
  if (p0.rows() != path.dim()) throw DomainError("initial projector has the wrong dimension");
  Mat frame = frame_of_projector(p0);
  Trajectory tr;
  tr.grid = grid;
  tr.epsilon = eps;
  tr.step = opt.max_step > 0 ? opt.max_step : default_step(eps);
  tr.method = integrator_name(opt.method);
  tr.frames.push_back(frame);
  auto h = sparse_path(path);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    propagate(h, frame, grid[i - 1], grid[i], eps, tr.step, opt.method);
    tr.frames.push_back(frame);
  }
  return tr;
}

Trajectory parallel_transport(const std::vector<double>& grid, const std::vector<Mat>& projectors, const Vec& psi0) {
  check_grid(grid);
  if (projectors.size() != grid.size()) throw DomainError("one projector per grid point required");
  const Mat& p0 = projectors.front();
  if (psi0.size() != p0.rows()) throw DomainError("initial state has the wrong dimension");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw DomainError("initial state is not normalized");
  if ((psi0 - p0 * psi0).norm() > 1e-10) throw DomainError("initial state is not in Ran P_0");
  Trajectory tr;
  tr.grid = grid;
  tr.method = "transport";
  Mat omega = psi0;
  tr.frames.push_back(omega);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    tr.step = std::max(tr.step, grid[k + 1] - grid[k]);
    const Mat pbar = 0.5 * (projectors[k] + projectors[k + 1]);
    const Mat dp = projectors[k + 1] - projectors[k];  // ds times the derivative
    // generator ds [dP/ds, P] is anti-Hermitian; exp(G) = exp(i (-iG))
    const Mat g = commutator(dp, pbar);
    omega = expi_hermitian(cplx(0, -1) * g) * omega;
    tr.frames.push_back(omega);
  }
  return tr;
}

LRProbeResult lr_probe(const Mat& h, const Volume& vol, const Lattice& lat, const LocalOperator& ox,
                       const std::vector<LocalOperator>& oys, const std::vector<double>& times, double rel_threshold,
                       int threads) {
  if (h.rows() != vol.dim()) throw DomainError("Hamiltonian does not match the volume");
  if (!(rel_threshold > 0)) throw DomainError("threshold must be positive");
  LRProbeResult out;
  out.times = times;
  SpectralData spec = diagonalize(h);
  const Mat& v = spec.eigenvectors;
  const Mat ox_eig = v.adjoint() * embed(ox, vol) * v;
  const double nx = op_norm(ox.matrix);
  const Eigen::Index n = h.rows();

  out.distances.resize(oys.size());
  out.norms.assign(oys.size(), std::vector<double>(times.size(), 0.0));
  std::vector<SpMat> oy_full;
  std::vector<double> ny;
  for (std::size_t j = 0; j < oys.size(); ++j) {
    out.distances[j] = set_distance(lat, ox.support, oys[j].support);
    oy_full.push_back(embed_sparse(oys[j], vol));
    ny.push_back(op_norm(oys[j].matrix));
  }

  const std::size_t jobs = oys.size() * times.size();
  parallel_for(jobs, threads, [&](std::size_t job) {
    const std::size_t j = job / times.size(), it = job % times.size();
    const double t = times[it];
    // tau_t(O_x) in the eigenbasis: phases e^{i(E_m - E_n) t}
    Vec ph(n);
    for (Eigen::Index m = 0; m < n; ++m) ph(m) = std::polar(1.0, spec.eigenvalues(m) * t);
    const Mat tau = ph.asDiagonal() * ox_eig * ph.conjugate().asDiagonal();
    const SpMat& oy = oy_full[j];
    auto apply_tau = [&](const Vec& x) -> Vec { return v * (tau * (v.adjoint() * x)); };
    // i [tau, O_y] is Hermitian
    double nrm = hermitian_norm_lanczos(
        n, [&](const Vec& x) -> Vec { return cplx(0, 1) * (apply_tau(oy * x) - oy * apply_tau(x)); }, 80, 1e-10);
    out.norms[j][it] = nrm;
  });

  out.crossing_times.assign(oys.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> tx, dy;
  double thr_max = 0.0;
  for (std::size_t j = 0; j < oys.size(); ++j) {
    const double thr = rel_threshold * 2.0 * nx * ny[j];
    thr_max = std::max(thr_max, thr);
    for (std::size_t it = 0; it < times.size(); ++it) {
      if (out.norms[j][it] > thr) {
        out.crossing_times[j] = times[it];
        tx.push_back(times[it]);
        dy.push_back(out.distances[j]);
        break;
      }
    }
  }
  out.threshold = thr_max;
  if (tx.size() >= 2 && *std::max_element(tx.begin(), tx.end()) > *std::min_element(tx.begin(), tx.end())) {
    LineFit f = fit_line(tx, dy);
    out.velocity = f.slope;
    out.intercept = f.intercept;
    out.fit_residual = f.residual;
  }
  return out;
}

}  // namespace adiaspec
