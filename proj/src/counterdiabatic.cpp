#include "adiaspec/counterdiabatic.hpp"

#include <sstream>

namespace adiaspec {

namespace {

// compositions of `total` into positive parts, in lexicographic order
void compositions(int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (total == 0) {
    out.push_back(cur);
    return;
  }
  for (int first = 1; first <= total; ++first) {
    cur.push_back(first);
    compositions(total - first, cur, out);
    cur.pop_back();
  }
}

std::vector<std::vector<int>> compositions(int total) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  compositions(total, cur, out);
  return out;
}

// (-i)^k / k!
cplx weight(int k) {
  static const cplx powers[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return powers[k % 4] / fact;
}

}  // namespace

DressingBuilder::DressingBuilder(const HamiltonianPath& path, FilterFunction w, Selector sel, double fd_step,
                                 double residual_tol)
    : path_(path), w_(std::move(w)), sel_(sel), h_(fd_step), tol_(residual_tol) {
  if (!(fd_step > 0)) throw DomainError("finite-difference step must be positive");
}

DressingBuilder::Level& DressingBuilder::level(Cache& c, double base, int m) const {
  Level& lv = c[m];
  if (lv.ready) return lv;
  const double s = base + m * h_;
  lv.h = path_.dense(s);
  lv.spec = diagonalize(lv.h);
  lv.patch = select_patch(lv.spec, sel_);
  if (lv.patch.gap < w_.gamma) {
    std::ostringstream os;
    os << "gap " << lv.patch.gap << " at s=" << s << " is below the filter gamma " << w_.gamma;
    throw GapError(os.str());
  }
  lv.ready = true;
  return lv;
}

Mat DressingBuilder::a_dot(Cache& c, double base, int m, int j) const {
  // copies: building a neighbour may push into another level's vector and move its storage
  Mat p2 = a_op(c, base, m + 2, j);
  Mat p1 = a_op(c, base, m + 1, j);
  Mat m1 = a_op(c, base, m - 1, j);
  Mat m2 = a_op(c, base, m - 2, j);
  return (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h_);
}

const Mat& DressingBuilder::a_op(Cache& c, double base, int m, int alpha) const {
  {
    Level& lv = level(c, base, m);
    if (static_cast<int>(lv.a.size()) >= alpha) return lv.a[alpha - 1];
  }
  // lower orders first
  for (int j = static_cast<int>(level(c, base, m).a.size()) + 1; j < alpha; ++j) a_op(c, base, m, j);

  const double s = base + m * h_;
  Mat q_prev;  // Q_{alpha-1}
  if (alpha == 1) {
    Level& lv = level(c, base, m);
    Mat k = apply_filter_map(lv.spec, path_.dense(s, 1), w_);
    q_prev = -k;
  } else {
    std::vector<Mat> adot;
    for (int j = 1; j < alpha; ++j) adot.push_back(a_dot(c, base, m, j));
    Level& lv = level(c, base, m);
    q_prev = Mat::Zero(lv.h.rows(), lv.h.cols());
    for (const auto& comp : compositions(alpha - 1)) {
      Mat x = adot[comp[0] - 1];
      for (std::size_t i = 1; i < comp.size(); ++i) x = commutator(lv.a[comp[i] - 1], x);
      q_prev += cplx(0, -1) * weight(static_cast<int>(comp.size())) * x;
    }
  }

  Level& lv = level(c, base, m);
  Mat l_sum = Mat::Zero(lv.h.rows(), lv.h.cols());
  for (const auto& comp : compositions(alpha)) {
    if (comp.size() < 2) continue;
    Mat x = lv.h;
    for (int j : comp) x = commutator(lv.a[j - 1], x);
    l_sum += weight(static_cast<int>(comp.size())) * x;
  }
  Mat a = apply_filter_map(lv.spec, l_sum - q_prev, w_);
  a = 0.5 * (a + a.adjoint()).eval();

  // defining property: Q_{alpha-1} - H_alpha is block diagonal
  Mat h_alpha = cplx(0, -1) * commutator(a, lv.h) + l_sum;
  double res = op_norm(commutator(q_prev - h_alpha, lv.patch.projector));
  if (res > tol_) {
    std::ostringstream os;
    os << "dressing order " << alpha << " at s=" << s << ": residual " << res << " exceeds " << tol_;
    throw NumericalError(os.str());
  }
  lv.a.push_back(std::move(a));
  lv.residuals.push_back(res);
  return lv.a.back();
}

DressingSequence DressingBuilder::build(double s, int n, double eps) const {
  if (n < 0 || n > kMaxDressingOrder) throw DomainError("dressing order must be in 0.." + std::to_string(kMaxDressingOrder));
  if (n > path_.schedule().smoothness()) throw DomainError("dressing order exceeds the schedule smoothness");
  if (!(eps > 0)) throw DomainError("epsilon must be positive");
  Cache cache;
  DressingSequence d;
  d.order = n;
  d.epsilon = eps;
  d.s = s;
  for (int a = 1; a <= n; ++a) d.a_ops.push_back(a_op(cache, s, 0, a));
  Level& lv = level(cache, s, 0);
  d.residuals = lv.residuals;
  d.patch = lv.patch;
  d.s_sum = Mat::Zero(lv.h.rows(), lv.h.cols());
  double p = 1.0;
  for (int a = 1; a <= n; ++a) {
    p *= eps;
    d.s_sum += p * d.a_ops[a - 1];
  }
  d.u = expi_hermitian(d.s_sum);
  return d;
}

DressingSequence build_dressing(const HamiltonianPath& path, double s, int n, double eps, const FilterFunction& w,
                                const Selector& sel, double fd_step) {
  return DressingBuilder(path, w, sel, fd_step).build(s, n, eps);
}

Mat dressed_projector(const DressingSequence& d, const PatchData& p) {
  if (d.u.rows() != p.projector.rows()) throw DomainError("dressed_projector: dimension mismatch");
  Mat pi = d.u * p.projector * d.u.adjoint();
  return 0.5 * (pi + pi.adjoint());
}

double dressing_defect(const HamiltonianPath& path, double s, int n, double eps, const FilterFunction& w,
                       const Selector& sel, double h_s, double fd_step) {
  if (!(h_s > 0)) throw DomainError("defect step must be positive");
  DressingBuilder b(path, w, sel, fd_step);
  auto pi_at = [&](double x) {
    DressingSequence d = b.build(x, n, eps);
    return dressed_projector(d, d.patch);
  };
  Mat p2 = pi_at(s + 2 * h_s), p1 = pi_at(s + h_s), m1 = pi_at(s - h_s), m2 = pi_at(s - 2 * h_s);
  Mat pi0 = pi_at(s);
  Mat dpi = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h_s);
  return op_norm(cplx(0, eps) * dpi - commutator(path.dense(s), pi0));
}

}  // namespace adiaspec
