#include "adiaspec/spectral.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace adiaspec {

Selector Selector::lowest_k(int k) {
  Selector s;
  s.kind = Kind::LowestK;
  s.k = k;
  return s;
}

Selector Selector::window(double lo, double hi) {
  Selector s;
  s.kind = Kind::Window;
  s.lo = lo;
  s.hi = hi;
  return s;
}

Selector Selector::cluster(double threshold) {
  Selector s;
  s.kind = Kind::Cluster;
  s.threshold = threshold;
  return s;
}

SpectralData diagonalize(const Mat& h) {
  if (h.rows() != h.cols()) throw DomainError("diagonalize: matrix not square");
  if (h.rows() == 0) throw DomainError("diagonalize: empty matrix");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (!is_hermitian(h, 1e-10 * scale)) throw DomainError("diagonalize: matrix not Hermitian");
  SpectralData out;
  if (h.imag().cwiseAbs().maxCoeff() == 0.0) {
    RMat re = h.real();
    re = 0.5 * (re + re.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<RMat> es(re);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors().cast<cplx>();
  } else {
    Mat hh = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(hh);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    out.eigenvalues = es.eigenvalues();
    out.eigenvectors = es.eigenvectors();
  }
  return out;
}

PatchData select_patch(const SpectralData& spec, const Selector& sel) {
  const auto& e = spec.eigenvalues;
  const int n = static_cast<int>(e.size());
  int first = 0, count = 0;
  switch (sel.kind) {
    case Selector::Kind::LowestK:
      if (sel.k < 1 || sel.k > n) throw DomainError("lowest_k selection out of range");
      first = 0;
      count = sel.k;
      break;
    case Selector::Kind::Window: {
      if (!(sel.lo <= sel.hi)) throw DomainError("window bounds reversed");
      first = -1;
      for (int i = 0; i < n; ++i) {
        if (e(i) >= sel.lo && e(i) <= sel.hi) {
          if (first < 0) first = i;
          ++count;
        }
      }
      if (count == 0) throw DomainError("window selects no eigenvalue");
      break;
    }
    case Selector::Kind::Cluster: {
      double range = e(n - 1) - e(0);
      double thr = sel.threshold >= 0 ? sel.threshold : 1e-8 * (range > 0 ? range : 1.0);
      count = 1;
      while (count < n && e(count) - e(count - 1) < thr) ++count;
      break;
    }
  }
  PatchData p;
  p.first = first;
  p.count = count;
  const int last = first + count - 1;
  p.width = e(last) - e(first);
  double below = first > 0 ? e(first) - e(first - 1) : std::numeric_limits<double>::infinity();
  double above = last + 1 < n ? e(last + 1) - e(last) : std::numeric_limits<double>::infinity();
  p.gap = std::min(below, above);
  // a tie with the complement means the patch interlaces with it
  const double tol = 1e-12 * std::max(1.0, e.cwiseAbs().maxCoeff());
  if (!(p.gap > tol)) {
    std::ostringstream os;
    os << "gap assumption violated: patch [" << e(first) << ", " << e(last) << "] touches the rest of the spectrum (gap "
       << p.gap << ")";
    throw GapError(os.str());
  }
  p.basis = spec.eigenvectors.middleCols(first, count);
  p.projector = p.basis * p.basis.adjoint();
  return p;
}

std::pair<SpectralData, PatchData> diagonalize_and_patch(const Mat& h, const Selector& sel) {
  SpectralData spec = diagonalize(h);
  PatchData p = select_patch(spec, sel);
  return {std::move(spec), std::move(p)};
}

GapScan gap_along_path(const HamiltonianPath& path, const std::vector<double>& grid, const Selector& sel,
                       std::optional<double> eps) {
  if (grid.empty()) throw DomainError("empty s-grid");
  GapScan out;
  out.gamma_min = std::numeric_limits<double>::infinity();
  for (double s : grid) {
    if (s < 0.0 || s > 1.0) throw DomainError("grid point outside [0,1]");
    PatchData p;
    try {
      p = diagonalize_and_patch(path.dense(s), sel).second;
    } catch (const GapError& ex) {
      std::ostringstream os;
      os << "at s=" << s << ": " << ex.what();
      throw GapError(os.str());
    }
    out.grid.push_back(s);
    out.gaps.push_back(p.gap);
    out.widths.push_back(p.width);
    out.gamma_min = std::min(out.gamma_min, p.gap);
    out.delta_max = std::max(out.delta_max, p.width);
    out.patches.push_back(std::move(p));
  }
  if (eps) {
    if (!(*eps > 0)) throw DomainError("epsilon must be positive");
    const double sites = static_cast<double>(path.volume().sites.size());
    out.delta_bound = std::min((*eps) * (*eps), (*eps) / sites);
    out.near_degenerate = out.delta_max <= out.delta_bound;
  }
  return out;
}

}  // namespace adiaspec
