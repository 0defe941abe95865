#include "adiaspec/operators.hpp"

#include <algorithm>
#include <numeric>

namespace adiaspec {

Volume Volume::qubits(std::vector<int> sites) {
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) throw DomainError("duplicate site in volume");
  Volume v;
  v.dims.assign(sites.size(), 2);
  v.sites = std::move(sites);
  return v;
}

Volume Volume::of(const Lattice& lat, int local_dim) {
  if (local_dim < 1) throw DomainError("local dimension must be positive");
  Volume v;
  v.sites = lat.sites();
  v.dims.assign(v.sites.size(), local_dim);
  return v;
}

Eigen::Index Volume::dim() const {
  Eigen::Index d = 1;
  for (int x : dims) d *= x;
  return d;
}

int Volume::position(int site) const {
  auto it = std::lower_bound(sites.begin(), sites.end(), site);
  if (it == sites.end() || *it != site) return -1;
  return static_cast<int>(it - sites.begin());
}

int Volume::local_dim(int site) const {
  int p = position(site);
  if (p < 0) throw DomainError("site " + std::to_string(site) + " not in volume");
  return dims[p];
}

namespace {

Eigen::Index product(const std::vector<int>& d) {
  Eigen::Index p = 1;
  for (int x : d) p *= x;
  return p;
}

// Splits each full index into (index on the chosen positions, index on the rest).
// full_of[r * sub_dim + a] is the full index with sub-digits a and rest-digits r.
struct Split {
  Eigen::Index sub_dim = 1, rest_dim = 1;
  std::vector<Eigen::Index> full_of;
};

Split split_indices(const std::vector<int>& dims, const std::vector<bool>& chosen) {
  Split sp;
  for (std::size_t k = 0; k < dims.size(); ++k) (chosen[k] ? sp.sub_dim : sp.rest_dim) *= dims[k];
  const Eigen::Index total = sp.sub_dim * sp.rest_dim;
  sp.full_of.resize(static_cast<std::size_t>(total));
  for (Eigen::Index full = 0; full < total; ++full) {
    Eigen::Index rem = full, a = 0, r = 0, amul = 1, rmul = 1;
    // least significant digit is the last site
    for (std::size_t k = dims.size(); k-- > 0;) {
      Eigen::Index digit = rem % dims[k];
      rem /= dims[k];
      if (chosen[k]) {
        a += digit * amul;
        amul *= dims[k];
      } else {
        r += digit * rmul;
        rmul *= dims[k];
      }
    }
    sp.full_of[static_cast<std::size_t>(r * sp.sub_dim + a)] = full;
  }
  return sp;
}

std::vector<bool> mark(const Volume& vol, const std::vector<int>& subset, const std::vector<int>* dims) {
  std::vector<bool> chosen(vol.sites.size(), false);
  for (std::size_t i = 0; i < subset.size(); ++i) {
    int p = vol.position(subset[i]);
    if (p < 0) throw DomainError("support site " + std::to_string(subset[i]) + " outside the volume");
    if (dims && (*dims)[i] != vol.dims[p]) throw DomainError("local dimension mismatch at site " + std::to_string(subset[i]));
    chosen[p] = true;
  }
  return chosen;
}

void check_dense(Eigen::Index d) {
  if (d > kMaxDenseDim) throw DomainError("dense dimension " + std::to_string(d) + " exceeds the limit");
}

}  // namespace

LocalOperator::LocalOperator(std::vector<int> sup, Mat m, std::vector<int> d) {
  if (d.empty()) d.assign(sup.size(), 2);
  if (d.size() != sup.size()) throw DomainError("one local dimension per support site required");
  for (int x : d)
    if (x < 1) throw DomainError("local dimension must be positive");
  if (m.rows() != m.cols() || m.rows() != product(d)) throw DomainError("matrix size does not match the support dimensions");
  std::vector<std::size_t> order(sup.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sup[a] < sup[b]; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (sup[order[k]] == sup[order[k - 1]]) throw DomainError("duplicate site in support");
  }
  bool sorted = std::is_sorted(sup.begin(), sup.end());
  support.resize(sup.size());
  dims.resize(sup.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    support[k] = sup[order[k]];
    dims[k] = d[order[k]];
  }
  if (sorted) {
    matrix = std::move(m);
    return;
  }
  // old index -> new index under the factor permutation
  const Eigen::Index n = m.rows();
  std::vector<Eigen::Index> to_new(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> new_stride(sup.size());
  {
    Eigen::Index s = 1;
    for (std::size_t k = order.size(); k-- > 0;) {
      new_stride[order[k]] = s;  // stride of old factor order[k] in the new layout
      s *= d[order[k]];
    }
  }
  for (Eigen::Index old = 0; old < n; ++old) {
    Eigen::Index rem = old, idx = 0;
    for (std::size_t k = sup.size(); k-- > 0;) {
      idx += (rem % d[k]) * new_stride[k];
      rem /= d[k];
    }
    to_new[static_cast<std::size_t>(old)] = idx;
  }
  matrix = Mat(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) matrix(to_new[i], to_new[j]) = m(i, j);
}

namespace pauli {
Mat id() { return Mat::Identity(2, 2); }
Mat x() {
  Mat m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
Mat y() {
  Mat m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
Mat z() {
  Mat m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}
}  // namespace pauli

LocalOperator product_op(const std::map<int, Mat>& factors) {
  std::vector<int> sup, dims;
  Mat m = Mat::Identity(1, 1);
  for (const auto& [site, f] : factors) {  // std::map iterates in ascending site order
    if (f.rows() != f.cols()) throw DomainError("single-site factor must be square");
    sup.push_back(site);
    dims.push_back(static_cast<int>(f.rows()));
    Mat k(m.rows() * f.rows(), m.cols() * f.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) k.block(i * f.rows(), j * f.cols(), f.rows(), f.cols()) = m(i, j) * f;
    m = std::move(k);
  }
  return LocalOperator(sup, m, dims);
}

Mat embed(const LocalOperator& op, const Volume& vol) {
  check_dense(vol.dim());
  auto chosen = mark(vol, op.support, &op.dims);
  Split sp = split_indices(vol.dims, chosen);
  Mat out = Mat::Zero(vol.dim(), vol.dim());
  for (Eigen::Index r = 0; r < sp.rest_dim; ++r) {
    const Eigen::Index* base = &sp.full_of[static_cast<std::size_t>(r * sp.sub_dim)];
    for (Eigen::Index b = 0; b < sp.sub_dim; ++b)
      for (Eigen::Index a = 0; a < sp.sub_dim; ++a) out(base[a], base[b]) = op.matrix(a, b);
  }
  return out;
}

SpMat embed_sparse(const LocalOperator& op, const Volume& vol) {
  auto chosen = mark(vol, op.support, &op.dims);
  Split sp = split_indices(vol.dims, chosen);
  std::vector<Eigen::Triplet<cplx>> trips;
  for (Eigen::Index r = 0; r < sp.rest_dim; ++r) {
    const Eigen::Index* base = &sp.full_of[static_cast<std::size_t>(r * sp.sub_dim)];
    for (Eigen::Index b = 0; b < sp.sub_dim; ++b)
      for (Eigen::Index a = 0; a < sp.sub_dim; ++a)
        if (op.matrix(a, b) != cplx(0)) trips.emplace_back(base[a], base[b], op.matrix(a, b));
  }
  SpMat out(vol.dim(), vol.dim());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

LocalOperator conditional_expectation(const Mat& full, const Volume& vol, std::vector<int> y) {
  if (full.rows() != vol.dim() || full.cols() != vol.dim()) throw DomainError("operator does not match the volume");
  std::sort(y.begin(), y.end());
  y.erase(std::unique(y.begin(), y.end()), y.end());
  auto chosen = mark(vol, y, nullptr);
  std::vector<int> dims;
  for (int s : y) dims.push_back(vol.local_dim(s));
  Split sp = split_indices(vol.dims, chosen);
  Mat out = Mat::Zero(sp.sub_dim, sp.sub_dim);
  for (Eigen::Index r = 0; r < sp.rest_dim; ++r) {
    const Eigen::Index* base = &sp.full_of[static_cast<std::size_t>(r * sp.sub_dim)];
    for (Eigen::Index b = 0; b < sp.sub_dim; ++b)
      for (Eigen::Index a = 0; a < sp.sub_dim; ++a) out(a, b) += full(base[a], base[b]);
  }
  out /= static_cast<double>(sp.rest_dim);
  return LocalOperator(y, out, dims);
}

LocalOperator extend_support(const LocalOperator& op, const std::vector<int>& sites, const std::vector<int>& dims) {
  Volume v{sites, dims};
  if (!std::is_sorted(sites.begin(), sites.end())) throw DomainError("extend_support expects sorted sites");
  return LocalOperator(sites, embed(op, v), dims);
}

LocalOperator commutator_local(const LocalOperator& a, const LocalOperator& b) {
  std::map<int, int> dim_of;
  for (std::size_t k = 0; k < a.support.size(); ++k) dim_of[a.support[k]] = a.dims[k];
  bool overlap = false;
  for (std::size_t k = 0; k < b.support.size(); ++k) {
    auto it = dim_of.find(b.support[k]);
    if (it != dim_of.end()) {
      if (it->second != b.dims[k]) throw DomainError("local dimension mismatch at site " + std::to_string(b.support[k]));
      overlap = true;
    } else {
      dim_of[b.support[k]] = b.dims[k];
    }
  }
  std::vector<int> sites, dims;
  for (auto [s, d] : dim_of) {
    sites.push_back(s);
    dims.push_back(d);
  }
  const Eigen::Index n = product(dims);
  if (!overlap) return LocalOperator(sites, Mat::Zero(n, n), dims);
  check_dense(n);
  Volume v{sites, dims};
  Mat ea = embed(a, v), eb = embed(b, v);
  return LocalOperator(sites, commutator(ea, eb), dims);
}

std::vector<LocalOperator> delta_decomposition(const Mat& evolved, const Volume& vol,
                                               const std::vector<int>& x_support, const Lattice& lat) {
  if (x_support.empty()) throw DomainError("delta decomposition needs a nonempty region");
  for (int s : vol.sites)
    if (!lat.contains(s)) throw DomainError("volume site " + std::to_string(s) + " not on the lattice");
  std::vector<LocalOperator> out;
  LocalOperator prev;
  for (int n = 0;; ++n) {
    std::vector<int> xn;
    for (int s : fattening(lat, x_support, n))
      if (vol.contains(s)) xn.push_back(s);
    LocalOperator en = conditional_expectation(evolved, vol, xn);
    if (n == 0) {
      out.push_back(en);
    } else {
      LocalOperator lifted = extend_support(prev, en.support, en.dims);
      out.emplace_back(en.support, en.matrix - lifted.matrix, en.dims);
    }
    const bool done = xn.size() == vol.sites.size();
    prev = std::move(en);
    if (done) break;
  }
  return out;
}

}  // namespace adiaspec
