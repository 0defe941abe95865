#include "adiaspec/interactions.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

namespace adiaspec {

void Interaction::add(const LocalOperator& term) {
  auto it = terms_.find(term.support);
  if (it == terms_.end()) {
    terms_.emplace(term.support, term);
    return;
  }
  if (it->second.dims != term.dims) throw DomainError("local dimension mismatch between terms");
  it->second.matrix += term.matrix;
}

Interaction Interaction::scaled(cplx c) const {
  Interaction out = *this;
  for (auto& [k, t] : out.terms_) t.matrix *= c;
  return out;
}

Interaction& Interaction::operator+=(const Interaction& other) {
  for (const auto& [k, t] : other.terms_) add(t);
  return *this;
}

int Interaction::range(const Lattice& lat) const {
  int r = 0;
  for (const auto& [sup, t] : terms_) {
    if (t.matrix.cwiseAbs().maxCoeff() == 0.0) continue;
    r = std::max(r, set_diameter(lat, sup));
  }
  return r;
}

bool Interaction::is_hermitian(double tol) const {
  for (const auto& [sup, t] : terms_)
    if (!adiaspec::is_hermitian(t.matrix, tol)) return false;
  return true;
}

Mat assemble_hamiltonian(const Interaction& phi, const Volume& vol) {
  if (vol.dim() > kMaxDenseDim) throw DomainError("dense dimension exceeds the limit");
  return Mat(assemble_sparse(phi, vol));
}

SpMat assemble_sparse(const Interaction& phi, const Volume& vol) {
  SpMat h(vol.dim(), vol.dim());
  for (const auto& [sup, t] : phi.terms()) h += embed_sparse(t, vol);
  h.prune(cplx(0.0));
  return h;
}

Interaction commutator_interaction(const Interaction& phi_h, const Interaction& phi_g) {
  Interaction out;
  for (const auto& [x, a] : phi_h.terms()) {
    for (const auto& [y, b] : phi_g.terms()) {
      bool meet = false;
      for (int s : x)
        if (std::binary_search(y.begin(), y.end(), s)) {
          meet = true;
          break;
        }
      if (!meet) continue;
      out.add(commutator_local(a, b));
    }
  }
  return out;
}

double interaction_norm(const Interaction& phi, const DecayProfile& prof, int n, const Lattice& lat) {
  if (n < 0) throw DomainError("norm index must be nonnegative");
  const int sz = lat.size();
  std::vector<double> acc(static_cast<std::size_t>(sz) * sz, 0.0);
  for (const auto& [sup, t] : phi.terms()) {
    const double w = std::pow(static_cast<double>(sup.size()), n) * op_norm(t.matrix);
    if (w == 0.0) continue;
    std::vector<int> idx;
    for (int s : sup) idx.push_back(lat.index_of(s));
    for (int i : idx)
      for (int j : idx) acc[static_cast<std::size_t>(i) * sz + j] += w;
  }
  double best = 0.0;
  for (int i = 0; i < sz; ++i)
    for (int j = 0; j < sz; ++j) {
      double v = acc[static_cast<std::size_t>(i) * sz + j];
      if (v > 0) best = std::max(best, v / prof.f_zeta(lat.dist_idx(i, j)));
    }
  return best;
}

// ---- shapes ----

namespace {

void gsl_quiet() {
  static std::once_flag flag;
  std::call_once(flag, [] { gsl_set_error_handler_off(); });
}

double bump(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return std::exp(-1.0 / (u * (1.0 - u)));
}

double bump_integral(double a, double b) {
  gsl_quiet();
  gsl_integration_workspace* ws = gsl_integration_workspace_alloc(200);
  gsl_function fn;
  fn.function = [](double u, void*) { return bump(u); };
  fn.params = nullptr;
  double result = 0, err = 0;
  int status = gsl_integration_qag(&fn, a, b, 1e-17, 1e-13, 200, GSL_INTEG_GAUSS61, ws, &result, &err);
  gsl_integration_workspace_free(ws);
  if (status != GSL_SUCCESS && err > 1e-14) throw NumericalError("bump quadrature did not converge");
  return result;
}

// normalized integral of the bump, with flat extension outside [0,1]
double bump_cdf(double s) {
  static const double total = bump_integral(0.0, 1.0);
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  if (s > 0.5) return 1.0 - bump_integral(s, 1.0) / total;
  return bump_integral(0.0, s) / total;
}

Jet bump_cdf_jet(double s, int order) {
  static const double total = bump_integral(0.0, 1.0);
  Jet out(order, bump_cdf(s));
  if (order == 0) return out;
  const double u = s;
  if (u <= 0.0 || u >= 1.0 || u * (1.0 - u) <= 1e-3) return out;  // exp(-1000) underflows anyway
  Jet x = Jet::variable(order - 1, u);
  Jet q = x * (1.0 + (-1.0 * x));
  Jet b = exp(-reciprocal(q));
  for (int k = 1; k <= order; ++k) out.coeff(k) = b.coeff(k - 1) / (k * total);
  return out;
}

class ConstantShape : public Shape {
 public:
  Jet jet(double, int order) const override { return Jet(order, 0.0); }
  bool flat_at_0() const override { return true; }
  bool flat_at_1() const override { return true; }
  std::string name() const override { return "constant"; }
};

class PowerShape : public Shape {
 public:
  explicit PowerShape(int p) : p_(p) {}
  Jet jet(double s, int order) const override {
    Jet x = Jet::variable(order, s);
    Jet r(order, 1.0);
    for (int i = 0; i < p_; ++i) r = r * x;
    return r;
  }
  std::string name() const override { return p_ == 1 ? "linear" : p_ == 2 ? "quadratic" : "cubic"; }

 private:
  int p_;
};

class BumpShape : public Shape {
 public:
  Jet jet(double s, int order) const override { return bump_cdf_jet(s, order); }
  bool flat_at_0() const override { return true; }
  bool flat_at_1() const override { return true; }
  std::string name() const override { return "bump"; }
};

// 2 B(s/2): flat start, nonzero slope at s = 1
class SmoothStartShape : public Shape {
 public:
  Jet jet(double s, int order) const override {
    Jet j = bump_cdf_jet(0.5 * s, order);
    double scale = 2.0;
    for (int k = 0; k <= order; ++k) {
      j.coeff(k) *= scale;
      scale *= 0.5;
    }
    return j;
  }
  bool flat_at_0() const override { return true; }
  std::string name() const override { return "smoothstart"; }
};

}  // namespace

std::shared_ptr<const Shape> make_shape(const std::string& name) {
  if (name == "constant") return std::make_shared<ConstantShape>();
  if (name == "linear") return std::make_shared<PowerShape>(1);
  if (name == "quadratic") return std::make_shared<PowerShape>(2);
  if (name == "cubic") return std::make_shared<PowerShape>(3);
  if (name == "bump" || name == "smoothstep") return std::make_shared<BumpShape>();
  if (name == "smoothstart") return std::make_shared<SmoothStartShape>();
  throw ConfigError("unknown schedule shape '" + name + "'");
}

// ---- schedules ----

void Schedule::check_args(double s, int k) const {
  if (!(s >= -kScheduleMargin && s <= 1.0 + kScheduleMargin)) {
    std::ostringstream os;
    os << "schedule parameter s=" << s << " outside [0,1]";
    throw DomainError(os.str());
  }
  if (k < 0 || k > smoothness()) {
    throw DomainError("derivative order " + std::to_string(k) + " beyond available smoothness " +
                      std::to_string(smoothness()));
  }
}

Interaction Schedule::eval(double s, int k) const {
  check_args(s, k);
  return eval_unchecked(s, k);
}

std::vector<double> Schedule::coefficients(double, int) const {
  throw DomainError("schedule has no linear decomposition");
}

ParametricSchedule::ParametricSchedule(std::shared_ptr<const Shape> shape, std::vector<Coefficient> coeffs,
                                       std::vector<Interaction> parts, std::string name)
    : shape_(std::move(shape)), coeffs_(std::move(coeffs)), parts_(std::move(parts)), name_(std::move(name)) {
  if (coeffs_.size() != parts_.size()) throw DomainError("one coefficient per part required");
  for (const auto& p : parts_)
    if (!p.is_hermitian(1e-12)) throw DomainError("schedule parts must be Hermitian");
}

std::vector<double> ParametricSchedule::coefficients(double s, int k) const {
  check_args(s, k);
  Jet th = shape_->jet(s, k);
  std::vector<double> out;
  for (const auto& c : coeffs_) out.push_back(c(th).derivative(k));
  return out;
}

Interaction ParametricSchedule::eval_unchecked(double s, int k) const {
  Jet th = shape_->jet(s, k);
  Interaction out;
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    double c = coeffs_[i](th).derivative(k);
    // keep the supports even when the coefficient vanishes
    out += parts_[i].scaled(c);
  }
  return out;
}

FunctionSchedule::FunctionSchedule(std::function<Interaction(double)> fn, double step, std::string name)
    : fn_(std::move(fn)), h_(step), name_(std::move(name)) {
  if (!(step > 0)) throw DomainError("finite-difference step must be positive");
}

Interaction FunctionSchedule::eval_unchecked(double s, int k) const {
  if (k == 0) return fn_(s);
  const double h = h_;
  auto f = [&](int m) { return fn_(s + m * h); };
  if (k == 1) {
    return f(-2).scaled(1.0 / (12 * h)) + f(-1).scaled(-8.0 / (12 * h)) + f(1).scaled(8.0 / (12 * h)) +
           f(2).scaled(-1.0 / (12 * h));
  }
  const double h2 = 12 * h * h;
  return f(-2).scaled(-1.0 / h2) + f(-1).scaled(16.0 / h2) + f(0).scaled(-30.0 / h2) + f(1).scaled(16.0 / h2) +
         f(2).scaled(-1.0 / h2);
}

std::shared_ptr<Schedule> constant_schedule(const Interaction& phi) {
  return std::make_shared<ParametricSchedule>(
      make_shape("constant"), std::vector<ParametricSchedule::Coefficient>{[](const Jet& t) { return Jet(t.order(), 1.0); }},
      std::vector<Interaction>{phi}, "constant");
}

Interaction tfim_coupling(const Lattice& lat) {
  Interaction phi;
  for (auto [a, b] : lat.edges()) {
    LocalOperator t = product_op({{a, pauli::z()}, {b, pauli::z()}});
    t.matrix *= -1.0;
    phi.add(t);
  }
  return phi;
}

Interaction field(const Lattice& lat, const Mat& single_site, double coeff) {
  Interaction phi;
  for (int s : lat.sites()) phi.add(LocalOperator({s}, coeff * single_site, {static_cast<int>(single_site.rows())}));
  return phi;
}

namespace {

std::vector<double> parse_params(const std::string& model, std::size_t count) {
  std::vector<double> out;
  std::stringstream ss(model);
  std::string tok;
  std::getline(ss, tok, ':');
  while (std::getline(ss, tok, ':')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + tok + "' in model '" + model + "'");
    }
  }
  if (out.size() != count) throw ConfigError("model '" + model + "' expects " + std::to_string(count) + " parameters");
  return out;
}

Jet affine(const Jet& th, double a, double b) { return a + (b - a) * th; }

Mat parse_matrix(const nlohmann::json& m, int dim) {
  auto entry = [](const nlohmann::json& e) -> cplx {
    if (e.is_number()) return {e.get<double>(), 0.0};
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) return {e[0].get<double>(), e[1].get<double>()};
    throw ConfigError("matrix entry must be a number or [re, im]");
  };
  if (!m.is_array()) throw ConfigError("matrix must be an array");
  Mat out(dim, dim);
  const std::size_t n = static_cast<std::size_t>(dim);
  // rows of entries, or a flat row-major list of n*n entries
  const bool rows = m.size() == n && m[0].is_array() && m[0].size() == n && !(n == 1 && m[0].size() == 2);
  if (rows) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!m[i].is_array() || m[i].size() != n) throw ConfigError("matrix row has the wrong length");
      for (std::size_t j = 0; j < n; ++j) out(i, j) = entry(m[i][j]);
    }
    return out;
  }
  if (m.size() != n * n) throw ConfigError("matrix has the wrong number of entries");
  for (std::size_t i = 0; i < n * n; ++i) out(i / n, i % n) = entry(m[i]);
  return out;
}

}  // namespace

Interaction interaction_from_json(const nlohmann::json& terms) {
  if (!terms.is_array()) throw ConfigError("terms must be an array");
  Interaction phi;
  try {
    for (const auto& t : terms) {
      auto sup = t.at("support").get<std::vector<int>>();
      std::vector<int> dims = t.contains("dims") ? t.at("dims").get<std::vector<int>>() : std::vector<int>(sup.size(), 2);
      if (dims.size() != sup.size()) throw ConfigError("dims must match support");
      int dim = 1;
      for (int d : dims) dim *= d;
      Mat m = parse_matrix(t.at("matrix"), dim);
      if (!is_hermitian(m, 1e-12)) throw ConfigError("custom term is not Hermitian");
      phi.add(LocalOperator(sup, m, dims));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("custom terms: ") + ex.what());
  } catch (const DomainError& ex) {
    throw ConfigError(std::string("custom terms: ") + ex.what());
  }
  return phi;
}

std::shared_ptr<Schedule> make_model(const std::string& model, const std::string& shape_name, const Lattice& lat,
                                     const nlohmann::json& custom) {
  using Coef = ParametricSchedule::Coefficient;
  auto shape = make_shape(shape_name);
  const std::string kind = model.substr(0, model.find(':'));
  if (kind == "tfim") {
    auto p = parse_params(model, 2);
    double g0 = p[0], g1 = p[1];
    std::vector<Coef> c{[](const Jet& t) { return Jet(t.order(), 1.0); },
                        [g0, g1](const Jet& t) { return affine(t, g0, g1); }};
    return std::make_shared<ParametricSchedule>(shape, c, std::vector<Interaction>{tfim_coupling(lat), field(lat, pauli::x(), -1.0)},
                                                model + "/" + shape_name);
  }
  if (kind == "free") {
    // H = -sum_x (cos a sigma_z + sin a sigma_x), a interpolated between the two angles
    auto p = parse_params(model, 2);
    double a0 = p[0], a1 = p[1];
    std::vector<Coef> c{[a0, a1](const Jet& t) {
                          Jet s(t.order()), co(t.order());
                          sincos(affine(t, a0, a1), s, co);
                          return co;
                        },
                        [a0, a1](const Jet& t) {
                          Jet s(t.order()), co(t.order());
                          sincos(affine(t, a0, a1), s, co);
                          return s;
                        }};
    return std::make_shared<ParametricSchedule>(shape, c,
                                                std::vector<Interaction>{field(lat, pauli::z(), -1.0), field(lat, pauli::x(), -1.0)},
                                                model + "/" + shape_name);
  }
  if (kind == "rotising") {
    // H = -sum_edges (n.sigma)(n.sigma), n = (sin a, 0, cos a): two-fold degenerate ground space
    auto p = parse_params(model, 2);
    double a0 = p[0], a1 = p[1];
    Interaction xx, zz, xz;
    for (auto [a, b] : lat.edges()) {
      xx.add(product_op({{a, pauli::x()}, {b, pauli::x()}}));
      zz.add(product_op({{a, pauli::z()}, {b, pauli::z()}}));
      LocalOperator t = product_op({{a, pauli::x()}, {b, pauli::z()}});
      t.matrix += product_op({{a, pauli::z()}, {b, pauli::x()}}).matrix;
      xz.add(t);
    }
    auto trig = [a0, a1](const Jet& t, int which) {
      Jet s(t.order()), co(t.order());
      sincos(affine(t, a0, a1), s, co);
      if (which == 0) return -1.0 * (s * s);
      if (which == 1) return -1.0 * (co * co);
      return -1.0 * (s * co);
    };
    std::vector<Coef> c{[trig](const Jet& t) { return trig(t, 0); }, [trig](const Jet& t) { return trig(t, 1); },
                        [trig](const Jet& t) { return trig(t, 2); }};
    return std::make_shared<ParametricSchedule>(shape, c, std::vector<Interaction>{xx, zz, xz}, model + "/" + shape_name);
  }
  if (kind == "custom") {
    if (custom.is_null() || !custom.contains("terms")) throw ConfigError("custom model needs a \"terms\" list");
    Interaction a = interaction_from_json(custom.at("terms"));
    for (const auto& [sup, t] : a.terms())
      for (int s : sup)
        if (!lat.contains(s)) throw ConfigError("custom term outside the lattice");
    if (!custom.contains("terms_final")) return constant_schedule(a);
    Interaction b = interaction_from_json(custom.at("terms_final"));
    std::vector<Coef> c{[](const Jet& t) { return 1.0 + (-1.0 * t); }, [](const Jet& t) { return t; }};
    return std::make_shared<ParametricSchedule>(shape, c, std::vector<Interaction>{a, b}, "custom/" + shape_name);
  }
  throw ConfigError("unknown model preset '" + model + "'");
}

HamiltonianPath::HamiltonianPath(std::shared_ptr<const Schedule> sch, Volume vol) : sch_(std::move(sch)), vol_(std::move(vol)) {
  if (!sch_) throw DomainError("null schedule");
  real_ = true;
  if (const auto* parts = sch_->components()) {
    for (const auto& p : *parts) {
      parts_.push_back(assemble_sparse(p, vol_));
      for (Eigen::Index k = 0; k < parts_.back().outerSize(); ++k)
        for (SpMat::InnerIterator it(parts_.back(), k); it; ++it)
          if (it.value().imag() != 0.0) real_ = false;
    }
  } else {
    real_ = false;
  }
}

SpMat HamiltonianPath::sparse(double s, int k) const {
  if (sch_->components()) {
    auto c = sch_->coefficients(s, k);
    SpMat h(vol_.dim(), vol_.dim());
    for (std::size_t i = 0; i < parts_.size(); ++i)
      if (c[i] != 0.0) h += c[i] * parts_[i];
    return h;
  }
  return assemble_sparse(sch_->eval(s, k), vol_);
}

Mat HamiltonianPath::dense(double s, int k) const {
  if (vol_.dim() > kMaxDenseDim) throw DomainError("dense dimension exceeds the limit");
  return Mat(sparse(s, k));
}

}  // namespace adiaspec
