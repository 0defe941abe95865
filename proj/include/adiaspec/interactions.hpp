#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "adiaspec/jet.hpp"
#include "adiaspec/lattice.hpp"
#include "adiaspec/operators.hpp"

namespace adiaspec {

// Finite map X -> Phi(X). Terms with the same support are merged on insertion.
class Interaction {
 public:
  void add(const LocalOperator& term);
  const std::map<std::vector<int>, LocalOperator>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Interaction scaled(cplx c) const;
  Interaction& operator+=(const Interaction& other);
  friend Interaction operator+(Interaction a, const Interaction& b) { return a += b; }

  // max diameter of a support with a nonzero term
  int range(const Lattice& lat) const;
  bool is_hermitian(double tol) const;

 private:
  std::map<std::vector<int>, LocalOperator> terms_;
};

Mat assemble_hamiltonian(const Interaction& phi, const Volume& vol);
SpMat assemble_sparse(const Interaction& phi, const Volume& vol);

// Phi_J(Z) = sum over X u Y = Z with X n Y nonempty of [Phi_H(X), Phi_G(Y)]
Interaction commutator_interaction(const Interaction& phi_h, const Interaction& phi_g);

// max over site pairs (x,y) of sum_{Z containing x,y} |Z|^n ||Phi(Z)|| / F_zeta(d(x,y))
double interaction_norm(const Interaction& phi, const DecayProfile& prof, int n, const Lattice& lat);

// Scalar schedule shape theta: theta(0) = 0, theta(1) = 1.
class Shape {
 public:
  virtual ~Shape() = default;
  virtual Jet jet(double s, int order) const = 0;
  virtual bool flat_at_0() const { return false; }
  virtual bool flat_at_1() const { return false; }
  virtual std::string name() const = 0;
};

// "constant", "linear", "quadratic", "cubic", "smoothstart", "bump"
std::shared_ptr<const Shape> make_shape(const std::string& name);

// s may leave [0,1] by this much so that finite-difference stencils fit at the ends
constexpr double kScheduleMargin = 0.05;
// analytic derivatives are available up to this order
constexpr int kJetOrder = 8;

class Schedule {
 public:
  virtual ~Schedule() = default;

  // k-th s-derivative of the interaction
  Interaction eval(double s, int k) const;
  virtual int smoothness() const = 0;
  virtual bool derivatives_vanish_at_0() const { return false; }
  virtual bool derivatives_vanish_at_1() const { return false; }
  virtual std::string name() const { return "schedule"; }

  // Schedules of the form sum_i c_i(s) Phi_i expose their parts so that
  // Hamiltonians can be assembled once and recombined.
  virtual const std::vector<Interaction>* components() const { return nullptr; }
  virtual std::vector<double> coefficients(double s, int k) const;

 protected:
  virtual Interaction eval_unchecked(double s, int k) const = 0;
  void check_args(double s, int k) const;
};

class ParametricSchedule : public Schedule {
 public:
  using Coefficient = std::function<Jet(const Jet& theta)>;

  ParametricSchedule(std::shared_ptr<const Shape> shape, std::vector<Coefficient> coeffs,
                     std::vector<Interaction> parts, std::string name);

  int smoothness() const override { return kJetOrder; }
  bool derivatives_vanish_at_0() const override { return shape_->flat_at_0(); }
  bool derivatives_vanish_at_1() const override { return shape_->flat_at_1(); }
  std::string name() const override { return name_; }
  const std::vector<Interaction>* components() const override { return &parts_; }
  std::vector<double> coefficients(double s, int k) const override;

 protected:
  Interaction eval_unchecked(double s, int k) const override;

 private:
  std::shared_ptr<const Shape> shape_;
  std::vector<Coefficient> coeffs_;
  std::vector<Interaction> parts_;
  std::string name_;
};

// User-supplied s -> Phi_s; derivatives by order-4 central differences.
class FunctionSchedule : public Schedule {
 public:
  explicit FunctionSchedule(std::function<Interaction(double)> fn, double step = 1e-3, std::string name = "function");
  int smoothness() const override { return 2; }
  std::string name() const override { return name_; }

 protected:
  Interaction eval_unchecked(double s, int k) const override;

 private:
  std::function<Interaction(double)> fn_;
  double h_;
  std::string name_;
};

std::shared_ptr<Schedule> constant_schedule(const Interaction& phi);

// Interaction presets on a lattice.
Interaction tfim_coupling(const Lattice& lat);  // -sum_edges Z Z
Interaction field(const Lattice& lat, const Mat& single_site, double coeff);

// "tfim:g0:g1", "free:a0:a1", "rotising:a0:a1", "custom". The custom model reads
// {"terms":[...], optional "terms_final":[...]} from `custom`.
std::shared_ptr<Schedule> make_model(const std::string& model, const std::string& shape, const Lattice& lat,
                                     const nlohmann::json& custom = nullptr);
Interaction interaction_from_json(const nlohmann::json& terms);

// Assembled Hamiltonian H_s and its derivatives on a fixed volume.
class HamiltonianPath {
 public:
  HamiltonianPath(std::shared_ptr<const Schedule> sch, Volume vol);

  Mat dense(double s, int k = 0) const;
  SpMat sparse(double s, int k = 0) const;
  // true when every assembled matrix is real (enables real eigensolvers)
  bool is_real() const { return real_; }
  Eigen::Index dim() const { return vol_.dim(); }
  const Volume& volume() const { return vol_; }
  const Schedule& schedule() const { return *sch_; }
  std::shared_ptr<const Schedule> schedule_ptr() const { return sch_; }

 private:
  std::shared_ptr<const Schedule> sch_;
  Volume vol_;
  std::vector<SpMat> parts_;
  bool real_ = false;
};

}  // namespace adiaspec
