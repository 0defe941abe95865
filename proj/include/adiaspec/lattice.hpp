#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "adiaspec/core.hpp"

namespace adiaspec {

// Connected finite graph with the graph metric. Sites are kept sorted by id;
// that order is also the tensor-product order used by the operators module.
class Lattice {
 public:
  Lattice() = default;
  // kappa <= 0 means "use the measured minimum"
  Lattice(std::vector<int> sites, std::vector<std::pair<int, int>> edges, int dim_d, double kappa = 0.0);

  const std::vector<int>& sites() const { return sites_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  int size() const { return static_cast<int>(sites_.size()); }
  int dim_d() const { return dim_d_; }
  double kappa() const { return kappa_; }
  int diameter() const { return diameter_; }
  std::string name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  bool contains(int site) const;
  // position of a site id in sites(); throws DomainError for unknown ids
  int index_of(int site) const;
  // distance by position, no checks
  int dist_idx(int i, int j) const { return dist_[static_cast<std::size_t>(i) * sites_.size() + j]; }

 private:
  std::vector<int> sites_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<int> dist_;
  int dim_d_ = 1;
  double kappa_ = 0.0;
  int diameter_ = 0;
  std::string name_ = "custom";
};

Lattice make_chain(int length);
Lattice make_grid(int length, int width);
// "chain:L" or "grid:LxW"
Lattice lattice_from_preset(const std::string& preset);
// {"sites":[...],"edges":[[a,b],...], optional "dim": d, "kappa": k}
Lattice lattice_from_json(const nlohmann::json& j);

int graph_distance(const Lattice& lat, int x, int y);
// distance between two site sets (min over pairs)
int set_distance(const Lattice& lat, const std::vector<int>& a, const std::vector<int>& b);
int set_diameter(const Lattice& lat, const std::vector<int>& a);
// {z : dist(z, x) <= n}, sorted
std::vector<int> fattening(const Lattice& lat, const std::vector<int>& x, int n);
// max over y and r >= 1 of |ball(y,r)| / r^d
double measured_kappa(const Lattice& lat, int d);

class DecayProfile {
 public:
  enum class Kind { Exponential, Tabulated };

  static DecayProfile exponential(double mu, int d);
  // zeta(r) for r = 0..table.size()-1; beyond the table the last value is held
  static DecayProfile tabulated(std::vector<double> table, int d);

  Kind kind() const { return kind_; }
  int d() const { return d_; }
  double mu() const { return mu_; }
  double zeta(int r) const;
  double f(int r) const;        // (1+r)^-(d+1)
  double f_zeta(int r) const;   // zeta(r) f(r)

 private:
  Kind kind_ = Kind::Exponential;
  double mu_ = 1.0;
  std::vector<double> table_;
  int d_ = 1;
};

struct DecayConstants {
  double c_f = 0.0;
  double f_one_norm = 0.0;
  double kappa_min = 0.0;
};

DecayConstants decay_constants(const Lattice& lat, const DecayProfile& prof);

// f sampled on a uniform grid x_i = i*h (x_0 = 0). Returns the largest
// subadditive minorant reachable by grid compositions.
std::vector<double> subadditive_envelope(const std::vector<double>& f);

}  // namespace adiaspec
