#include "adiaspec/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

namespace adiaspec {

Lattice::Lattice(std::vector<int> sites, std::vector<std::pair<int, int>> edges, int dim_d, double kappa)
    : dim_d_(dim_d) {
  if (sites.empty()) throw DomainError("lattice needs at least one site");
  if (dim_d < 1) throw DomainError("lattice dimension must be positive");
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) throw DomainError("duplicate site id");
  sites_ = std::move(sites);

  const std::size_t n = sites_.size();
  std::vector<std::vector<int>> adj(n);
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a == b) throw DomainError("self-loop in edge list");
    int ia = index_of(a), ib = index_of(b);
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second) continue;
    edges_.push_back(key);
    adj[ia].push_back(ib);
    adj[ib].push_back(ia);
  }
  std::sort(edges_.begin(), edges_.end());

  dist_.assign(n * n, -1);
  for (std::size_t src = 0; src < n; ++src) {
    std::deque<int> q{static_cast<int>(src)};
    dist_[src * n + src] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int v : adj[u]) {
        if (dist_[src * n + v] < 0) {
          dist_[src * n + v] = dist_[src * n + u] + 1;
          q.push_back(v);
        }
      }
    }
  }
  if (std::find(dist_.begin(), dist_.end(), -1) != dist_.end()) throw DomainError("lattice graph is not connected");
  diameter_ = *std::max_element(dist_.begin(), dist_.end());

  const double kmin = measured_kappa(*this, dim_d_);
  if (kappa <= 0.0) {
    kappa_ = kmin;
  } else {
    if (kappa < kmin * (1 - 1e-12)) {
      std::ostringstream os;
      os << "kappa " << kappa << " violates the ball-growth bound (needs >= " << kmin << ")";
      throw DomainError(os.str());
    }
    kappa_ = kappa;
  }
}

bool Lattice::contains(int site) const { return std::binary_search(sites_.begin(), sites_.end(), site); }

int Lattice::index_of(int site) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), site);
  if (it == sites_.end() || *it != site) throw DomainError("unknown site id " + std::to_string(site));
  return static_cast<int>(it - sites_.begin());
}

Lattice make_chain(int length) {
  if (length < 1) throw DomainError("chain length must be positive");
  std::vector<int> sites(length);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < length; ++i) {
    sites[i] = i;
    if (i + 1 < length) edges.emplace_back(i, i + 1);
  }
  Lattice lat(sites, edges, 1);
  lat.set_name("chain:" + std::to_string(length));
  return lat;
}

// site (r, c) has id r*width + c
Lattice make_grid(int length, int width) {
  if (length < 1 || width < 1) throw DomainError("grid extents must be positive");
  std::vector<int> sites;
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < length; ++r) {
    for (int c = 0; c < width; ++c) {
      int id = r * width + c;
      sites.push_back(id);
      if (c + 1 < width) edges.emplace_back(id, id + 1);
      if (r + 1 < length) edges.emplace_back(id, id + width);
    }
  }
  Lattice lat(sites, edges, 2);
  lat.set_name("grid:" + std::to_string(length) + "x" + std::to_string(width));
  return lat;
}

namespace {
int parse_positive(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad " + what + ": '" + s + "'");
  }
  if (used != s.size() || v < 1) throw ConfigError("bad " + what + ": '" + s + "'");
  return v;
}
}  // namespace

Lattice lattice_from_preset(const std::string& preset) {
  auto colon = preset.find(':');
  if (colon == std::string::npos) throw ConfigError("lattice preset needs a size: '" + preset + "'");
  std::string kind = preset.substr(0, colon), arg = preset.substr(colon + 1);
  if (kind == "chain") return make_chain(parse_positive(arg, "chain length"));
  if (kind == "grid") {
    auto x = arg.find('x');
    if (x == std::string::npos) throw ConfigError("grid preset must look like grid:LxW");
    return make_grid(parse_positive(arg.substr(0, x), "grid length"), parse_positive(arg.substr(x + 1), "grid width"));
  }
  throw ConfigError("unknown lattice preset '" + kind + "'");
}

Lattice lattice_from_json(const nlohmann::json& j) {
  try {
    auto sites = j.at("sites").get<std::vector<int>>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("edge must be a pair");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    int d = j.value("dim", 1);
    double kappa = j.value("kappa", 0.0);
    return Lattice(sites, edges, d, kappa);
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("lattice json: ") + ex.what());
  } catch (const DomainError& ex) {
    throw ConfigError(std::string("lattice json: ") + ex.what());
  }
}

int graph_distance(const Lattice& lat, int x, int y) { return lat.dist_idx(lat.index_of(x), lat.index_of(y)); }

int set_distance(const Lattice& lat, const std::vector<int>& a, const std::vector<int>& b) {
  if (a.empty() || b.empty()) throw DomainError("distance to an empty set");
  int best = std::numeric_limits<int>::max();
  for (int x : a)
    for (int y : b) best = std::min(best, graph_distance(lat, x, y));
  return best;
}

int set_diameter(const Lattice& lat, const std::vector<int>& a) {
  int best = 0;
  for (int x : a)
    for (int y : a) best = std::max(best, graph_distance(lat, x, y));
  return best;
}

std::vector<int> fattening(const Lattice& lat, const std::vector<int>& x, int n) {
  std::vector<int> idx;
  for (int s : x) idx.push_back(lat.index_of(s));
  std::vector<int> out;
  for (int j = 0; j < lat.size(); ++j) {
    for (int i : idx) {
      if (lat.dist_idx(i, j) <= n) {
        out.push_back(lat.sites()[j]);
        break;
      }
    }
  }
  return out;
}

double measured_kappa(const Lattice& lat, int d) {
  const int n = lat.size();
  if (n == 1) return 1.0;
  double best = 0.0;
  for (int y = 0; y < n; ++y) {
    std::vector<int> count(lat.diameter() + 1, 0);
    for (int x = 0; x < n; ++x) ++count[lat.dist_idx(x, y)];
    int ball = count[0];
    for (int r = 1; r <= lat.diameter(); ++r) {
      ball += count[r];
      best = std::max(best, ball / std::pow(static_cast<double>(r), d));
    }
  }
  return best;
}

DecayProfile DecayProfile::exponential(double mu, int d) {
  if (!(mu > 0)) throw DomainError("exponential decay rate must be positive");
  if (d < 1) throw DomainError("decay profile dimension must be positive");
  DecayProfile p;
  p.kind_ = Kind::Exponential;
  p.mu_ = mu;
  p.d_ = d;
  return p;
}

DecayProfile DecayProfile::tabulated(std::vector<double> table, int d) {
  if (table.empty()) throw DomainError("empty zeta table");
  if (d < 1) throw DomainError("decay profile dimension must be positive");
  for (std::size_t r = 0; r < table.size(); ++r) {
    if (!(table[r] > 0) || !std::isfinite(table[r])) throw DomainError("zeta must be positive and finite");
    if (r > 0 && table[r] > table[r - 1]) throw DomainError("zeta must be non-increasing");
  }
  for (std::size_t r = 0; r < table.size(); ++r) {
    for (std::size_t s = 0; r + s < table.size(); ++s) {
      if (table[r + s] < table[r] * table[s] * (1 - 1e-12)) throw DomainError("zeta is not log-superadditive");
    }
  }
  DecayProfile p;
  p.kind_ = Kind::Tabulated;
  p.table_ = std::move(table);
  p.d_ = d;
  return p;
}

double DecayProfile::zeta(int r) const {
  if (r < 0) throw DomainError("negative distance");
  if (kind_ == Kind::Exponential) return std::exp(-mu_ * r);
  return table_[std::min<std::size_t>(r, table_.size() - 1)];
}

double DecayProfile::f(int r) const { return std::pow(1.0 + r, -(d_ + 1.0)); }

double DecayProfile::f_zeta(int r) const { return zeta(r) * f(r); }

DecayConstants decay_constants(const Lattice& lat, const DecayProfile& prof) {
  const int n = lat.size();
  std::vector<double> fz(lat.diameter() + 1);
  for (int r = 0; r <= lat.diameter(); ++r) fz[r] = prof.f_zeta(r);
  DecayConstants out;
  for (int x = 0; x < n; ++x) {
    double row = 0;
    for (int z = 0; z < n; ++z) row += fz[lat.dist_idx(x, z)];
    out.f_one_norm = std::max(out.f_one_norm, row);
    for (int y = x; y < n; ++y) {
      double conv = 0;
      for (int z = 0; z < n; ++z) conv += fz[lat.dist_idx(x, z)] * fz[lat.dist_idx(z, y)];
      out.c_f = std::max(out.c_f, conv / fz[lat.dist_idx(x, y)]);
    }
  }
  out.kappa_min = measured_kappa(lat, prof.d());
  return out;
}

std::vector<double> subadditive_envelope(const std::vector<double>& f) {
  if (f.empty()) throw DomainError("empty sample");
  if (!(f[0] > 0)) throw DomainError("envelope needs f(0) > 0");
  for (std::size_t i = 1; i < f.size(); ++i) {
    if (f[i] < f[i - 1]) throw DomainError("envelope needs nondecreasing samples");
  }
  std::vector<double> g(f);
  for (std::size_t i = 2; i < g.size(); ++i) {
    for (std::size_t j = 1; j <= i / 2; ++j) g[i] = std::min(g[i], g[j] + g[i - j]);
  }
  return g;
}

}  // namespace adiaspec
