#include "adiaspec/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "adiaspec/counterdiabatic.hpp"
#include "adiaspec/linresp.hpp"

namespace adiaspec {

using nlohmann::json;

namespace {

const std::vector<std::string> kExperiments = {"adiabatic-scaling", "endpoint-order", "volume-scan", "dressing-order",
                                               "cone",              "kubo",           "product-oracle"};

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  return out;
}

// Experiment defaults; user keys override these one level deep.
json defaults_for(const std::string& exp) {
  if (exp == "adiabatic-scaling") {
    return {{"model", "tfim:2:1.5"},
            {"schedule", "smoothstart"},
            {"grids", {{"epsilon", {0.2, 0.1, 0.05, 0.025}}, {"L", {6, 8, 10}}, {"n", json::array()}, {"s", linspace(0, 1, 21)}}},
            {"observable", "current"},
            {"params", {{"reference", "patch"}, {"initial", "ground"}, {"transport_points", 2001}}},
            {"tolerances", {{"slope_min", 0.8}, {"slope_max", 1.2}, {"volume_factor", 2.0}}}};
  }
  if (exp == "endpoint-order") {
    return {{"model", "tfim:2:1.5"},
            {"schedule", "bump"},
            {"grids", {{"epsilon", {0.4, 0.3, 0.2, 0.15, 0.1}}, {"L", {6}}, {"n", {2}}, {"s", {0.0, 1.0}}}},
            {"observable", "current"},
            {"params", json::object()},
            {"tolerances", {{"slope_min", 2.0}}}};
  }
  if (exp == "volume-scan") {
    return {{"model", "free:0:1"},
            {"schedule", "linear"},
            {"grids", {{"epsilon", {0.1}}, {"L", {2, 4, 6, 8}}, {"n", json::array()}, {"s", linspace(0, 1, 11)}}},
            {"observable", "sy"},
            {"params", {{"large_L", {64, 1024, 16384}}}},
            {"tolerances", {{"volume_factor", 2.0}, {"leak_target", 0.9}}}};
  }
  if (exp == "dressing-order") {
    return {{"model", "tfim:2:1.5"},
            {"schedule", "linear"},
            {"grids", {{"epsilon", {0.32, 0.16, 0.08, 0.04}}, {"L", {6}}, {"n", {1, 2}}, {"s", {0.5}}}},
            {"observable", "current"},
            {"params", {{"defect_step", 1e-3}}},
            {"tolerances", {{"slope_tol", 0.2}, {"residual_max", 1e-6}}}};
  }
  if (exp == "cone") {
    return {{"model", "tfim:1:1"},
            {"schedule", "constant"},
            {"grids", {{"epsilon", json::array()}, {"L", {10}}, {"n", json::array()}, {"s", {0.0}}}},
            {"observable", "sz"},
            {"params",
             {{"source_site", 1}, {"t_max", 3.0}, {"dt", 0.1}, {"rel_threshold", 1e-2}, {"check_time", 1.0}, {"check_distance", 6}}},
            {"tolerances", {{"outside_rel", 1e-3}, {"zero_tol", 1e-12}}}};
  }
  if (exp == "kubo") {
    return {{"model", "tfim:1.5:1.5"},
            {"schedule", "constant"},
            {"grids", {{"epsilon", {0.4, 0.2, 0.1, 0.05}}, {"L", {6, 8, 10}}, {"n", json::array()}, {"s", {0.0}}}},
            {"observable", "sx"},
            {"params",
             {{"alpha", {0.0, 0.05}},
              {"perturbation", "field_x"},
              {"deltas_rel", {0.1, 0.05, 0.025}},
              {"s_trunc", -30.0},
              {"max_step", 0.01},
              {"volume_eps", {0.1}}}},
            {"tolerances", {{"formula_tol", 1e-6}, {"volume_factor", 2.0}, {"energy_tol", 1e-10}}}};
  }
  if (exp == "product-oracle") {
    return {{"model", "free:0:1"},
            {"schedule", "smoothstart"},
            {"grids", {{"epsilon", {0.1}}, {"L", {1, 2, 4, 6, 8}}, {"n", json::array()}, {"s", linspace(0, 1, 11)}}},
            {"observable", "sy"},
            {"params", {{"initial", "ground"}}},
            {"tolerances", {{"identity_tol", 1e-12}}}};
  }
  throw ConfigError("unknown experiment '" + exp + "'");
}

template <class T>
T get_as(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + key + "' is missing or has the wrong type");
  }
}

double param_d(const RunConfig& c, const std::string& k) { return get_as<double>(c.params, k, "params."); }
int param_i(const RunConfig& c, const std::string& k) { return get_as<int>(c.params, k, "params."); }
std::string param_s(const RunConfig& c, const std::string& k) { return get_as<std::string>(c.params, k, "params."); }
double tol(const RunConfig& c, const std::string& k) { return get_as<double>(c.tolerances, k, "tolerances."); }

FilterFunction filter_of(const RunConfig& c) { return FilterFunction(c.gamma, parse_interp(c.interp)); }

EvolveOptions evolve_options(const RunConfig& c) {
  EvolveOptions o;
  o.method = parse_integrator(c.integrator);
  o.max_step = c.max_step;
  return o;
}

std::string model_kind(const std::string& model) { return model.substr(0, model.find(':')); }

// Rows are formatted as they are produced so the CSV is independent of scheduling.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::string fmt_int(long v) { return std::to_string(v); }

double max_ratio(const std::vector<double>& v) {
  double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
  if (lo <= 0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// ---------------------------------------------------------------- adiabatic-scaling

struct ScalingPoint {
  double s_at = 0, value = 0, err = 0, err_norm = 0;
};

Vec generic_patch_state(const PatchData& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vec c(p.count);
  for (int i = 0; i < p.count; ++i) c(i) = cplx(nd(rng), nd(rng));
  c.normalize();
  return p.basis * c;
}

RunResult run_scaling(const RunConfig& cfg, int threads) {
  const std::string reference = param_s(cfg, "reference");
  const std::string initial = param_s(cfg, "initial");
  if (reference != "patch" && reference != "transport") throw ConfigError("params.reference must be patch or transport");
  if (initial != "ground" && initial != "generic") throw ConfigError("params.initial must be ground or generic");
  const Selector sel = selector_from_json(cfg.patch);
  const EvolveOptions evo = evolve_options(cfg);

  struct PerL {
    std::unique_ptr<HamiltonianPath> path;
    Mat obs;
    std::vector<Mat> proj;       // patch projectors on the s-grid
    std::vector<double> ref;     // reference expectation on the s-grid (patch reference)
    Mat p0, frame0;
    Trajectory transport;        // transport reference
  };
  std::vector<PerL> per(cfg.l_grid.size());
  for (std::size_t li = 0; li < cfg.l_grid.size(); ++li) {
    Lattice lat = lattice_for(cfg, cfg.l_grid[li]);
    auto sch = make_model(cfg.model, cfg.schedule, lat, cfg.custom);
    PerL& p = per[li];
    p.path = std::make_unique<HamiltonianPath>(sch, Volume::of(lat));
    p.obs = embed(named_observable(cfg.observable, lat), p.path->volume());
    for (double s : cfg.s_grid) {
      PatchData pd = diagonalize_and_patch(p.path->dense(s), sel).second;
      p.ref.push_back((p.obs * pd.projector).trace().real() / pd.count);
      p.proj.push_back(pd.projector);
    }
    PatchData pd0 = diagonalize_and_patch(p.path->dense(cfg.s_grid.front()), sel).second;
    p.p0 = pd0.projector;
    if (initial == "generic") p.frame0 = generic_patch_state(pd0, cfg.seed);
    if (reference == "transport") {
      if (initial != "generic" && pd0.count > 1) throw ConfigError("transport reference needs a single initial state");
      const int npts = param_i(cfg, "transport_points");
      if (npts < 2) throw ConfigError("params.transport_points must be at least 2");
      std::vector<double> fine = linspace(cfg.s_grid.front(), cfg.s_grid.back(), npts);
      for (double s : cfg.s_grid) fine.push_back(s);
      std::sort(fine.begin(), fine.end());
      fine.erase(std::unique(fine.begin(), fine.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }), fine.end());
      std::vector<Mat> fp;
      for (double s : fine) fp.push_back(diagonalize_and_patch(p.path->dense(s), sel).second.projector);
      Vec psi0 = initial == "generic" ? Vec(p.frame0.col(0)) : Vec(pd0.basis.col(0));
      Trajectory full = parallel_transport(fine, fp, psi0);
      // keep the frames on the coarse grid
      p.transport.grid = cfg.s_grid;
      for (double s : cfg.s_grid) {
        auto it = std::min_element(fine.begin(), fine.end(), [&](double a, double b) { return std::abs(a - s) < std::abs(b - s); });
        p.transport.frames.push_back(full.frames[static_cast<std::size_t>(it - fine.begin())]);
      }
    }
  }

  const std::size_t ne = cfg.eps_grid.size();
  std::vector<ScalingPoint> pts(cfg.l_grid.size() * ne);
  parallel_for(pts.size(), threads, [&](std::size_t job) {
    const std::size_t li = job / ne, ei = job % ne;
    const PerL& p = per[li];
    const double eps = cfg.eps_grid[ei];
    Trajectory tr = initial == "generic" ? evolve_state(*p.path, eps, p.frame0.col(0), cfg.s_grid, evo)
                                         : evolve_projector(*p.path, eps, p.p0, cfg.s_grid, evo);
    ScalingPoint best;
    best.err = -1;
    for (std::size_t i = 0; i < cfg.s_grid.size(); ++i) {
      const double val = tr.expectation(i, p.obs);
      const double ref = reference == "patch" ? p.ref[i] : p.transport.expectation(i, p.obs);
      const double err = std::abs(val - ref);
      if (err > best.err) {
        best.err = err;
        best.s_at = cfg.s_grid[i];
        best.value = val;
        Mat leak = tr.frames[i] - p.proj[i] * tr.frames[i];
        best.err_norm = op_norm(leak);
      }
    }
    pts[job] = best;
  });

  RunResult r;
  r.columns = {"s", "epsilon", "L", "observable_id", "value", "error_local", "error_norm"};
  json per_l = json::array();
  bool pass = true;
  for (std::size_t li = 0; li < cfg.l_grid.size(); ++li) {
    std::vector<double> errs;
    for (std::size_t ei = 0; ei < ne; ++ei) {
      const ScalingPoint& q = pts[li * ne + ei];
      r.rows.push_back({format_number(q.s_at), format_number(cfg.eps_grid[ei]), fmt_int(cfg.l_grid[li]), cfg.observable,
                        format_number(q.value), format_number(q.err), format_number(q.err_norm)});
      errs.push_back(q.err);
    }
    json entry = {{"L", cfg.l_grid[li]}};
    if (ne >= 2) {
      LineFit f = fit_loglog(cfg.eps_grid, errs);
      const bool ok = f.slope >= tol(cfg, "slope_min") && f.slope <= tol(cfg, "slope_max");
      pass = pass && ok;
      entry["slope"] = f.slope;
      entry["fit_residual"] = f.residual;
      entry["prefactor"] = std::exp(f.intercept);
      entry["pass"] = ok;
    }
    per_l.push_back(entry);
  }
  json vol = json::array();
  if (cfg.l_grid.size() >= 2) {
    for (std::size_t ei = 0; ei < ne; ++ei) {
      std::vector<double> e;
      for (std::size_t li = 0; li < cfg.l_grid.size(); ++li) e.push_back(pts[li * ne + ei].err);
      const double ratio = max_ratio(e);
      const bool ok = ratio < tol(cfg, "volume_factor");
      pass = pass && ok;
      vol.push_back({{"epsilon", cfg.eps_grid[ei]}, {"ratio", number_or_null(ratio)}, {"pass", ok}});
    }
  }
  r.summary = {{"fits", per_l}, {"volume", vol}, {"reference", reference}};
  r.pass = pass;
  return r;
}

// ---------------------------------------------------------------- endpoint-order

RunResult run_endpoint(const RunConfig& cfg, int threads) {
  const Selector sel = selector_from_json(cfg.patch);
  const EvolveOptions evo = evolve_options(cfg);
  const FilterFunction w = filter_of(cfg);
  const double s0 = cfg.s_grid.front(), s1 = cfg.s_grid.back();
  struct Row {
    int L;
    double eps, value, err, err_norm;
  };
  std::vector<Row> rows(cfg.l_grid.size() * cfg.eps_grid.size());
  std::vector<std::unique_ptr<HamiltonianPath>> paths;
  std::vector<Mat> obs;
  for (int L : cfg.l_grid) {
    Lattice lat = lattice_for(cfg, L);
    paths.push_back(std::make_unique<HamiltonianPath>(make_model(cfg.model, cfg.schedule, lat, cfg.custom), Volume::of(lat)));
    obs.push_back(embed(named_observable(cfg.observable, lat), paths.back()->volume()));
  }
  const std::size_t ne = cfg.eps_grid.size();
  parallel_for(rows.size(), threads, [&](std::size_t job) {
    const std::size_t li = job / ne, ei = job % ne;
    const HamiltonianPath& path = *paths[li];
    const double eps = cfg.eps_grid[ei];
    PatchData p0 = diagonalize_and_patch(path.dense(s0), sel).second;
    if (p0.count != 1) throw ConfigError("endpoint-order needs a one-dimensional patch");
    Vec psi0 = p0.basis.col(0);
    Trajectory bare = evolve_state(path, eps, psi0, {s0, s1}, evo);
    DressedMode dm;
    dm.order = cfg.dressing_n;
    dm.filter = w;
    dm.selector = sel;
    dm.fd_step = cfg.fd_step;
    Trajectory dressed = evolve_state(path, eps, psi0, {s0, s1}, evo, dm);
    const double vb = bare.expectation(1, obs[li]);
    const double vd = dressed.expectation(1, obs[li]);
    Mat pi = dressed.projector(1);
    Vec leak = bare.state(1) - pi * bare.state(1);
    rows[job] = {cfg.l_grid[li], eps, vb, std::abs(vb - vd), leak.norm()};
  });
  RunResult r;
  r.columns = {"s", "epsilon", "L", "observable_id", "value", "error_local", "error_norm"};
  json fits = json::array();
  bool pass = true;
  for (std::size_t li = 0; li < cfg.l_grid.size(); ++li) {
    std::vector<double> e, n;
    for (std::size_t ei = 0; ei < ne; ++ei) {
      const Row& q = rows[li * ne + ei];
      r.rows.push_back({format_number(s1), format_number(q.eps), fmt_int(q.L), cfg.observable, format_number(q.value),
                        format_number(q.err), format_number(q.err_norm)});
      e.push_back(q.err);
      n.push_back(q.err_norm);
    }
    if (ne >= 2) {
      LineFit f = fit_loglog(cfg.eps_grid, e);
      LineFit g = fit_loglog(cfg.eps_grid, n);
      const bool ok = f.slope >= tol(cfg, "slope_min");
      pass = pass && ok;
      fits.push_back({{"L", cfg.l_grid[li]},
                      {"slope", f.slope},
                      {"fit_residual", f.residual},
                      {"leak_slope", g.slope},
                      {"leak_fit_residual", g.residual},
                      {"pass", ok}});
    }
  }
  r.summary = {{"fits", fits}, {"dressing_order", cfg.dressing_n}};
  r.pass = pass;
  return r;
}

// ---------------------------------------------------------------- volume-scan

RunResult run_volume(const RunConfig& cfg, int threads) {
  const Selector sel = selector_from_json(cfg.patch);
  const EvolveOptions evo = evolve_options(cfg);
  const double eps = cfg.eps_grid.front();
  struct Row {
    double s_at = 0, value = 0, err = -1, leak = 0;
  };
  std::vector<Row> rows(cfg.l_grid.size());
  parallel_for(rows.size(), threads, [&](std::size_t li) {
    Lattice lat = lattice_for(cfg, cfg.l_grid[li]);
    HamiltonianPath path(make_model(cfg.model, cfg.schedule, lat, cfg.custom), Volume::of(lat));
    Mat obs = embed(named_observable(cfg.observable, lat), path.volume());
    PatchData p0 = diagonalize_and_patch(path.dense(cfg.s_grid.front()), sel).second;
    Trajectory tr = evolve_projector(path, eps, p0.projector, cfg.s_grid, evo);
    Row best;
    for (std::size_t i = 0; i < cfg.s_grid.size(); ++i) {
      PatchData p = diagonalize_and_patch(path.dense(cfg.s_grid[i]), sel).second;
      const double val = tr.expectation(i, obs);
      const double err = std::abs(val - (obs * p.projector).trace().real() / p.count);
      const double leak = op_norm(Mat(tr.frames[i] - p.projector * tr.frames[i]));
      if (err > best.err) {
        best.err = err;
        best.s_at = cfg.s_grid[i];
        best.value = val;
      }
      best.leak = std::max(best.leak, leak);
    }
    rows[li] = best;
  });
  RunResult r;
  r.columns = {"s", "epsilon", "L", "observable_id", "value", "error_local", "error_norm"};
  std::vector<double> errs, leaks;
  for (std::size_t li = 0; li < rows.size(); ++li) {
    r.rows.push_back({format_number(rows[li].s_at), format_number(eps), fmt_int(cfg.l_grid[li]), cfg.observable,
                      format_number(rows[li].value), format_number(rows[li].err), format_number(rows[li].leak)});
    errs.push_back(rows[li].err);
    leaks.push_back(rows[li].leak);
  }
  json large = json::array();
  std::vector<double> all_leaks = leaks;
  if (model_kind(cfg.model) == "free" && cfg.params.contains("large_L")) {
    // product states: ||(1-P)psi||^2 = 1 - q^L with q the single-site survival
    Lattice one = make_chain(1);
    HamiltonianPath path(make_model(cfg.model, cfg.schedule, one), Volume::of(one));
    PatchData p0 = diagonalize_and_patch(path.dense(cfg.s_grid.front()), sel).second;
    Trajectory tr = evolve_state(path, eps, p0.basis.col(0), cfg.s_grid, evo);
    double q_min = 1.0;
    for (std::size_t i = 0; i < cfg.s_grid.size(); ++i) {
      PatchData p = diagonalize_and_patch(path.dense(cfg.s_grid[i]), sel).second;
      q_min = std::min(q_min, (p.projector * tr.state(i)).squaredNorm());
    }
    for (int L : get_as<std::vector<int>>(cfg.params, "large_L", "params.")) {
      const double leak = std::sqrt(std::max(0.0, 1.0 - std::pow(q_min, L)));
      large.push_back({{"L", L}, {"error_norm", leak}});
      all_leaks.push_back(leak);
    }
  }
  bool monotone = true;
  for (std::size_t i = 1; i < all_leaks.size(); ++i) monotone = monotone && all_leaks[i] >= all_leaks[i - 1];
  const double ratio = errs.size() >= 2 ? max_ratio(errs) : 1.0;
  const bool ratio_ok = ratio < tol(cfg, "volume_factor");
  const bool reaches = all_leaks.back() >= tol(cfg, "leak_target");
  r.summary = {{"error_ratio", number_or_null(ratio)},
               {"error_ratio_pass", ratio_ok},
               {"leak_monotone", monotone},
               {"leak_final", all_leaks.back()},
               {"leak_reaches_target", reaches},
               {"large_L", large}};
  r.pass = ratio_ok && monotone && reaches;
  return r;
}

// ---------------------------------------------------------------- dressing-order

RunResult run_dressing(const RunConfig& cfg, int threads) {
  const Selector sel = selector_from_json(cfg.patch);
  const FilterFunction w = filter_of(cfg);
  const double hs = param_d(cfg, "defect_step");
  const double s = cfg.s_grid.front();
  struct Row {
    int L, n;
    double eps, defect, residual;
  };
  std::vector<std::unique_ptr<HamiltonianPath>> paths;
  for (int L : cfg.l_grid) {
    Lattice lat = lattice_for(cfg, L);
    paths.push_back(std::make_unique<HamiltonianPath>(make_model(cfg.model, cfg.schedule, lat, cfg.custom), Volume::of(lat)));
  }
  const std::size_t nn = cfg.n_grid.size(), ne = cfg.eps_grid.size();
  std::vector<Row> rows(cfg.l_grid.size() * nn * ne);
  parallel_for(rows.size(), threads, [&](std::size_t job) {
    const std::size_t li = job / (nn * ne), ni = (job / ne) % nn, ei = job % ne;
    const int n = cfg.n_grid[ni];
    const double eps = cfg.eps_grid[ei];
    const HamiltonianPath& path = *paths[li];
    DressingSequence d = DressingBuilder(path, w, sel, cfg.fd_step).build(s, n, eps);
    double res = 0;
    for (double x : d.residuals) res = std::max(res, x);
    rows[job] = {cfg.l_grid[li], n, eps, dressing_defect(path, s, n, eps, w, sel, hs, cfg.fd_step), res};
  });
  RunResult r;
  r.columns = {"L", "n", "epsilon", "s", "defect", "max_residual"};
  json fits = json::array();
  bool pass = true;
  for (std::size_t li = 0; li < cfg.l_grid.size(); ++li) {
    for (std::size_t ni = 0; ni < nn; ++ni) {
      std::vector<double> e;
      double res = 0;
      for (std::size_t ei = 0; ei < ne; ++ei) {
        const Row& q = rows[(li * nn + ni) * ne + ei];
        r.rows.push_back({fmt_int(q.L), fmt_int(q.n), format_number(q.eps), format_number(s), format_number(q.defect),
                          format_number(q.residual)});
        e.push_back(q.defect);
        res = std::max(res, q.residual);
      }
      json entry = {{"L", cfg.l_grid[li]}, {"n", cfg.n_grid[ni]}, {"max_residual", res}};
      bool ok = res <= tol(cfg, "residual_max");
      if (ne >= 2) {
        LineFit f = fit_loglog(cfg.eps_grid, e);
        entry["slope"] = f.slope;
        entry["fit_residual"] = f.residual;
        entry["target"] = cfg.n_grid[ni] + 1;
        ok = ok && std::abs(f.slope - (cfg.n_grid[ni] + 1)) <= tol(cfg, "slope_tol");
      }
      entry["pass"] = ok;
      pass = pass && ok;
      fits.push_back(entry);
    }
  }
  r.summary = {{"fits", fits}, {"s", s}};
  r.pass = pass;
  return r;
}

// ---------------------------------------------------------------- cone

RunResult run_cone(const RunConfig& cfg, int threads) {
  const int L = cfg.l_grid.front();
  Lattice lat = lattice_for(cfg, L);
  HamiltonianPath path(make_model(cfg.model, cfg.schedule, lat, cfg.custom), Volume::of(lat));
  const Mat h = path.dense(cfg.s_grid.front());
  const int src = param_i(cfg, "source_site");
  if (!lat.contains(src)) throw ConfigError("params.source_site is not on the lattice");
  const Mat single = cfg.observable == "sx" ? pauli::x() : cfg.observable == "sy" ? pauli::y() : pauli::z();
  if (cfg.observable != "sx" && cfg.observable != "sy" && cfg.observable != "sz")
    throw ConfigError("cone observable must be sx, sy or sz");
  LocalOperator ox({src}, single);
  std::vector<LocalOperator> oys;
  for (int y : lat.sites())
    if (graph_distance(lat, src, y) > 0) oys.emplace_back(std::vector<int>{y}, single);
  const double t_max = param_d(cfg, "t_max"), dt = param_d(cfg, "dt");
  if (!(dt > 0) || !(t_max >= 0)) throw ConfigError("cone time grid needs dt > 0 and t_max >= 0");
  std::vector<double> times;
  for (long k = 0; k * dt <= t_max + 1e-12; ++k) times.push_back(k * dt);
  LRProbeResult pr = lr_probe(h, path.volume(), lat, ox, oys, times, param_d(cfg, "rel_threshold"), threads);

  RunResult r;
  r.columns = {"site", "distance", "time", "norm", "relative"};
  const double scale = 2.0 * op_norm(single) * op_norm(single);
  double max_rel = 0;
  for (std::size_t j = 0; j < oys.size(); ++j) {
    for (std::size_t it = 0; it < times.size(); ++it) {
      const double nrm = pr.norms[j][it];
      max_rel = std::max(max_rel, nrm / scale);
      r.rows.push_back({fmt_int(oys[j].support[0]), fmt_int(pr.distances[j]), format_number(times[it]), format_number(nrm),
                        format_number(nrm / scale)});
    }
  }
  const double tc = param_d(cfg, "check_time");
  const int dc = param_i(cfg, "check_distance");
  double check = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < oys.size(); ++j) {
    if (pr.distances[j] != dc) continue;
    for (std::size_t it = 0; it < times.size(); ++it)
      if (std::abs(times[it] - tc) < 1e-9) check = std::max(std::isnan(check) ? 0.0 : check, pr.norms[j][it] / scale);
  }
  json crossings = json::array();
  for (std::size_t j = 0; j < oys.size(); ++j)
    crossings.push_back({{"distance", pr.distances[j]}, {"time", number_or_null(pr.crossing_times[j])}});
  if (model_kind(cfg.model) == "free") {
    const bool ok = max_rel <= tol(cfg, "zero_tol");
    r.summary = {{"max_relative_norm", max_rel}, {"zero_pass", ok}, {"crossings", crossings}};
    r.pass = ok;
    return r;
  }
  const bool v_ok = std::isfinite(pr.velocity);
  const bool outside = v_ok && dc > pr.velocity * tc + pr.intercept;
  const bool small = std::isfinite(check) && check <= tol(cfg, "outside_rel");
  r.summary = {{"velocity", number_or_null(pr.velocity)},
               {"intercept", pr.intercept},
               {"fit_residual", pr.fit_residual},
               {"threshold", pr.threshold},
               {"check", {{"time", tc}, {"distance", dc}, {"relative_norm", number_or_null(check)}, {"outside_cone", outside}}},
               {"crossings", crossings},
               {"velocity_finite", v_ok},
               {"outside_small", small}};
  r.pass = v_ok && outside && small;
  return r;
}

// ---------------------------------------------------------------- kubo

RunResult run_kubo(const RunConfig& cfg, int threads) {
  const Selector sel = selector_from_json(cfg.patch);
  const FilterFunction w = filter_of(cfg);
  const auto alphas = get_as<std::vector<double>>(cfg.params, "alpha", "params.");
  const auto deltas_rel = get_as<std::vector<double>>(cfg.params, "deltas_rel", "params.");
  const auto volume_eps = get_as<std::vector<double>>(cfg.params, "volume_eps", "params.");
  const std::string pert = param_s(cfg, "perturbation");
  std::vector<double> deltas;
  for (double d : deltas_rel) deltas.push_back(d * cfg.gamma);

  struct PerL {
    ResponseSetup setup;
    KuboValue f;
    KuboIntegral fi;
    double energy = 0;
  };
  std::vector<PerL> per(cfg.l_grid.size());
  for (std::size_t li = 0; li < cfg.l_grid.size(); ++li) {
    Lattice lat = lattice_for(cfg, cfg.l_grid[li]);
    auto sch = make_model(cfg.model, cfg.schedule, lat, cfg.custom);
    PerL& p = per[li];
    p.setup.h_init = sch->eval(cfg.s_grid.front(), 0);
    if (pert == "field_x") {
      p.setup.v = field(lat, pauli::x(), -1.0);
    } else if (pert == "field_z") {
      p.setup.v = field(lat, pauli::z(), -1.0);
    } else if (pert == "coupling_zz") {
      p.setup.v = tfim_coupling(lat);
    } else {
      throw ConfigError("unknown perturbation '" + pert + "'");
    }
    p.setup.j = named_observable(cfg.observable, lat);
    p.setup.volume = Volume::of(lat);
    p.setup.selector = sel;
    p.setup.s_trunc = param_d(cfg, "s_trunc");
    p.setup.max_step = param_d(cfg, "max_step");
    p.setup.method = parse_integrator(cfg.integrator);
    const Mat h0 = assemble_hamiltonian(p.setup.h_init, p.setup.volume);
    const Mat v = assemble_hamiltonian(p.setup.v, p.setup.volume);
    const Mat j = embed(p.setup.j, p.setup.volume);
    p.f = kubo_commutator(h0, v, j, w, sel);
    p.fi = kubo_time_integral(h0, v, j, deltas, sel);
    p.energy = std::abs(kubo_commutator(h0, v, h0, w, sel).value);
  }

  struct Job {
    std::size_t li;
    double alpha, eps;
  };
  std::vector<Job> jobs;
  for (std::size_t li = 0; li < cfg.l_grid.size(); ++li)
    for (double a : alphas)
      for (double e : (li == 0 ? cfg.eps_grid : volume_eps)) jobs.push_back({li, a, e});
  std::vector<DrivenResponse> out(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t k) {
    ResponseSetup s = per[jobs[k].li].setup;
    s.alpha = jobs[k].alpha;
    s.epsilon = jobs[k].eps;
    out[k] = switched_evolution(s);
  });

  RunResult r;
  r.columns = {"L", "alpha", "epsilon", "omega_driven", "omega_ground", "f_commutator", "f_time_integral", "residual"};
  std::map<std::pair<std::size_t, double>, std::vector<std::pair<double, double>>> by_la;  // (L, alpha) -> (eps, r)
  std::map<std::pair<double, double>, std::vector<double>> by_ea;                          // (eps, alpha) -> r over L
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const PerL& p = per[jobs[k].li];
    const double a = jobs[k].alpha;
    // alpha = 0 has no response to normalize; the numerator vanishes identically
    const double res = a == 0.0 ? 0.0 : (out[k].omega_driven - out[k].omega_ground - a * p.f.value) / a;
    r.rows.push_back({fmt_int(cfg.l_grid[jobs[k].li]), format_number(a), format_number(jobs[k].eps),
                      format_number(out[k].omega_driven), format_number(out[k].omega_ground), format_number(p.f.value),
                      format_number(p.fi.extrapolated), format_number(res)});
    if (a != 0.0) {
      by_la[{jobs[k].li, a}].push_back({jobs[k].eps, res});
      by_ea[{jobs[k].eps, a}].push_back(std::abs(res));
    }
  }
  bool pass = true;
  json formula = json::array();
  for (std::size_t li = 0; li < per.size(); ++li) {
    const double diff = std::abs(per[li].fi.extrapolated - per[li].f.value);
    const bool ok = diff <= tol(cfg, "formula_tol") && per[li].energy <= tol(cfg, "energy_tol");
    pass = pass && ok;
    formula.push_back({{"L", cfg.l_grid[li]},
                       {"f_commutator", per[li].f.value},
                       {"f_time_integral", per[li].fi.extrapolated},
                       {"f_exact_limit", per[li].fi.exact_limit},
                       {"difference", diff},
                       {"energy_response", per[li].energy},
                       {"pass", ok}});
  }
  json mono = json::array();
  for (auto& [key, v] : by_la) {
    if (v.size() < 2) continue;
    std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.first > b.first; });  // eps descending
    bool dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) dec = dec && std::abs(v[i].second) < std::abs(v[i - 1].second);
    pass = pass && dec;
    mono.push_back({{"L", cfg.l_grid[key.first]}, {"alpha", key.second}, {"strictly_decreasing", dec}});
  }
  json vol = json::array();
  for (auto& [key, v] : by_ea) {
    if (v.size() < 2) continue;
    const double ratio = max_ratio(v);
    const bool ok = ratio < tol(cfg, "volume_factor");
    pass = pass && ok;
    vol.push_back({{"epsilon", key.first}, {"alpha", key.second}, {"ratio", number_or_null(ratio)}, {"pass", ok}});
  }
  r.summary = {{"formula", formula}, {"monotone", mono}, {"volume", vol}};
  r.pass = pass;
  return r;
}

// ---------------------------------------------------------------- product-oracle

RunResult run_product(const RunConfig& cfg, int threads) {
  if (model_kind(cfg.model) != "free") throw ConfigError("product-oracle needs a free (single-site) model");
  const Selector sel = Selector::lowest_k(1);
  const EvolveOptions evo = evolve_options(cfg);
  const double eps = cfg.eps_grid.front();
  const std::string initial = param_s(cfg, "initial");
  if (initial != "ground" && initial != "random") throw ConfigError("params.initial must be ground or random");
  Lattice one = make_chain(1);
  HamiltonianPath single(make_model(cfg.model, cfg.schedule, one), Volume::of(one));
  const Vec g0 = diagonalize_and_patch(single.dense(cfg.s_grid.front()), sel).second.basis.col(0);
  std::vector<Mat> p_single;
  for (double s : cfg.s_grid) p_single.push_back(diagonalize_and_patch(single.dense(s), sel).second.projector);

  struct Row {
    std::vector<double> lhs, rhs;
  };
  std::vector<Row> rows(cfg.l_grid.size());
  parallel_for(rows.size(), threads, [&](std::size_t li) {
    const int L = cfg.l_grid[li];
    std::mt19937_64 rng(cfg.seed + static_cast<std::uint64_t>(L));
    std::normal_distribution<double> nd;
    // single-site initial states and their separate evolutions
    std::vector<Trajectory> sites;
    Vec full0 = Vec::Ones(1);
    for (int x = 0; x < L; ++x) {
      Vec v = g0;
      if (initial == "random") {
        v = Vec(2);
        v << cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng));
        v.normalize();
      }
      sites.push_back(evolve_state(single, eps, v, cfg.s_grid, evo));
      Vec k(full0.size() * 2);
      for (Eigen::Index i = 0; i < full0.size(); ++i) k.segment(2 * i, 2) = full0(i) * v;
      full0 = k;
    }
    Lattice lat = lattice_for(cfg, L);
    HamiltonianPath path(make_model(cfg.model, cfg.schedule, lat), Volume::of(lat));
    Trajectory tr = evolve_state(path, eps, full0, cfg.s_grid, evo);
    Row row;
    for (std::size_t i = 0; i < cfg.s_grid.size(); ++i) {
      PatchData p = diagonalize_and_patch(path.dense(cfg.s_grid[i]), sel).second;
      Vec psi = tr.state(i);
      row.lhs.push_back((psi - p.projector * psi).squaredNorm());
      double prod = 1.0;
      for (int x = 0; x < L; ++x) prod *= (p_single[i] * sites[static_cast<std::size_t>(x)].state(i)).squaredNorm();
      row.rhs.push_back(1.0 - prod);
    }
    rows[li] = row;
  });
  RunResult r;
  r.columns = {"L", "s", "epsilon", "leak_full", "leak_product", "difference"};
  double worst = 0;
  for (std::size_t li = 0; li < rows.size(); ++li) {
    for (std::size_t i = 0; i < cfg.s_grid.size(); ++i) {
      const double d = std::abs(rows[li].lhs[i] - rows[li].rhs[i]);
      worst = std::max(worst, d);
      r.rows.push_back({fmt_int(cfg.l_grid[li]), format_number(cfg.s_grid[i]), format_number(eps), format_number(rows[li].lhs[i]),
                        format_number(rows[li].rhs[i]), format_number(d)});
    }
  }
  r.summary = {{"max_difference", worst}, {"initial", initial}};
  r.pass = worst <= tol(cfg, "identity_tol");
  return r;
}

void check_positive_sorted(const std::vector<double>& v, const std::string& what) {
  for (double x : v)
    if (!(x > 0) || !std::isfinite(x)) throw ConfigError(what + " values must be positive");
  (void)what;
}

}  // namespace

std::vector<std::string> list_experiments() { return kExperiments; }

std::string format_number(double x) {
  if (x == 0.0) return "0";
  if (!std::isfinite(x)) return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", x);
  return buf;
}

Selector selector_from_json(const json& j) {
  if (j.is_null()) return Selector::lowest_k(1);
  const std::string kind = get_as<std::string>(j, "select", "patch.");
  if (kind == "lowest_k") {
    int k = j.value("k", 1);
    if (k < 1) throw ConfigError("patch.k must be positive");
    return Selector::lowest_k(k);
  }
  if (kind == "window") return Selector::window(get_as<double>(j, "lo", "patch."), get_as<double>(j, "hi", "patch."));
  if (kind == "cluster") return Selector::cluster(j.value("threshold", -1.0));
  throw ConfigError("unknown patch selector '" + kind + "'");
}

Lattice lattice_for(const RunConfig& cfg, int length) {
  if (cfg.lattice == "chain") return make_chain(length);
  if (cfg.lattice.rfind("grid:", 0) == 0) {
    int w = 0;
    try {
      w = std::stoi(cfg.lattice.substr(5));
    } catch (const std::exception&) {
      throw ConfigError("bad lattice '" + cfg.lattice + "'");
    }
    if (w < 1) throw ConfigError("bad lattice '" + cfg.lattice + "'");
    return make_grid(length, w);
  }
  throw ConfigError("lattice must be \"chain\" or \"grid:W\"");
}

LocalOperator named_observable(const std::string& id, const Lattice& lat) {
  const int mid = lat.sites()[static_cast<std::size_t>(lat.size() / 2)];
  if (id == "sx") return LocalOperator({mid}, pauli::x());
  if (id == "sy") return LocalOperator({mid}, pauli::y());
  if (id == "sz") return LocalOperator({mid}, pauli::z());
  std::vector<int> nbrs;
  for (auto [a, b] : lat.edges()) {
    if (a == mid) nbrs.push_back(b);
    if (b == mid) nbrs.push_back(a);
  }
  std::sort(nbrs.begin(), nbrs.end());
  if (nbrs.empty()) throw ConfigError("observable '" + id + "' needs a site with neighbours");
  if (id == "zz") return product_op({{mid, pauli::z()}, {nbrs.back(), pauli::z()}});
  if (id == "current") {
    // i[H_x, sigma^x_mid] / 2 for the Ising coupling: sum over neighbours of Z_nbr Y_mid
    std::vector<int> sup = nbrs;
    sup.push_back(mid);
    std::sort(sup.begin(), sup.end());
    Volume v = Volume::qubits(sup);
    Mat m = Mat::Zero(v.dim(), v.dim());
    for (int n : nbrs) m += embed(product_op({{n, pauli::z()}, {mid, pauli::y()}}), v);
    return LocalOperator(sup, m);
  }
  throw ConfigError("unknown observable '" + id + "'");
}

RunConfig parse_config(const json& in) {
  if (!in.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {"experiment", "model",  "schedule",   "lattice", "custom",     "grids",
                                              "filter",     "dressing", "integrator", "patch",   "observable", "params",
                                              "tolerances", "seed",   "output"};
  for (auto it = in.begin(); it != in.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
  RunConfig c;
  c.experiment = get_as<std::string>(in, "experiment", "");
  json d = defaults_for(c.experiment);
  // one-level merge of user keys over defaults
  json j = d;
  for (auto it = in.begin(); it != in.end(); ++it) {
    if (it.value().is_object() && j.contains(it.key()) && j[it.key()].is_object()) {
      for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) j[it.key()][jt.key()] = jt.value();
    } else {
      j[it.key()] = it.value();
    }
  }
  c.model = get_as<std::string>(j, "model", "");
  c.schedule = get_as<std::string>(j, "schedule", "");
  c.lattice = j.value("lattice", std::string("chain"));
  c.custom = j.value("custom", json());
  const json& g = j.at("grids");
  c.eps_grid = get_as<std::vector<double>>(g, "epsilon", "grids.");
  c.l_grid = get_as<std::vector<int>>(g, "L", "grids.");
  c.n_grid = get_as<std::vector<int>>(g, "n", "grids.");
  c.s_grid = get_as<std::vector<double>>(g, "s", "grids.");
  json f = j.value("filter", json::object());
  c.gamma = f.value("gamma", 0.5);
  c.interp = f.value("interp", std::string("linear"));
  json dr = j.value("dressing", json::object());
  c.dressing_n = dr.value("n", c.experiment == "endpoint-order" ? 2 : 1);
  c.fd_step = dr.value("fd_step", 1e-3);
  json ig = j.value("integrator", json::object());
  c.integrator = ig.value("method", std::string("magnus4"));
  c.max_step = ig.value("max_step", 0.0);
  c.patch = j.value("patch", json{{"select", "lowest_k"}, {"k", 1}});
  c.observable = get_as<std::string>(j, "observable", "");
  c.params = j.at("params");
  c.tolerances = j.at("tolerances");
  if (j.contains("seed") && !j.at("seed").is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
  c.seed = j.value("seed", static_cast<std::uint64_t>(1234));
  c.output = j.value("output", std::string("out"));

  // value checks
  if (c.l_grid.empty()) throw ConfigError("grids.L must not be empty");
  for (int L : c.l_grid)
    if (L < 1) throw ConfigError("grids.L values must be positive");
  check_positive_sorted(c.eps_grid, "grids.epsilon");
  const bool needs_eps = c.experiment != "cone";
  if (needs_eps && c.eps_grid.empty()) throw ConfigError("grids.epsilon must not be empty");
  if (c.s_grid.empty()) throw ConfigError("grids.s must not be empty");
  for (double s : c.s_grid)
    if (s < 0.0 || s > 1.0) throw ConfigError("grids.s values must lie in [0,1]");
  for (std::size_t i = 1; i < c.s_grid.size(); ++i)
    if (!(c.s_grid[i] > c.s_grid[i - 1])) throw ConfigError("grids.s must be strictly ascending");
  for (int n : c.n_grid)
    if (n < 0 || n > kMaxDressingOrder) throw ConfigError("grids.n values must be in 0..4");
  if (c.experiment == "dressing-order" && c.n_grid.empty()) throw ConfigError("grids.n must not be empty");
  if (c.dressing_n < 0 || c.dressing_n > kMaxDressingOrder) throw ConfigError("dressing.n must be in 0..4");
  if (!(c.gamma > 0)) throw ConfigError("filter.gamma must be positive");
  parse_interp(c.interp);
  parse_integrator(c.integrator);
  if (c.max_step < 0) throw ConfigError("integrator.max_step must be nonnegative");
  if (!(c.fd_step > 0)) throw ConfigError("dressing.fd_step must be positive");
  selector_from_json(c.patch);
  if (!c.params.is_object()) throw ConfigError("params must be an object");
  if (!c.tolerances.is_object()) throw ConfigError("tolerances must be an object");
  return c;
}

json to_json(const RunConfig& c) {
  json j = {{"experiment", c.experiment},
            {"model", c.model},
            {"schedule", c.schedule},
            {"lattice", c.lattice},
            {"grids", {{"epsilon", c.eps_grid}, {"L", c.l_grid}, {"n", c.n_grid}, {"s", c.s_grid}}},
            {"filter", {{"gamma", c.gamma}, {"interp", c.interp}}},
            {"dressing", {{"n", c.dressing_n}, {"fd_step", c.fd_step}}},
            {"integrator", {{"method", c.integrator}, {"max_step", c.max_step}}},
            {"patch", c.patch},
            {"observable", c.observable},
            {"params", c.params},
            {"tolerances", c.tolerances},
            {"seed", c.seed},
            {"output", c.output}};
  if (!c.custom.is_null()) j["custom"] = c.custom;
  return j;
}

void validate_config(const RunConfig& cfg) {
  try {
    for (int L : cfg.l_grid) {
      Lattice lat = lattice_for(cfg, L);
      if (static_cast<double>(lat.size()) > std::log2(static_cast<double>(kMaxDenseDim)) + 1e-9)
        throw ConfigError("L=" + std::to_string(L) + " exceeds the dense dimension limit");
      auto sch = make_model(cfg.model, cfg.schedule, lat, cfg.custom);
      (void)sch;
      named_observable(cfg.observable, lat);
    }
  } catch (const DomainError& ex) {
    throw ConfigError(ex.what());
  }
}

RunResult run_experiment(const RunConfig& cfg, int threads) {
  validate_config(cfg);
  const std::string ctx = "experiment " + cfg.experiment + ": ";
  try {
    if (cfg.experiment == "adiabatic-scaling") return run_scaling(cfg, threads);
    if (cfg.experiment == "endpoint-order") return run_endpoint(cfg, threads);
    if (cfg.experiment == "volume-scan") return run_volume(cfg, threads);
    if (cfg.experiment == "dressing-order") return run_dressing(cfg, threads);
    if (cfg.experiment == "cone") return run_cone(cfg, threads);
    if (cfg.experiment == "kubo") return run_kubo(cfg, threads);
    if (cfg.experiment == "product-oracle") return run_product(cfg, threads);
  } catch (const ConfigError& ex) {
    throw ConfigError(ctx + ex.what());
  } catch (const GapError& ex) {
    throw GapError(ctx + ex.what());
  } catch (const NumericalError& ex) {
    throw NumericalError(ctx + ex.what());
  } catch (const DomainError& ex) {
    throw DomainError(ctx + ex.what());
  }
  throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

void write_outputs(const RunConfig& cfg, const RunResult& res, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base = std::filesystem::path(dir) / cfg.experiment;
  {
    std::ofstream csv(base.string() + ".csv", std::ios::binary);
    if (!csv) throw ConfigError("cannot write to " + dir);
    for (std::size_t i = 0; i < res.columns.size(); ++i) csv << (i ? "," : "") << res.columns[i];
    csv << "\n";
    for (const auto& row : res.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) csv << (i ? "," : "") << row[i];
      csv << "\n";
    }
  }
  json summary = {{"experiment", cfg.experiment}, {"config", to_json(cfg)}, {"pass", res.pass}, {"results", res.summary}};
  std::ofstream js(base.string() + ".summary.json", std::ios::binary);
  if (!js) throw ConfigError("cannot write to " + dir);
  js << summary.dump(2) << "\n";
}

}  // namespace adiaspec
