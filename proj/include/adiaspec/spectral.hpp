#pragma once

#include <optional>
#include <vector>

#include "adiaspec/core.hpp"
#include "adiaspec/interactions.hpp"

namespace adiaspec {

struct SpectralData {
  RVec eigenvalues;  // ascending
  Mat eigenvectors;  // columns
};

struct Selector {
  enum class Kind { LowestK, Window, Cluster };
  Kind kind = Kind::LowestK;
  int k = 1;
  double lo = 0.0, hi = 0.0;
  double threshold = -1.0;  // < 0: 1e-8 times the spectral range

  static Selector lowest_k(int k);
  static Selector window(double lo, double hi);
  static Selector cluster(double threshold = -1.0);
};

struct PatchData {
  int first = 0;  // eigenvalue indices first .. first+count-1
  int count = 0;
  Mat projector;
  double gap = 0.0;    // distance to the rest of the spectrum (+inf if none)
  double width = 0.0;  // max - min inside the patch
  Mat basis;           // orthonormal columns spanning the patch
};

SpectralData diagonalize(const Mat& h);
// uses a real symmetric solver when h has no imaginary part
PatchData select_patch(const SpectralData& spec, const Selector& sel);
std::pair<SpectralData, PatchData> diagonalize_and_patch(const Mat& h, const Selector& sel);

struct GapScan {
  std::vector<double> grid;
  std::vector<double> gaps;
  std::vector<double> widths;
  std::vector<PatchData> patches;
  double gamma_min = 0.0;
  double delta_max = 0.0;
  // set when an epsilon was supplied: delta_max <= min(eps^2, eps/|volume|)
  std::optional<bool> near_degenerate;
  double delta_bound = 0.0;
};

GapScan gap_along_path(const HamiltonianPath& path, const std::vector<double>& grid, const Selector& sel,
                       std::optional<double> eps = std::nullopt);

}  // namespace adiaspec
