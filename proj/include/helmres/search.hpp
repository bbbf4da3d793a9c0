// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "helmres/dtn.hpp"
#include "helmres/geometry.hpp"

namespace helmres
{

/// Rectangle [re_min, re_max] x [im_min, im_max] in the open lower half-plane,
/// sampled on the lattice (1/n)(Z + iZ).
struct ScanRegion
{
  double re_min = 0.0;
  double re_max = 0.0;
  double im_min = 0.0;
  double im_max = 0.0;
  int n = 1000;
  std::optional<int> index;

  /// ParameterError unless re_min <= re_max, im_min <= im_max < 0.
  void validate() const;
  bool contains(Complex k) const;
};

struct ResonanceCandidate
{
  Complex k;
  double absdet = 0.0;
  int n = 0;
  bool refined = false;
  double refine_tol = 0.0;
};

enum class ThresholdMode
{
  paper,
  minima
};

std::string to_string(ThresholdMode mode);
ThresholdMode threshold_mode_from_string(const std::string &name);

/// k -> det of the truncated operator.
using DetFunction = std::function<LogDet(Complex)>;

DetFunction det_function(const OperatorBuilder &builder);

struct ScanResult
{
  ScanRegion region;
  /// Lattice indices: k = (a + i b) / n for a in [a0, a0 + cols), b in [b0, b0 + rows).
  int a0 = 0;
  int b0 = 0;
  int rows = 0;
  int cols = 0;
  /// Row-major over (b, a): imaginary part outer, both ascending.
  std::vector<Complex> k;
  std::vector<double> log_abs_det;
  std::vector<ResonanceCandidate> selected;

  std::size_t size() const { return k.size(); }
  double at(int row, int col) const { return log_abs_det[static_cast<std::size_t>(row) * cols + col]; }
};

/// 1 / log(n); ParameterError for n < 2.
double paper_threshold(int n);

/// Evaluates det on G_n intersected with the region (threads merged in
/// row-major order) and selects candidates. ParameterError for n < 2 or an
/// empty intersection.
ScanResult scan(const ScanRegion &region, const DetFunction &det, ThresholdMode mode = ThresholdMode::paper,
                std::optional<double> threshold = std::nullopt, unsigned threads = 0);

/// Paper mode: grid points with |det| <= threshold (default 1/log n).
/// Minima mode: strict 8-neighbour minima of |det| away from the border. The
/// row adjacent to the real axis (Im k = -1/n) counts as interior.
std::vector<ResonanceCandidate> threshold_select(const ScanResult &grid, ThresholdMode mode,
                                                 std::optional<double> threshold = std::nullopt);

struct RefineOptions
{
  double stop_tol = 1e-7;
  double fd_step = 1e-6;
  double min_step = 1e-12;
  int max_iterations = 10000;
  /// Iterates are kept at Im k <= -im_floor.
  double im_floor = 1e-5;
};

/// Backtracking descent on |det|^2 with central-difference gradient.
/// Returns refined = true when |det| < stop_tol; a stalled line search
/// returns the best iterate with refined = false. RefineError after
/// max_iterations.
ResonanceCandidate refine(Complex k0, const DetFunction &det, const RefineOptions &options = {});

struct LocalizeOptions
{
  double radius = 0.1;
  /// Points on the circle used for the background estimate.
  int samples = 16;
  int max_iterations = 50;
  RefineOptions refine;
};

/// Newton on det'/det - b inside the disk |k - center| < radius, where b is
/// the circle mean of det'/det (the smooth background of the log-derivative),
/// followed by refine(). Useful where |det| varies over many decades and
/// descent from a distant seed drifts. RefineError when an iterate leaves
/// the disk; ParameterError unless the disk lies in the lower half-plane.
ResonanceCandidate localize(Complex center, const DetFunction &det, const LocalizeOptions &options = {});

/// Tile j >= 1 of the counterclockwise spiral tiling of the lower half-plane.
/// Columns have unit width; rows below Im = -1 unit height, rows above it
/// heights 1/2, 1/4, ... towards the real axis.
ScanRegion spiral_tiles(int j, int n = 1000);

struct RadiusResult
{
  double R = 0.0;
  double r = 0.0;
  std::size_t hits = 0;
  std::size_t queries = 0;
  /// Largest |j| over lattice hits of U in B_r.
  double max_hit_radius = 0.0;
};

/// Radius-locating sweep: chi_U is tested on step Z^2 within B_r; while some
/// hit has |j| > R - 1, r grows by 1 and R := r; an accepted step grows r by
/// 1. Steps repeat until an accepted sweep has covered B_{bound_radius}, after
/// which R is constant. NotFoundError once r exceeds r_cap.
RadiusResult locate_radius(const Obstacle &obstacle, double step, double R0 = 1.0, double r0 = 1.0,
                           double r_cap = 100.0);

/// Hausdorff distance of finite sets; +inf when exactly one is empty, 0 for two empty sets.
double hausdorff_distance(const std::vector<Complex> &a, const std::vector<Complex> &b);

/// Attouch-Wets sum truncated at n = window. The inner sup over |x| < n is
/// taken over the points of both sets in the disk and a polar sample of it.
double set_distance(const std::vector<Complex> &a, const std::vector<Complex> &b, int window);

}  // namespace helmres
