// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "helmres/dtn.hpp"
#include "helmres/mesh.hpp"
#include "helmres/search.hpp"

namespace helmres
{

enum class BoundaryCondition
{
  dirichlet,
  neumann
};

std::string to_string(BoundaryCondition bc);

struct RunConfig
{
  std::string obstacle = "circular_chamber";
  std::map<std::string, double> params;
  double R = 3.0;
  double h = 0.1;
  int N = 20;
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  OperatorMode mode = OperatorMode::direct;
  /// re0, re1, im0, im1.
  std::optional<std::array<double, 4>> region;
  std::optional<int> tile;
  double grid_step = 1e-3;
  ThresholdMode threshold_mode = ThresholdMode::minima;
  std::optional<double> threshold;
  double refine_tol = 1e-7;
  /// Run refine from every selected scan candidate.
  bool refine_candidates = false;
  std::optional<Complex> k0;
  /// refine: run localize() on the disk of this radius around k0 first.
  std::optional<double> localize_radius;
  std::vector<int> n_list{5, 10, 20};
  int eig_count = 10;
  unsigned threads = 0;
  std::string out;
  std::string export_mesh;
  std::string candidates;

  /// ConfigError on broken invariants: bc = neumann needs a boundary
  /// parametrization, mode = theoretical needs bc = dirichlet.
  void validate() const;
  Obstacle make_obstacle() const;
  /// Lattice density n = round(1 / grid_step).
  int lattice_density() const;
  /// The configured region, or the spiral tile; ConfigError if neither.
  ScanRegion scan_region() const;
  OperatorSettings operator_settings() const;
};

/// Sets one field from its textual value. Keys are the RunConfig field
/// names; `param` takes `name=value` and may repeat. ConfigError otherwise.
void apply_setting(RunConfig &config, const std::string &key, const std::string &value);

/// `key = value` lines, `#` starts a comment.
void parse_config(std::istream &in, RunConfig &config);
void load_config_file(const std::string &path, RunConfig &config);

/// compact9 lattice, boundary snapping and three smoothing sweeps. Inner
/// nodes are snapped whenever the obstacle has a parametrization.
std::shared_ptr<const TriMesh> build_run_mesh(const Obstacle &obstacle, double R, double h);

struct MeshSummary
{
  std::size_t nodes = 0;
  std::size_t triangles = 0;
  std::size_t boundary_nodes = 0;
  /// Smallest distance from an interior node to dU or |x| = R.
  double min_boundary_distance = 0.0;
};

MeshSummary summarize_mesh(const TriMesh &mesh, const Obstacle &obstacle);

OperatorBuilder make_builder(const RunConfig &config);

struct ScanOutput
{
  ScanResult grid;
  std::vector<ResonanceCandidate> candidates;
};

/// Scan plus, when requested, refinement of every selected candidate.
/// Candidates whose descent fails keep their grid value with refined = false.
ScanOutput run_scan(const RunConfig &config, const DetFunction &det);

struct ChamberEigenvalue
{
  double k = 0.0;
  /// Signed angular index; n != 0 appears once for each sign.
  int n = 0;
  int m = 0;
};

/// Dirichlet eigenvalues j_{|n|,m} / r_inner of the closed disk, ascending,
/// truncated after `count` entries.
std::vector<ChamberEigenvalue> chamber_eigenvalues(double r_inner, int count);

struct StudyRow
{
  int n = 0;
  ResonanceCandidate z;
  /// |z_{2n} - z_n| when 2n is also in the list.
  std::optional<double> succ_err;
};

/// For each n: N = n, h = 1/n, refine from the previous z (k0 for the first).
/// A descent that fails or moves further than 0.02 is restarted from the
/// smallest |det| on a 0.001 lattice window around the seed.
std::vector<StudyRow> convergence_study(const RunConfig &config);

/// Least-squares slope of -log2(succ_err) against log2(n).
std::optional<double> empirical_order(const std::vector<StudyRow> &rows);

/// 12 significant digits.
std::string format_number(double x);

void write_scan_csv(std::ostream &out, const ScanResult &grid);
void write_candidates_json(std::ostream &out, const std::vector<ResonanceCandidate> &candidates);
void write_candidate_json(std::ostream &out, const ResonanceCandidate &candidate);
void write_study_csv(std::ostream &out, const std::vector<StudyRow> &rows);
void write_eigs_csv(std::ostream &out, const std::vector<ChamberEigenvalue> &eigs);

}  // namespace helmres
