// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "helmres/geometry.hpp"

namespace helmres
{

enum class NodeClass
{
  interior,
  inner_boundary,
  outer_boundary
};

const char *to_string(NodeClass c);

/// Neighbourhood a grid point needs inside O to join the lattice.
enum class Stencil
{
  /// [i-1, i+2] x [j-1, j+2], the 16-point cell neighbourhood.
  cell16,
  /// [i-1, i+1] x [j-1, j+1]; leaves a thinner rim for fitted meshes.
  compact9
};

/// Membership of hZ^2 in O = B_R \ closure(U), and the set L_h of grid
/// points whose 16 neighbours [i-1, i+2] x [j-1, j+2] all lie in O.
class Lattice
{
public:
  Lattice(double R, double h, int extent);

  double R() const { return R_; }
  double h() const { return h_; }
  int extent() const { return extent_; }

  Point point(int i, int j) const { return {i * h_, j * h_}; }
  bool in_range(int i, int j) const
  {
    return i >= -extent_ && i <= extent_ && j >= -extent_ && j <= extent_;
  }
  /// Grid point lies in O. False outside the stored range.
  bool in_domain(int i, int j) const { return in_range(i, j) && domain_[flat(i, j)]; }
  /// chi_U at the grid point, queried only inside B_R.
  bool in_obstacle(int i, int j) const { return in_range(i, j) && obstacle_[flat(i, j)]; }
  bool member(int i, int j) const { return in_range(i, j) && member_[flat(i, j)]; }

  const std::vector<std::pair<int, int>> &members() const { return members_; }
  std::size_t oracle_queries() const { return queries_; }

private:
  friend Lattice build_lattice(const Obstacle &, double, double, Stencil);

  std::size_t flat(int i, int j) const
  {
    const std::size_t w = 2 * static_cast<std::size_t>(extent_) + 1;
    return static_cast<std::size_t>(i + extent_) * w + static_cast<std::size_t>(j + extent_);
  }

  double R_;
  double h_;
  int extent_;
  std::vector<char> domain_;
  std::vector<char> obstacle_;
  std::vector<char> member_;
  std::vector<std::pair<int, int>> members_;
  std::size_t queries_ = 0;
};

/// Requires h < 0.5 and h < 1/curvature_bound when known (ContractError).
/// Throws MeshError when L_h is empty.
Lattice build_lattice(const Obstacle &obstacle, double R, double h, Stencil stencil = Stencil::cell16);

struct TriMesh
{
  double h = 0.0;
  double R = 0.0;
  std::vector<Point> nodes;
  /// Counterclockwise node triples.
  std::vector<std::array<int, 3>> triangles;
  std::vector<NodeClass> node_class;
  /// Grid coordinates of unsnapped nodes.
  std::vector<std::optional<std::pair<int, int>>> lattice_index;
  bool outer_snapped = false;
  bool inner_snapped = false;
  std::size_t oracle_queries = 0;

  std::size_t num_nodes() const { return nodes.size(); }
  double triangle_area(std::size_t t) const;
  double area() const;
  double min_triangle_area() const;
  std::vector<int> nodes_of_class(NodeClass c) const;
};

/// Two triangles per grid cell whose four corners are all in L_h, split
/// along the lower-left to upper-right diagonal. A node is on the boundary
/// when one of its four incident cells is missing; boundary nodes within
/// 3 sqrt(2) h of |x| = R (and nearer to that circle than to any grid hit
/// of U) are outer_boundary, the rest inner_boundary.
TriMesh triangulate(const Lattice &lattice);

TriMesh build_mesh(const Obstacle &obstacle, double R, double h, Stencil stencil = Stencil::cell16);

struct SnapOptions
{
  bool outer = true;
  bool inner = true;
  /// Triangles with area at or below this multiple of h^2 are repaired.
  double min_area_factor = 0.05;
  /// Laplacian smoothing sweeps over interior nodes after snapping. A sweep
  /// that would push a triangle below the area threshold is undone.
  int smoothing_sweeps = 0;
};

/// Moves inner_boundary nodes to their nearest point on dU and projects
/// outer_boundary nodes radially onto |x| = R, then collapses the vertices
/// of degenerate or inverted triangles into neighbouring boundary nodes.
/// Inner snapping needs a boundary parametrization (UnsupportedError).
/// Throws SnapError when the result is not a valid conforming mesh.
TriMesh snap_boundary(const TriMesh &mesh, const Obstacle &obstacle, const SnapOptions &options = {});

/// Orientation, minimum area and edge-manifold checks; throws MeshError.
void check_mesh(const TriMesh &mesh, double min_area);

/// Plain-text export: `#nodes` (x y class) then `#triangles` (i j k).
void write_mesh(std::ostream &out, const TriMesh &mesh);

}  // namespace helmres
