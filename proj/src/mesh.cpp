// SPDX-License-Identifier: Apache-2.0
#include "helmres/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "helmres/errors.hpp"

namespace helmres
{

const char *to_string(NodeClass c)
{
  switch (c) {
  case NodeClass::interior:
    return "interior";
  case NodeClass::inner_boundary:
    return "inner_boundary";
  case NodeClass::outer_boundary:
    return "outer_boundary";
  }
  return "interior";
}

Lattice::Lattice(double R, double h, int extent) : R_(R), h_(h), extent_(extent)
{
  const std::size_t w = 2 * static_cast<std::size_t>(extent) + 1;
  domain_.assign(w * w, 0);
  obstacle_.assign(w * w, 0);
  member_.assign(w * w, 0);
}

Lattice build_lattice(const Obstacle &obstacle, double R, double h, Stencil stencil)
{
  if (!(R > 0.0)) {
    throw ContractError("R must be positive");
  }
  if (!(h > 0.0 && h < 0.5)) {
    throw ContractError("mesh size h must satisfy 0 < h < 0.5");
  }
  if (const auto kappa = obstacle.curvature_bound(); kappa && !(h < 1.0 / *kappa)) {
    throw ContractError("mesh size h must be below 1/curvature bound = " + std::to_string(1.0 / *kappa));
  }
  const int extent = static_cast<int>(std::ceil(R / h)) + 3;
  Lattice lat(R, h, extent);
  for (int i = -extent; i <= extent; ++i) {
    for (int j = -extent; j <= extent; ++j) {
      const Point p = lat.point(i, j);
      if (p.norm() >= R) {
        continue;
      }
      ++lat.queries_;
      const bool hit = obstacle.contains(p);
      lat.obstacle_[lat.flat(i, j)] = hit;
      lat.domain_[lat.flat(i, j)] = !hit;
    }
  }
  for (int j = -extent + 1; j < extent - 1; ++j) {
    for (int i = -extent + 1; i < extent - 1; ++i) {
      if (!lat.domain_[lat.flat(i, j)]) {
        continue;
      }
      bool all = true;
      const int hi = stencil == Stencil::cell16 ? 2 : 1;
      for (int a = -1; a <= hi && all; ++a) {
        for (int b = -1; b <= hi && all; ++b) {
          all = lat.in_domain(i + a, j + b);
        }
      }
      if (all) {
        lat.member_[lat.flat(i, j)] = 1;
        lat.members_.emplace_back(i, j);
      }
    }
  }
  if (lat.members_.empty()) {
    throw MeshError("mesh too coarse: the lattice L_h is empty");
  }
  return lat;
}

double TriMesh::triangle_area(std::size_t t) const
{
  const auto &[a, b, c] = triangles[t];
  const Point u = nodes[b] - nodes[a];
  const Point v = nodes[c] - nodes[a];
  return 0.5 * (u.x() * v.y() - u.y() * v.x());
}

double TriMesh::area() const
{
  double total = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    total += triangle_area(t);
  }
  return total;
}

double TriMesh::min_triangle_area() const
{
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    m = std::min(m, triangle_area(t));
  }
  return m;
}

std::vector<int> TriMesh::nodes_of_class(NodeClass c) const
{
  std::vector<int> out;
  for (std::size_t v = 0; v < node_class.size(); ++v) {
    if (node_class[v] == c) {
      out.push_back(static_cast<int>(v));
    }
  }
  return out;
}

namespace
{

bool is_cell(const Lattice &lat, int i, int j)
{
  return lat.member(i, j) && lat.member(i + 1, j) && lat.member(i, j + 1) && lat.member(i + 1, j + 1);
}

// Outer when within 3 sqrt(2) h of the circle and no grid hit of U is
// nearer than the circle itself.
bool is_outer(const Lattice &lat, int i, int j)
{
  const double h = lat.h();
  const Point x = lat.point(i, j);
  const double gap = lat.R() - x.norm();
  if (gap > 3.0 * std::sqrt(2.0) * h + 1e-12) {
    return false;
  }
  const int reach = static_cast<int>(std::ceil(gap / h));
  for (int a = -reach; a <= reach; ++a) {
    for (int b = -reach; b <= reach; ++b) {
      if (lat.in_obstacle(i + a, j + b) && (lat.point(i + a, j + b) - x).norm() < gap) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TriMesh triangulate(const Lattice &lat)
{
  TriMesh mesh;
  mesh.h = lat.h();
  mesh.R = lat.R();
  mesh.oracle_queries = lat.oracle_queries();

  std::map<std::pair<int, int>, int> id;
  const int e = lat.extent();
  for (int j = -e; j <= e; ++j) {
    for (int i = -e; i <= e; ++i) {
      if (!lat.member(i, j)) {
        continue;
      }
      const bool used = is_cell(lat, i, j) || is_cell(lat, i - 1, j) || is_cell(lat, i, j - 1) ||
                        is_cell(lat, i - 1, j - 1);
      if (!used) {
        continue;
      }
      id[{i, j}] = static_cast<int>(mesh.nodes.size());
      mesh.nodes.push_back(lat.point(i, j));
      mesh.lattice_index.emplace_back(std::make_pair(i, j));
      const bool boundary = !(is_cell(lat, i, j) && is_cell(lat, i - 1, j) && is_cell(lat, i, j - 1) &&
                              is_cell(lat, i - 1, j - 1));
      NodeClass c = NodeClass::interior;
      if (boundary) {
        c = is_outer(lat, i, j) ? NodeClass::outer_boundary : NodeClass::inner_boundary;
      }
      mesh.node_class.push_back(c);
    }
  }
  for (int j = -e; j <= e; ++j) {
    for (int i = -e; i <= e; ++i) {
      if (!is_cell(lat, i, j)) {
        continue;
      }
      const int a = id.at({i, j});
      const int b = id.at({i + 1, j});
      const int c = id.at({i + 1, j + 1});
      const int d = id.at({i, j + 1});
      mesh.triangles.push_back({a, b, c});
      mesh.triangles.push_back({a, c, d});
    }
  }
  if (mesh.triangles.empty()) {
    throw MeshError("mesh too coarse: no complete lattice cell");
  }
  return mesh;
}

TriMesh build_mesh(const Obstacle &obstacle, double R, double h, Stencil stencil)
{
  return triangulate(build_lattice(obstacle, R, h, stencil));
}

void check_mesh(const TriMesh &mesh, double min_area)
{
  const int n = static_cast<int>(mesh.nodes.size());
  if (mesh.node_class.size() != mesh.nodes.size() || mesh.lattice_index.size() != mesh.nodes.size()) {
    throw MeshError("node arrays have inconsistent sizes");
  }
  std::vector<char> used(n, 0);
  // edge -> (count, orientation sum)
  std::map<std::pair<int, int>, std::pair<int, int>> edges;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &tri = mesh.triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= n) {
        throw MeshError("triangle " + std::to_string(t) + " references a missing node");
      }
      used[v] = 1;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw MeshError("triangle " + std::to_string(t) + " repeats a vertex");
    }
    const double area = mesh.triangle_area(t);
    if (!(area > min_area)) {
      throw MeshError("triangle " + std::to_string(t) + " has area " + std::to_string(area) +
                      " (minimum " + std::to_string(min_area) + ")");
    }
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      auto &slot = edges[{std::min(a, b), std::max(a, b)}];
      slot.first += 1;
      slot.second += a < b ? 1 : -1;
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!used[v]) {
      throw MeshError("node " + std::to_string(v) + " belongs to no triangle");
    }
  }
  for (const auto &[edge, slot] : edges) {
    if (slot.first > 2 || (slot.first == 2 && slot.second != 0)) {
      throw MeshError("edge (" + std::to_string(edge.first) + ", " + std::to_string(edge.second) +
                      ") is not shared conformingly");
    }
    if (slot.first == 1 && (mesh.node_class[edge.first] == NodeClass::interior ||
                            mesh.node_class[edge.second] == NodeClass::interior)) {
      throw MeshError("interior node on the mesh boundary at edge (" + std::to_string(edge.first) +
                      ", " + std::to_string(edge.second) + ")");
    }
  }
}

TriMesh snap_boundary(const TriMesh &input, const Obstacle &obstacle, const SnapOptions &options)
{
  TriMesh mesh = input;
  const std::size_t n = mesh.nodes.size();
  std::vector<char> moved(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (mesh.node_class[v] == NodeClass::outer_boundary && options.outer) {
      mesh.nodes[v] *= mesh.R / mesh.nodes[v].norm();
      moved[v] = 1;
    } else if (mesh.node_class[v] == NodeClass::inner_boundary && options.inner) {
      mesh.nodes[v] = obstacle.boundary().nearest(mesh.nodes[v]);
      moved[v] = 1;
    }
    if (moved[v]) {
      mesh.lattice_index[v].reset();
    }
  }
  mesh.outer_snapped = mesh.outer_snapped || options.outer;
  mesh.inner_snapped = mesh.inner_snapped || (options.inner && !mesh.nodes_of_class(NodeClass::inner_boundary).empty());

  const double threshold = options.min_area_factor * mesh.h * mesh.h;
  auto &tris = mesh.triangles;
  for (std::size_t pass = 0;; ++pass) {
    if (pass > n) {
      throw SnapError("triangle repair did not terminate");
    }
    std::size_t bad = tris.size();
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (mesh.triangle_area(t) <= threshold) {
        bad = t;
        break;
      }
    }
    if (bad == tris.size()) {
      break;
    }
    // Collapse the moved vertex of the bad triangle that has the nearest
    // boundary neighbour of its own class along an edge.
    int from = -1, to = -1;
    int best_rank = 3;
    double best = std::numeric_limits<double>::infinity();
    for (int v : tris[bad]) {
      if (!moved[v]) {
        continue;
      }
      for (const auto &tri : tris) {
        if (std::find(tri.begin(), tri.end(), v) == tri.end()) {
          continue;
        }
        for (int w : tri) {
          if (w == v) {
            continue;
          }
          const int rank = mesh.node_class[w] == mesh.node_class[v] ? 0
                           : mesh.node_class[w] != NodeClass::interior ? 1
                                                                        : 2;
          const double d = (mesh.nodes[w] - mesh.nodes[v]).norm();
          if (rank < best_rank || (rank == best_rank && d < best)) {
            best_rank = rank;
            best = d;
            from = v;
            to = w;
          }
        }
      }
    }
    if (from < 0) {
      throw SnapError("degenerate triangle " + std::to_string(bad) + " has no snapped vertex");
    }
    std::vector<std::array<int, 3>> kept;
    kept.reserve(tris.size());
    for (auto tri : tris) {
      for (int &v : tri) {
        if (v == from) {
          v = to;
        }
      }
      if (tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2]) {
        kept.push_back(tri);
      }
    }
    tris.swap(kept);
    if (mesh.node_class[to] == NodeClass::interior) {
      mesh.node_class[to] = mesh.node_class[from];
    }
  }

  if (options.smoothing_sweeps > 0) {
    std::vector<std::vector<int>> incident(n);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int v : tris[t]) {
        incident[v].push_back(static_cast<int>(t));
      }
    }
    for (int sweep = 0; sweep < options.smoothing_sweeps; ++sweep) {
      for (std::size_t v = 0; v < n; ++v) {
        if (mesh.node_class[v] != NodeClass::interior || incident[v].empty()) {
          continue;
        }
        Point sum = Point::Zero();
        int count = 0;
        for (int t : incident[v]) {
          for (int w : tris[t]) {
            if (w != static_cast<int>(v)) {
              sum += mesh.nodes[w];
              ++count;
            }
          }
        }
        const Point old = mesh.nodes[v];
        mesh.nodes[v] = sum / count;
        for (int t : incident[v]) {
          if (mesh.triangle_area(t) <= threshold) {
            mesh.nodes[v] = old;
            break;
          }
        }
      }
    }
  }

  // Drop unused nodes.
  std::vector<int> remap(n, -1);
  for (const auto &tri : tris) {
    for (int v : tri) {
      remap[v] = 0;
    }
  }
  TriMesh out;
  out.h = mesh.h;
  out.R = mesh.R;
  out.outer_snapped = mesh.outer_snapped;
  out.inner_snapped = mesh.inner_snapped;
  out.oracle_queries = mesh.oracle_queries;
  for (std::size_t v = 0; v < n; ++v) {
    if (remap[v] == 0) {
      remap[v] = static_cast<int>(out.nodes.size());
      out.nodes.push_back(mesh.nodes[v]);
      out.node_class.push_back(mesh.node_class[v]);
      out.lattice_index.push_back(mesh.lattice_index[v]);
    }
  }
  for (const auto &tri : tris) {
    out.triangles.push_back({remap[tri[0]], remap[tri[1]], remap[tri[2]]});
  }
  try {
    check_mesh(out, threshold);
  } catch (const MeshError &e) {
    throw SnapError(std::string("snapped mesh invalid: ") + e.what());
  }
  return out;
}

void write_mesh(std::ostream &out, const TriMesh &mesh)
{
  out << std::setprecision(12);
  out << "#nodes\n";
  for (std::size_t v = 0; v < mesh.nodes.size(); ++v) {
    out << mesh.nodes[v].x() << ' ' << mesh.nodes[v].y() << ' ' << to_string(mesh.node_class[v]) << '\n';
  }
  out << "#triangles\n";
  for (const auto &t : mesh.triangles) {
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
}

}  // namespace helmres
