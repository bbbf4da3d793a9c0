// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "helmres/mesh.hpp"

namespace helmres
{

using Complex = std::complex<double>;

enum class BcMode
{
  dirichlet_all,
  dirichlet_outer_neumann_inner
};

/// Exact P1 element matrices of an affine triangle.
Eigen::Matrix3d element_mass(const Point &p0, const Point &p1, const Point &p2);
Eigen::Matrix3d element_stiffness(const Point &p0, const Point &p1, const Point &p2);

struct AssembledSystem
{
  std::shared_ptr<const TriMesh> mesh;
  Eigen::SparseMatrix<double> mass;
  Eigen::SparseMatrix<double> stiffness;

  /// Per node: 1 when the node carries a Dirichlet condition under `bc`.
  std::vector<char> constrained_mask(BcMode bc) const;
};

/// Throws MeshError on a degenerate or inverted triangle.
AssembledSystem assemble(std::shared_ptr<const TriMesh> mesh);

/// Sparse LU of the free-node block of S - k^2 M, reusable for any number
/// of right-hand sides.
class HelmholtzFactorization
{
public:
  /// Refuses |Im k| < 1e-6 (ContractError) unless `force` is set. Throws
  /// NearEigenvalueError when the factorization breaks down.
  HelmholtzFactorization(const AssembledSystem &system, Complex k, BcMode bc, bool force = false);

  Complex k() const { return k_; }
  BcMode bc_mode() const { return bc_; }
  const AssembledSystem &system() const { return *system_; }
  const std::vector<int> &free_nodes() const { return free_; }
  const std::vector<int> &constrained_nodes() const { return constrained_; }

  /// Lifting solve. `boundary` holds Dirichlet values on constrained nodes
  /// (one column per right-hand side, rows ordered as constrained_nodes()),
  /// `load` the weak-form volume right-hand side on all nodes. Returns the
  /// full nodal solutions.
  Eigen::MatrixXcd solve(const Eigen::MatrixXcd &boundary, const Eigen::MatrixXcd &load) const;

  /// Map-based single solve. Values on non-constrained nodes raise
  /// ContractError; missing constrained nodes default to zero.
  Eigen::VectorXcd solve_dirichlet(const std::map<int, Complex> &boundary_values,
                                   const std::map<int, Complex> &volume_rhs) const;

  /// (S - k^2 M) x on all nodes.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd &x) const;

  /// Rows of (S - k^2 M) x at the constrained nodes, ordered as constrained_nodes().
  Eigen::MatrixXcd constrained_residual(const Eigen::MatrixXcd &x) const;

private:
  const AssembledSystem *system_;
  Complex k_;
  BcMode bc_;
  std::vector<int> free_;
  std::vector<int> constrained_;
  std::vector<int> position_;  // node -> index within free_ or constrained_
  Eigen::SparseMatrix<Complex> a_ff_;
  Eigen::SparseMatrix<Complex> a_fc_;
  Eigen::SparseMatrix<Complex> a_cf_;
  Eigen::SparseMatrix<Complex> a_cc_;
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace helmres
