// SPDX-License-Identifier: Apache-2.0
#include "helmres/fem.hpp"

#include <cmath>
#include <string>

#include "helmres/errors.hpp"

namespace helmres
{

namespace
{

double signed_area(const Point &p0, const Point &p1, const Point &p2)
{
  return 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) - (p1.y() - p0.y()) * (p2.x() - p0.x()));
}

}  // namespace

Eigen::Matrix3d element_mass(const Point &p0, const Point &p1, const Point &p2)
{
  const double area = std::abs(signed_area(p0, p1, p2));
  Eigen::Matrix3d m = Eigen::Matrix3d::Constant(1.0);
  m.diagonal().setConstant(2.0);
  return m * (area / 12.0);
}

Eigen::Matrix3d element_stiffness(const Point &p0, const Point &p1, const Point &p2)
{
  const double area = std::abs(signed_area(p0, p1, p2));
  const Point p[3] = {p0, p1, p2};
  double b[3], c[3];
  for (int i = 0; i < 3; ++i) {
    const Point &pj = p[(i + 1) % 3];
    const Point &pk = p[(i + 2) % 3];
    b[i] = pj.y() - pk.y();
    c[i] = pk.x() - pj.x();
  }
  Eigen::Matrix3d k;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      k(i, j) = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
    }
  }
  return k;
}

std::vector<char> AssembledSystem::constrained_mask(BcMode bc) const
{
  std::vector<char> mask(mesh->num_nodes(), 0);
  for (std::size_t v = 0; v < mask.size(); ++v) {
    const NodeClass c = mesh->node_class[v];
    mask[v] = c == NodeClass::outer_boundary || (c == NodeClass::inner_boundary && bc == BcMode::dirichlet_all);
  }
  return mask;
}

AssembledSystem assemble(std::shared_ptr<const TriMesh> mesh)
{
  const int n = static_cast<int>(mesh->num_nodes());
  std::vector<Eigen::Triplet<double>> tm, ts;
  tm.reserve(9 * mesh->triangles.size());
  ts.reserve(9 * mesh->triangles.size());
  for (std::size_t t = 0; t < mesh->triangles.size(); ++t) {
    const auto &tri = mesh->triangles[t];
    const Point &p0 = mesh->nodes[tri[0]];
    const Point &p1 = mesh->nodes[tri[1]];
    const Point &p2 = mesh->nodes[tri[2]];
    if (!(signed_area(p0, p1, p2) > 0.0)) {
      throw MeshError("degenerate or inverted triangle " + std::to_string(t) + " in assembly");
    }
    const Eigen::Matrix3d me = element_mass(p0, p1, p2);
    const Eigen::Matrix3d ke = element_stiffness(p0, p1, p2);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        tm.emplace_back(tri[i], tri[j], me(i, j));
        ts.emplace_back(tri[i], tri[j], ke(i, j));
      }
    }
  }
  AssembledSystem sys;
  sys.mesh = std::move(mesh);
  sys.mass.resize(n, n);
  sys.stiffness.resize(n, n);
  sys.mass.setFromTriplets(tm.begin(), tm.end());
  sys.stiffness.setFromTriplets(ts.begin(), ts.end());
  return sys;
}

HelmholtzFactorization::HelmholtzFactorization(const AssembledSystem &system, Complex k, BcMode bc, bool force)
  : system_(&system), k_(k), bc_(bc)
{
  if (!force && std::abs(k.imag()) < 1e-6) {
    throw ContractError("wavenumber too close to the real axis (|Im k| < 1e-6); pass force to override");
  }
  const auto mask = system.constrained_mask(bc);
  const int n = static_cast<int>(mask.size());
  position_.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    auto &list = mask[v] ? constrained_ : free_;
    position_[v] = static_cast<int>(list.size());
    list.push_back(v);
  }
  if (free_.empty()) {
    throw MeshError("mesh has no free nodes");
  }

  const Complex k2 = k * k;
  std::vector<Eigen::Triplet<Complex>> tff, tfc, tcf, tcc;
  tff.reserve(system.stiffness.nonZeros());
  for (int col = 0; col < system.stiffness.outerSize(); ++col) {
    Eigen::SparseMatrix<double>::InnerIterator s(system.stiffness, col);
    Eigen::SparseMatrix<double>::InnerIterator m(system.mass, col);
    // Mass and stiffness share the P1 pattern.
    for (; s; ++s, ++m) {
      const int row = static_cast<int>(s.row());
      const Complex value = s.value() - k2 * m.value();
      if (mask[row]) {
        (mask[col] ? tcc : tcf).emplace_back(position_[row], position_[col], value);
        continue;
      }
      if (mask[col]) {
        tfc.emplace_back(position_[row], position_[col], value);
      } else {
        tff.emplace_back(position_[row], position_[col], value);
      }
    }
  }
  a_ff_.resize(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(free_.size()));
  a_fc_.resize(static_cast<Eigen::Index>(free_.size()), static_cast<Eigen::Index>(constrained_.size()));
  a_cf_.resize(static_cast<Eigen::Index>(constrained_.size()), static_cast<Eigen::Index>(free_.size()));
  a_cc_.resize(static_cast<Eigen::Index>(constrained_.size()), static_cast<Eigen::Index>(constrained_.size()));
  a_ff_.setFromTriplets(tff.begin(), tff.end());
  a_fc_.setFromTriplets(tfc.begin(), tfc.end());
  a_cf_.setFromTriplets(tcf.begin(), tcf.end());
  a_cc_.setFromTriplets(tcc.begin(), tcc.end());
  a_ff_.makeCompressed();

  lu_.analyzePattern(a_ff_);
  lu_.factorize(a_ff_);
  if (lu_.info() != Eigen::Success) {
    throw NearEigenvalueError("Helmholtz matrix is numerically singular at k^2 = (" +
                                  std::to_string(k2.real()) + ", " + std::to_string(k2.imag()) + ")",
                              k2);
  }
}

Eigen::MatrixXcd HelmholtzFactorization::solve(const Eigen::MatrixXcd &boundary, const Eigen::MatrixXcd &load) const
{
  const Eigen::Index n = static_cast<Eigen::Index>(position_.size());
  const Eigen::Index nf = static_cast<Eigen::Index>(free_.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(constrained_.size());
  if (boundary.rows() != nc || load.rows() != n || boundary.cols() != load.cols()) {
    throw ContractError("solve: right-hand side shapes do not match the factorization");
  }
  Eigen::MatrixXcd rhs(nf, load.cols());
  for (Eigen::Index i = 0; i < nf; ++i) {
    rhs.row(i) = load.row(free_[i]);
  }
  if (nc > 0) {
    rhs -= a_fc_ * boundary;
  }
  const Eigen::MatrixXcd xf = lu_.solve(rhs);
  if (!xf.allFinite()) {
    throw NearEigenvalueError("non-finite Helmholtz solution", k_ * k_);
  }
  Eigen::MatrixXcd x(n, load.cols());
  for (Eigen::Index i = 0; i < nf; ++i) {
    x.row(free_[i]) = xf.row(i);
  }
  for (Eigen::Index i = 0; i < nc; ++i) {
    x.row(constrained_[i]) = boundary.row(i);
  }
  return x;
}

Eigen::VectorXcd HelmholtzFactorization::solve_dirichlet(const std::map<int, Complex> &boundary_values,
                                                          const std::map<int, Complex> &volume_rhs) const
{
  const Eigen::Index n = static_cast<Eigen::Index>(position_.size());
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(constrained_.size()), 1);
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(n, 1);
  const auto mask = system_->constrained_mask(bc_);
  for (const auto &[node, value] : boundary_values) {
    if (node < 0 || node >= n || !mask[node]) {
      throw ContractError("boundary value given on non-constrained node " + std::to_string(node));
    }
    g(position_[node], 0) = value;
  }
  for (const auto &[node, value] : volume_rhs) {
    if (node < 0 || node >= n) {
      throw ContractError("volume right-hand side on missing node " + std::to_string(node));
    }
    f(node, 0) = value;
  }
  return solve(g, f).col(0);
}

Eigen::MatrixXcd HelmholtzFactorization::apply(const Eigen::MatrixXcd &x) const
{
  const Complex k2 = k_ * k_;
  return system_->stiffness.cast<Complex>() * x - k2 * (system_->mass.cast<Complex>() * x);
}

Eigen::MatrixXcd HelmholtzFactorization::constrained_residual(const Eigen::MatrixXcd &x) const
{
  if (x.rows() != static_cast<Eigen::Index>(position_.size())) {
    throw ContractError("constrained_residual: vector length does not match the mesh");
  }
  Eigen::MatrixXcd xf(static_cast<Eigen::Index>(free_.size()), x.cols());
  Eigen::MatrixXcd xc(static_cast<Eigen::Index>(constrained_.size()), x.cols());
  for (std::size_t i = 0; i < free_.size(); ++i) {
    xf.row(static_cast<Eigen::Index>(i)) = x.row(free_[i]);
  }
  for (std::size_t i = 0; i < constrained_.size(); ++i) {
    xc.row(static_cast<Eigen::Index>(i)) = x.row(constrained_[i]);
  }
  return a_cf_ * xf + a_cc_ * xc;
}

}  // namespace helmres
