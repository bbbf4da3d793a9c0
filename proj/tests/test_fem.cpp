// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "helmres/errors.hpp"
#include "helmres/fem.hpp"
#include "helmres/pipeline.hpp"
#include "helmres/specfun.hpp"

using namespace helmres;

namespace
{

constexpr double pi = std::numbers::pi;

std::shared_ptr<const AssembledSystem> system_for(const Obstacle &u, double R, double h)
{
  return std::make_shared<const AssembledSystem>(assemble(build_run_mesh(u, R, h)));
}

Eigen::MatrixXd dense(const Eigen::SparseMatrix<double> &a) { return Eigen::MatrixXd(a); }

// Radial solutions of -u'' - u'/r + u = 0 on 1 < r < 3 with u(3) = 1 and
// either u(1) = 0 or u'(1) = 0.
double radial_dirichlet(double r)
{
  const double a = std::cyl_bessel_k(0, 1.0), b = -std::cyl_bessel_i(0, 1.0);
  const double scale = a * std::cyl_bessel_i(0, 3.0) + b * std::cyl_bessel_k(0, 3.0);
  return (a * std::cyl_bessel_i(0, r) + b * std::cyl_bessel_k(0, r)) / scale;
}

double radial_neumann(double r)
{
  const double a = std::cyl_bessel_k(1, 1.0), b = std::cyl_bessel_i(1, 1.0);
  const double scale = a * std::cyl_bessel_i(0, 3.0) + b * std::cyl_bessel_k(0, 3.0);
  return (a * std::cyl_bessel_i(0, r) + b * std::cyl_bessel_k(0, r)) / scale;
}

struct AnnulusError
{
  double max_nodal = 0.0;
  double h1 = 0.0;
};

AnnulusError annulus_error(double h, BcMode bc)
{
  const auto sys = system_for(Obstacle::disk(1.0), 3.0, h);
  // k = -i, so S - k^2 M = S + M.
  const HelmholtzFactorization f(*sys, Complex(0.0, -1.0), bc);
  const auto &mesh = *sys->mesh;
  const auto exact = bc == BcMode::dirichlet_all ? radial_dirichlet : radial_neumann;
  Eigen::MatrixXcd g(f.constrained_nodes().size(), 1);
  for (std::size_t i = 0; i < f.constrained_nodes().size(); ++i) {
    const int v = f.constrained_nodes()[i];
    g(i, 0) = mesh.node_class[v] == NodeClass::outer_boundary ? 1.0 : 0.0;
  }
  const Eigen::VectorXcd u = f.solve(g, Eigen::MatrixXcd::Zero(mesh.num_nodes(), 1)).col(0);
  Eigen::VectorXd e(mesh.num_nodes());
  AnnulusError out;
  for (std::size_t v = 0; v < mesh.num_nodes(); ++v) {
    e[v] = u[v].real() - exact(mesh.nodes[v].norm());
    out.max_nodal = std::max(out.max_nodal, std::abs(u[v] - exact(mesh.nodes[v].norm())));
  }
  out.h1 = std::sqrt(e.dot((sys->stiffness + sys->mass) * e));
  return out;
}

}  // namespace

TEST_CASE("element matrices of the unit right triangle")
{
  const Point a(0, 0), b(1, 0), c(0, 1);
  Eigen::Matrix3d mass;
  mass << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  mass /= 24.0;
  Eigen::Matrix3d stiff;
  stiff << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  stiff /= 2.0;
  CHECK((element_mass(a, b, c) - mass).norm() < 1e-15);
  CHECK((element_stiffness(a, b, c) - stiff).norm() < 1e-15);
}

TEST_CASE("element matrices are invariant under rigid motion and scale correctly")
{
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Point p0(d(rng), d(rng)), p1(d(rng), d(rng)), p2(d(rng), d(rng));
    if ((p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x() < 0.05) {
      continue;
    }
    const double t = d(rng) * pi;
    Eigen::Matrix2d rot;
    rot << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
    const Point shift(d(rng), d(rng));
    const Eigen::Matrix3d m = element_mass(p0, p1, p2);
    const Eigen::Matrix3d k = element_stiffness(p0, p1, p2);
    CHECK((element_mass(rot * p0 + shift, rot * p1 + shift, rot * p2 + shift) - m).norm() < 1e-13);
    CHECK((element_stiffness(rot * p0 + shift, rot * p1 + shift, rot * p2 + shift) - k).norm() < 1e-11);
    CHECK((element_mass(2 * p0, 2 * p1, 2 * p2) - 4 * m).norm() < 1e-13);
    CHECK((element_stiffness(2 * p0, 2 * p1, 2 * p2) - k).norm() < 1e-11);
    CHECK(k.rowwise().sum().norm() < 1e-12);
  }
}

TEST_CASE("assembled matrices: exact symmetry, kernel and positivity")
{
  for (const auto &u : {Obstacle::circular_chamber(), Obstacle::four_disks(), Obstacle::empty()}) {
    const double R = u.bound_radius() > 2.0 ? 4.0 : 3.0;
    const auto sys = system_for(u, R, 0.2);
    const Eigen::MatrixXd m = dense(sys->mass);
    const Eigen::MatrixXd s = dense(sys->stiffness);
    REQUIRE(m.rows() <= 2000);
    CHECK((m - m.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.rows());
    CHECK(std::abs(one.dot(s * one)) < 1e-10);
    CHECK((s * one).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(one.dot(m * one) == doctest::Approx(sys->mesh->area()).epsilon(1e-12));

    const auto mask = sys->constrained_mask(BcMode::dirichlet_all);
    std::vector<int> free;
    for (std::size_t v = 0; v < mask.size(); ++v) {
      if (!mask[v]) {
        free.push_back(static_cast<int>(v));
      }
    }
    Eigen::MatrixXd mff(free.size(), free.size());
    for (std::size_t i = 0; i < free.size(); ++i) {
      for (std::size_t j = 0; j < free.size(); ++j) {
        mff(i, j) = m(free[i], free[j]);
      }
    }
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(mff).eigenvalues().minCoeff() > 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(s).eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("constraint masks")
{
  const auto sys = system_for(Obstacle::four_disks(), 4.0, 0.2);
  const auto all = sys->constrained_mask(BcMode::dirichlet_all);
  const auto mixed = sys->constrained_mask(BcMode::dirichlet_outer_neumann_inner);
  for (std::size_t v = 0; v < all.size(); ++v) {
    const NodeClass c = sys->mesh->node_class[v];
    CHECK(static_cast<bool>(all[v]) == (c != NodeClass::interior));
    CHECK(static_cast<bool>(mixed[v]) == (c == NodeClass::outer_boundary));
  }
}

TEST_CASE("annulus with k^2 = -1 against the modified Bessel closed form")
{
  const AnnulusError e = annulus_error(0.05, BcMode::dirichlet_all);
  CHECK(e.max_nodal <= 2e-2);
  const AnnulusError coarse = annulus_error(0.1, BcMode::dirichlet_all);
  const AnnulusError fine = annulus_error(0.025, BcMode::dirichlet_all);
  const double order = std::log2(coarse.h1 / e.h1);
  const double order_fine = std::log2(e.h1 / fine.h1);
  MESSAGE("H1 errors " << coarse.h1 << " " << e.h1 << " " << fine.h1);
  CHECK(order >= 0.9);
  CHECK(order_fine >= 0.9);
}

TEST_CASE("annulus with a Neumann inner circle")
{
  const AnnulusError e = annulus_error(0.05, BcMode::dirichlet_outer_neumann_inner);
  CHECK(e.max_nodal <= 5e-2);
}

TEST_CASE("free-space extension of a boundary Fourier mode")
{
  const double R = 3.0;
  const Complex k(2.0, -0.5);
  const auto sys = system_for(Obstacle::empty(), R, 0.05);
  const HelmholtzFactorization f(*sys, k, BcMode::dirichlet_all);
  const auto &mesh = *sys->mesh;
  for (int alpha : {0, 1, -3, 5}) {
    auto exact = [&](const Point &p) {
      const double theta = std::atan2(p.y(), p.x());
      // J_{-n} = (-1)^n J_n cancels in the ratio.
      const int n = std::abs(alpha);
      return bessel_j(n, k * p.norm()) / bessel_j(n, k * R) * std::polar(1.0, alpha * theta) /
             std::sqrt(2 * pi * R);
    };
    std::map<int, Complex> data;
    for (int v : f.constrained_nodes()) {
      data[v] = exact(mesh.nodes[v]);
    }
    const Eigen::VectorXcd u = f.solve_dirichlet(data, {});
    Eigen::VectorXcd ref(mesh.num_nodes());
    for (std::size_t v = 0; v < mesh.num_nodes(); ++v) {
      ref[v] = exact(mesh.nodes[v]);
    }
    const Eigen::VectorXcd e = u - ref;
    const Eigen::SparseMatrix<Complex> m = sys->mass.cast<Complex>();
    const double rel = std::sqrt(std::abs(e.dot(m * e)) / std::abs(ref.dot(m * ref)));
    CHECK(rel <= 3e-2);
  }
}

TEST_CASE("factor once, solve many")
{
  const auto sys = system_for(Obstacle::circular_chamber(), 3.0, 0.1);
  const Complex k(2.0, -0.5);
  const HelmholtzFactorization f(*sys, k, BcMode::dirichlet_all);
  const auto nc = static_cast<Eigen::Index>(f.constrained_nodes().size());
  const auto n = static_cast<Eigen::Index>(sys->mesh->num_nodes());
  std::mt19937 rng(3);
  std::normal_distribution<double> d;
  auto random = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXcd a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) {
        a(i, j) = Complex(d(rng), d(rng));
      }
    }
    return a;
  };
  const Eigen::MatrixXcd g = random(nc, 41);
  const Eigen::MatrixXcd load = random(n, 41);
  const Eigen::MatrixXcd all = f.solve(g, load);
  for (int c = 0; c < 41; c += 8) {
    const HelmholtzFactorization fresh(*sys, k, BcMode::dirichlet_all);
    const Eigen::MatrixXcd one = fresh.solve(g.col(c), load.col(c));
    CHECK((one - all.col(c)).norm() <= 1e-12 * one.norm());
  }

  // Residual on free rows and the constrained rows reported separately.
  const Eigen::MatrixXcd r = f.apply(all);
  const Eigen::MatrixXcd rc = f.constrained_residual(all);
  for (int c = 0; c < 41; ++c) {
    double num = 0.0, den = 0.0;
    for (int v : f.free_nodes()) {
      num += std::norm(r(v, c) - load(v, c));
      den += std::norm(load(v, c));
    }
    CHECK(std::sqrt(num / den) <= 1e-10);
    for (Eigen::Index i = 0; i < nc; ++i) {
      CHECK(std::abs(rc(i, c) - r(f.constrained_nodes()[i], c)) <= 1e-12 * (1 + std::abs(r(f.constrained_nodes()[i], c))));
    }
    for (Eigen::Index i = 0; i < nc; ++i) {
      CHECK(all(f.constrained_nodes()[i], c) == g(i, c));
    }
  }
}

TEST_CASE("zero data gives the zero solution")
{
  const auto sys = system_for(Obstacle::disk(1.0), 3.0, 0.2);
  const HelmholtzFactorization f(*sys, Complex(2.0, -0.5), BcMode::dirichlet_outer_neumann_inner);
  CHECK(f.solve_dirichlet({}, {}).norm() == 0.0);
}

TEST_CASE("factorization contracts")
{
  const auto sys = system_for(Obstacle::disk(1.0), 3.0, 0.2);
  CHECK_THROWS_AS(HelmholtzFactorization(*sys, Complex(2.0, 0.0), BcMode::dirichlet_all), ContractError);
  CHECK_THROWS_AS(HelmholtzFactorization(*sys, Complex(2.0, -5e-7), BcMode::dirichlet_all), ContractError);
  CHECK_NOTHROW(HelmholtzFactorization(*sys, Complex(2.0, 0.0), BcMode::dirichlet_all, true));

  const HelmholtzFactorization f(*sys, Complex(2.0, -0.5), BcMode::dirichlet_all);
  const int interior = sys->mesh->nodes_of_class(NodeClass::interior).front();
  CHECK_THROWS_AS(f.solve_dirichlet({{interior, 1.0}}, {}), ContractError);
  CHECK_THROWS_AS(f.solve_dirichlet({}, {{-1, 1.0}}), ContractError);
  CHECK_THROWS_AS(f.solve(Eigen::MatrixXcd::Zero(1, 1), Eigen::MatrixXcd::Zero(1, 1)), ContractError);
  CHECK_THROWS_AS(f.constrained_residual(Eigen::MatrixXcd::Zero(3, 1)), ContractError);
}

TEST_CASE("a singular pencil is reported as a near-eigenvalue")
{
  // One free triangle: pure Neumann, so S has the constants in its kernel.
  auto mesh = std::make_shared<TriMesh>();
  mesh->h = 1.0;
  mesh->R = 3.0;
  mesh->nodes = {Point(0, 0), Point(1, 0), Point(0, 1)};
  mesh->triangles = {{0, 1, 2}};
  mesh->node_class.assign(3, NodeClass::interior);
  mesh->lattice_index.assign(3, std::nullopt);
  const AssembledSystem sys = assemble(mesh);
  CHECK_THROWS_AS(HelmholtzFactorization(sys, Complex(0.0, 0.0), BcMode::dirichlet_all, true), NearEigenvalueError);

  auto flat = std::make_shared<TriMesh>(*mesh);
  flat->nodes[2] = Point(2, 0);
  CHECK_THROWS_AS(assemble(flat), MeshError);
}
