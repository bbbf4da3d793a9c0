// SPDX-License-Identifier: Apache-2.0
#include "helmres/dtn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/LU>

#include "helmres/errors.hpp"
#include "helmres/specfun.hpp"

namespace helmres
{

namespace
{

constexpr double kPi = std::numbers::pi;

// j holds J_0 .. J_{m+1} at kR. The test is relative to the neighbouring
// orders, which stay O(|J_m|) away from zeros even where J_m underflows.
void check_pole(const std::vector<Complex> &j, int m, int n, Complex k)
{
  const double scale = std::max(std::abs(j[m + 1]), m > 0 ? std::abs(j[m - 1]) : 0.0);
  if (std::abs(j[m]) <= 1e-13 * scale) {
    throw PoleError("J_" + std::to_string(n) + "(kR) vanishes at k = (" + std::to_string(k.real()) + ", " +
                        std::to_string(k.imag()) + ")",
                    n);
  }
}

Complex basis(int n, double theta, double R)
{
  return std::polar(1.0 / std::sqrt(2.0 * kPi * R), n * theta);
}

// Nodes where rho > 0, with their rho values.
struct Band
{
  std::vector<int> nodes;
  std::vector<double> rho;
  std::vector<double> r;
  std::vector<double> theta;
};

Band band_nodes(const TriMesh &mesh, const Cutoff &cutoff, const std::vector<int> *subset)
{
  Band band;
  auto visit = [&](int v) {
    const Point &p = mesh.nodes[v];
    const double r = p.norm();
    const double rho = rho_eval(r, cutoff).value;
    if (rho > 0.0) {
      band.nodes.push_back(v);
      band.rho.push_back(rho);
      band.r.push_back(r);
      band.theta.push_back(std::atan2(p.y(), p.x()));
    }
  };
  if (subset) {
    for (int v : *subset) visit(v);
  } else {
    for (int v = 0; v < static_cast<int>(mesh.num_nodes()); ++v) visit(v);
  }
  return band;
}

// out(beta, alpha) = sum_i conj(E_beta(i)) residual(node_i, alpha).
Eigen::MatrixXcd project(const Band &band, const Eigen::MatrixXcd &residual, int N, double R)
{
  const int dim = 2 * N + 1;
  Eigen::MatrixXcd ebar(dim, static_cast<Eigen::Index>(band.nodes.size()));
  for (std::size_t i = 0; i < band.nodes.size(); ++i) {
    for (int b = -N; b <= N; ++b) {
      ebar(b + N, static_cast<Eigen::Index>(i)) = band.rho[i] * std::conj(basis(b, band.theta[i], R));
    }
  }
  Eigen::MatrixXcd rows(static_cast<Eigen::Index>(band.nodes.size()), residual.cols());
  for (std::size_t i = 0; i < band.nodes.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = residual.row(band.nodes[i]);
  }
  return ebar * rows;
}

// Radial factor of T_rho J_n(k r), given j = J_0..J_{n+1}(k r).
Complex radial_source(int n, Complex k, const RhoValues &rho, double r, const std::vector<Complex> &j)
{
  const Complex jp = n == 0 ? -j[1] : j[n - 1] - (static_cast<double>(n) / (k * r)) * j[n];
  return 2.0 * rho.d1 * k * jp + (rho.d2 + rho.d1 / r) * j[n];
}

}  // namespace

std::string to_string(OperatorMode mode)
{
  return mode == OperatorMode::direct ? "direct" : "theoretical";
}

Complex m_outer_diag(int n, Complex k, double R)
{
  if (k == Complex(0.0)) {
    throw ParameterError("m_outer_diag requires k != 0");
  }
  const int m = std::abs(n);
  const Complex z = k * R;
  const auto h = hankel1_sequence(std::max(m, 1), z);
  const Complex prev = m == 0 ? -h[1] : h[m - 1];
  return static_cast<double>(m) / R - k * prev / h[m];
}

Complex m_inner0_diag(int n, Complex k, double R)
{
  const int m = std::abs(n);
  const auto j = bessel_j_sequence(m + 1, k * R);
  check_pole(j, m, n, k);
  return static_cast<double>(m) / R - k * j[m + 1] / j[m];
}

Complex f_alpha_eval(int alpha, Complex k, const Cutoff &cutoff, double r, double theta)
{
  const RhoValues rho = rho_eval(r, cutoff);
  if (rho.d1 == 0.0 && rho.d2 == 0.0) {
    return 0.0;
  }
  const int m = std::abs(alpha);
  const auto jR = bessel_j_sequence(m + 1, k * cutoff.R);
  check_pole(jR, m, alpha, k);
  const auto j = bessel_j_sequence(m + 1, k * r);
  return radial_source(m, k, rho, r, j) / jR[m] * basis(alpha, theta, cutoff.R);
}

Complex i3_integral(int alpha, Complex k, const Cutoff &cutoff)
{
  const int m = std::abs(alpha);
  const double R = cutoff.R;
  const auto jR = bessel_j_sequence(m + 1, k * R);
  check_pole(jR, m, alpha, k);
  constexpr int panels = 200;
  const double a = R - 1.0;
  const double step = 1.0 / panels;
  Complex sum = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double r = a + i * step;
    const RhoValues rho = rho_eval(r, cutoff);
    if (rho.value == 0.0 || (rho.d1 == 0.0 && rho.d2 == 0.0)) {
      continue;
    }
    const auto j = bessel_j_sequence(m + 1, k * r);
    const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    sum += w * rho.value * r * radial_source(m, k, rho, r, j);
  }
  return sum * (step / 3.0) / (R * jR[m]);
}

Eigen::MatrixXcd m_inner_matrix_direct(const HelmholtzFactorization &fact, int N, const Cutoff &cutoff)
{
  const TriMesh &mesh = *fact.system().mesh;
  if (!mesh.outer_snapped) {
    throw ContractError("direct mode needs a mesh with outer boundary nodes on |x| = R");
  }
  if (N < 0) {
    throw ParameterError("truncation order must be non-negative");
  }
  const double R = cutoff.R;
  const int dim = 2 * N + 1;
  const auto &constrained = fact.constrained_nodes();
  Eigen::MatrixXcd data = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(constrained.size()), dim);
  for (std::size_t c = 0; c < constrained.size(); ++c) {
    const int v = constrained[c];
    if (mesh.node_class[v] != NodeClass::outer_boundary) {
      continue;
    }
    const Point &p = mesh.nodes[v];
    const double theta = std::atan2(p.y(), p.x());
    for (int a = -N; a <= N; ++a) {
      data(static_cast<Eigen::Index>(c), a + N) = basis(a, theta, R);
    }
  }
  const Eigen::MatrixXcd load = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(mesh.num_nodes()), dim);
  const Eigen::MatrixXcd u = fact.solve(data, load);
  // Free rows of the residual vanish; only constrained rows contribute.
  const Eigen::MatrixXcd residual = fact.constrained_residual(u);
  Band band = band_nodes(mesh, cutoff, &constrained);
  // Band rows index into the constrained block.
  std::vector<int> slot(mesh.num_nodes(), -1);
  for (std::size_t c = 0; c < constrained.size(); ++c) {
    slot[constrained[c]] = static_cast<int>(c);
  }
  for (int &v : band.nodes) {
    v = slot[v];
  }
  return project(band, residual, N, R);
}

Eigen::MatrixXcd k_matrix_theoretical(const HelmholtzFactorization &fact, int N, const Cutoff &cutoff)
{
  if (fact.bc_mode() != BcMode::dirichlet_all) {
    throw ContractError("theoretical mode needs Dirichlet conditions on the obstacle");
  }
  if (N < 0) {
    throw ParameterError("truncation order must be non-negative");
  }
  const AssembledSystem &system = fact.system();
  const TriMesh &mesh = *system.mesh;
  const double R = cutoff.R;
  const Complex k = fact.k();
  const int dim = 2 * N + 1;
  const Eigen::Index n = static_cast<Eigen::Index>(mesh.num_nodes());

  const auto jR = bessel_j_sequence(N + 1, k * R);
  for (int m = 0; m <= N; ++m) {
    check_pole(jR, m, m, k);
  }
  Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(n, dim);
  for (Eigen::Index v = 0; v < n; ++v) {
    const Point &p = mesh.nodes[v];
    const double r = p.norm();
    const RhoValues rho = rho_eval(r, cutoff);
    if (rho.d1 == 0.0 && rho.d2 == 0.0) {
      continue;
    }
    const double theta = std::atan2(p.y(), p.x());
    const auto j = bessel_j_sequence(N + 1, k * r);
    for (int a = -N; a <= N; ++a) {
      const int m = std::abs(a);
      f(v, a + N) = radial_source(m, k, rho, r, j) / jR[m] * basis(a, theta, R);
    }
  }
  const Eigen::MatrixXcd load = system.mass.cast<Complex>() * f;
  const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(fact.constrained_nodes().size()), dim);
  const Eigen::MatrixXcd v = fact.solve(zero, load);
  const Eigen::MatrixXcd residual = fact.apply(v);
  const Band band = band_nodes(mesh, cutoff, nullptr);
  Eigen::MatrixXcd kmat = project(band, residual, N, R);
  for (int a = -N; a <= N; ++a) {
    kmat(a + N, a + N) -= i3_integral(a, k, cutoff);
  }
  return kmat;
}

DtnTruncation assemble_operator(Complex k, const OperatorSettings &settings, const AssembledSystem &system)
{
  const int N = settings.N;
  if (N < 0) {
    throw ParameterError("truncation order must be non-negative");
  }
  if (settings.mode == OperatorMode::theoretical && settings.bc != BcMode::dirichlet_all) {
    throw ContractError("theoretical mode needs Dirichlet conditions on the obstacle");
  }
  if (settings.mode == OperatorMode::direct && !system.mesh->outer_snapped) {
    throw ContractError("direct mode needs a mesh with outer boundary nodes on |x| = R");
  }
  const double R = settings.R;
  const int dim = 2 * N + 1;
  const Cutoff cutoff(R);
  const HelmholtzFactorization fact(system, k, settings.bc, settings.force);

  Eigen::VectorXd scale(dim);
  Eigen::VectorXcd hdiag(dim);
  const auto hs = hankel1_sequence(std::max(N, 1), k * R);
  for (int a = -N; a <= N; ++a) {
    const int m = std::abs(a);
    scale(a + N) = 1.0 / std::sqrt(static_cast<double>(std::max(m, 1)));
    const Complex prev = m == 0 ? -hs[1] : hs[m - 1];
    hdiag(a + N) = -k * prev / hs[m];
  }

  DtnTruncation out;
  out.k = k;
  out.N = N;
  out.mode = settings.mode;
  out.h = system.mesh->h;
  Eigen::MatrixXcd core;
  if (settings.mode == OperatorMode::direct) {
    core = m_inner_matrix_direct(fact, N, cutoff);
    core.diagonal() += hdiag;
    out.matrix = 0.5 * R * (scale.asDiagonal() * core * scale.asDiagonal());
    out.matrix.diagonal().array() += 0.5;
    out.matrix(N, N) -= 0.5;
  } else {
    core = k_matrix_theoretical(fact, N, cutoff);
    const auto js = bessel_j_sequence(N + 1, k * R);
    for (int a = -N; a <= N; ++a) {
      const int m = std::abs(a);
      core(a + N, a + N) += hdiag(a + N) - k * js[m + 1] / js[m];
    }
    out.matrix = 0.5 * R * (scale.asDiagonal() * core * scale.asDiagonal());
    out.matrix.diagonal().array() += 1.0;
    out.matrix(N, N) -= 1.0;
  }
  return out;
}

double LogDet::abs() const
{
  return std::exp(log_abs);
}

Complex LogDet::value() const
{
  return std::polar(std::exp(log_abs), phase);
}

LogDet det_plain(const Eigen::MatrixXcd &matrix)
{
  LogDet d;
  if (matrix.rows() == 0) {
    return d;
  }
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(matrix);
  const Eigen::MatrixXcd &m = lu.matrixLU();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Complex u = m(i, i);
    if (u == Complex(0.0)) {
      return {-std::numeric_limits<double>::infinity(), 0.0};
    }
    d.log_abs += std::log(std::abs(u));
    d.phase += std::arg(u);
  }
  if (lu.permutationP().determinant() < 0) {
    d.phase += kPi;
  }
  d.phase = std::remainder(d.phase, 2.0 * kPi);
  return d;
}

LogDet det_regularized(const Eigen::MatrixXcd &matrix, int p)
{
  if (p < 2) {
    throw ParameterError("regularized determinant needs p >= 2");
  }
  LogDet d = det_plain(matrix);
  const Eigen::MatrixXcd a = matrix - Eigen::MatrixXcd::Identity(matrix.rows(), matrix.cols());
  Eigen::MatrixXcd power = a;
  Complex sum = 0.0;
  for (int j = 1; j <= p - 1; ++j) {
    if (j > 1) {
      power = power * a;
    }
    sum += (j % 2 ? -1.0 : 1.0) * power.trace() / static_cast<double>(j);
  }
  d.log_abs += sum.real();
  d.phase = std::remainder(d.phase + sum.imag(), 2.0 * kPi);
  return d;
}

OperatorBuilder::OperatorBuilder(std::shared_ptr<const AssembledSystem> system, OperatorSettings settings)
  : system_(std::move(system)), settings_(settings)
{
  if (!system_) {
    throw ParameterError("operator builder needs an assembled system");
  }
}

}  // namespace helmres
