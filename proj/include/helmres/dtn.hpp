// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "helmres/fem.hpp"
#include "helmres/geometry.hpp"

namespace helmres
{

enum class OperatorMode
{
  direct,
  theoretical
};

std::string to_string(OperatorMode mode);

/// Outer DtN eigenvalue |n|/R - k H_{|n|-1}(kR) / H_{|n|}(kR), H_{-1} = -H_1.
Complex m_outer_diag(int n, Complex k, double R);

/// Disk DtN eigenvalue k J_{|n|}'(kR) / J_{|n|}(kR). PoleError at J_{|n|}(kR) = 0.
Complex m_inner0_diag(int n, Complex k, double R);

/// T_rho S(k) e_alpha at polar point (r, theta).
Complex f_alpha_eval(int alpha, Complex k, const Cutoff &cutoff, double r, double theta);

/// Diagonal entry int_O conj(E_alpha) f_alpha dx by composite Simpson on
/// [R-1, R] (200 panels). Off-diagonal entries vanish.
Complex i3_integral(int alpha, Complex k, const Cutoff &cutoff);

/// M_inner,FEM with entry (beta, alpha) = sum_i conj(E_beta(i)) [(S - k^2 M) u_alpha]_i,
/// u_alpha the FEM solution with data e_alpha on the outer circle.
/// Requires an outer-snapped mesh (ContractError).
Eigen::MatrixXcd m_inner_matrix_direct(const HelmholtzFactorization &fact, int N, const Cutoff &cutoff);

/// K_h with entry (beta, alpha); needs an all-Dirichlet factorization.
Eigen::MatrixXcd k_matrix_theoretical(const HelmholtzFactorization &fact, int N, const Cutoff &cutoff);

struct DtnTruncation
{
  Complex k;
  int N = 0;
  OperatorMode mode = OperatorMode::direct;
  double h = 0.0;
  /// (2N+1) x (2N+1), index n + N for mode n.
  Eigen::MatrixXcd matrix;
};

struct OperatorSettings
{
  double R = 3.0;
  int N = 20;
  OperatorMode mode = OperatorMode::direct;
  BcMode bc = BcMode::dirichlet_all;
  /// Allow |Im k| < 1e-6.
  bool force = false;
};

/// Direct: (1/2)(I - P0 + R N^{-1/2}(H + M_inner,FEM) N^{-1/2}).
/// Theoretical: I + (R/2) N^{-1/2}(H + J + K_h) N^{-1/2} - P0.
DtnTruncation assemble_operator(Complex k, const OperatorSettings &settings, const AssembledSystem &system);

/// Determinant in overflow-safe form.
struct LogDet
{
  double log_abs = 0.0;
  double phase = 0.0;

  double abs() const;
  Complex value() const;
};

/// LU with partial pivoting.
LogDet det_plain(const Eigen::MatrixXcd &matrix);

/// det_p(I + A) = det(I + A) exp(sum_{j=1}^{p-1} (-1)^j tr(A^j) / j), A = matrix - I.
LogDet det_regularized(const Eigen::MatrixXcd &matrix, int p = 3);

/// Mesh, assembly and operator settings bundled into k -> DtnTruncation.
class OperatorBuilder
{
public:
  OperatorBuilder(std::shared_ptr<const AssembledSystem> system, OperatorSettings settings);

  DtnTruncation operator()(Complex k) const { return assemble_operator(k, settings_, *system_); }
  LogDet det(Complex k) const { return det_plain((*this)(k).matrix); }

  const OperatorSettings &settings() const { return settings_; }
  const AssembledSystem &system() const { return *system_; }

private:
  std::shared_ptr<const AssembledSystem> system_;
  OperatorSettings settings_;
};

}  // namespace helmres
