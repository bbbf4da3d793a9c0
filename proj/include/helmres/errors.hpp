// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace helmres
{

/// Base class for all library errors.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Invalid user input. The CLI maps these to exit code 2.
class ConfigError : public Error
{
public:
  using Error::Error;
};

class ParameterError : public ConfigError
{
public:
  using ConfigError::ConfigError;
};

class ContractError : public ConfigError
{
public:
  using ConfigError::ConfigError;
};

class RangeError : public ConfigError
{
public:
  using ConfigError::ConfigError;
};

class UnsupportedError : public ConfigError
{
public:
  using ConfigError::ConfigError;
};

// Numerical failures. The CLI maps these to exit code 3.
class NumericalError : public Error
{
public:
  using Error::Error;
};

/// Special function evaluated outside its accuracy envelope.
class AccuracyError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

class SingularityError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

/// Division by a vanishing J_n(kR); `order` names the offending mode.
class PoleError : public NumericalError
{
public:
  PoleError(const std::string &what, int order) : NumericalError(what), order(order) {}
  int order;
};

class MeshError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

class SnapError : public MeshError
{
public:
  using MeshError::MeshError;
};

/// The Helmholtz matrix is numerically singular: k^2 is (close to) a
/// Dirichlet/Neumann eigenvalue of the truncated domain.
class NearEigenvalueError : public NumericalError
{
public:
  NearEigenvalueError(const std::string &what, std::complex<double> k2)
    : NumericalError(what), k_squared(k2)
  {
  }
  std::complex<double> k_squared;
};

/// A bounded search ran past its cap without an answer.
class NotFoundError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

/// Descent did not reach the stopping tolerance. Carries the best iterate.
class RefineError : public Error
{
public:
  RefineError(const std::string &what, std::complex<double> best, double best_absdet)
    : Error(what), best_k(best), best_absdet(best_absdet)
  {
  }
  std::complex<double> best_k;
  double best_absdet;
};

}  // namespace helmres
