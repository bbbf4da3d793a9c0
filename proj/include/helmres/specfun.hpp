// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

namespace helmres
{

using Complex = std::complex<double>;

/// Accuracy envelope of the complex-argument routines. Requests outside it
/// raise AccuracyError instead of degrading silently.
inline constexpr double max_bessel_argument = 50.0;
inline constexpr int max_bessel_order = 200;

/// J_n(z), n >= 0. Ascending series for |z| <= 12, Miller backward
/// recurrence above.
Complex bessel_j(int n, Complex z);

/// J_0(z), ..., J_nmax(z) in one pass.
std::vector<Complex> bessel_j_sequence(int nmax, Complex z);

/// J_n'(z) = J_{n-1}(z) - (n/z) J_n(z), with J_0' = -J_1.
Complex bessel_j_prime(int n, Complex z);

/// Y_n(z), principal branch of the logarithm. Throws SingularityError at 0.
Complex bessel_y(int n, Complex z);

/// Hankel function of the first kind, H_n^(1)(z) = J_n(z) + i Y_n(z).
Complex hankel1(int n, Complex z);

/// H_0^(1)(z), ..., H_nmax^(1)(z) by forward recurrence.
std::vector<Complex> hankel1_sequence(int nmax, Complex z);

Complex hankel1_prime(int n, Complex z);

/// m-th positive zero j_{n,m} of J_n, for n <= 50 and m <= 50.
double bessel_zero(int n, int m);

}  // namespace helmres
