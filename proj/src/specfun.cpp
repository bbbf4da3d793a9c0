// SPDX-License-Identifier: Apache-2.0
#include "helmres/specfun.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "helmres/errors.hpp"

namespace helmres
{

namespace
{

using LReal = long double;
using LComplex = std::complex<long double>;

constexpr LReal pi_l = std::numbers::pi_v<long double>;
constexpr LReal euler_gamma_l = std::numbers::egamma_v<long double>;
constexpr LComplex i_l{0.0L, 1.0L};

// Above this |z| the power series lose too many digits to cancellation.
constexpr double series_limit = 12.0;
// Above this |z| the Hankel asymptotic expansion is accurate to ~1e-15.
constexpr double asymptotic_limit = 17.0;

void check_envelope(int n, Complex z)
{
  if (n < 0) {
    throw RangeError("Bessel order must be non-negative, got " + std::to_string(n));
  }
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw AccuracyError("non-finite Bessel argument");
  }
  if (n > max_bessel_order || std::abs(z) > max_bessel_argument) {
    throw AccuracyError("Bessel evaluation outside accuracy envelope (n=" + std::to_string(n) +
                        ", |z|=" + std::to_string(std::abs(z)) + ")");
  }
}

Complex narrow(const LComplex &v, const char *what)
{
  const Complex out(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  if (!std::isfinite(out.real()) || !std::isfinite(out.imag())) {
    throw AccuracyError(std::string(what) + " overflowed double precision");
  }
  return out;
}

// sum_k (-z^2/4)^k (z/2)^n / (k! (n+k)!)
LComplex j_series(int n, LComplex z)
{
  const LComplex half = z / 2.0L;
  LComplex t = 1.0L;
  for (int i = 1; i <= n; ++i) {
    t *= half / static_cast<LReal>(i);
  }
  if (t == LComplex(0.0L)) {
    return t;
  }
  const LComplex q = -half * half;
  LComplex sum = t;
  const LReal peak = std::abs(half);
  for (int k = 1; k < 1000; ++k) {
    t *= q / static_cast<LReal>(k * (n + k));
    sum += t;
    if (k > peak && std::abs(t) <= 1e-21L * std::abs(sum)) {
      break;
    }
  }
  return sum;
}

// Miller backward recurrence, normalized with the Jacobi-Anger sum
// exp(s i z) = J_0 + 2 sum (s i)^k J_k, s chosen so that |exp(s i z)| >= 1.
std::vector<LComplex> j_miller(int nmax, LComplex z)
{
  const int start = nmax + static_cast<int>(std::abs(z)) + 60;
  std::vector<LComplex> f(start + 2, LComplex(0.0L));
  f[start] = 1e-200L;
  for (int k = start; k >= 1; --k) {
    f[k - 1] = (2.0L * k / z) * f[k] - f[k + 1];
  }
  const LComplex si = z.imag() <= 0.0L ? i_l : -i_l;
  LComplex sum = f[0];
  LComplex power = 1.0L;
  for (int k = 1; k <= start; ++k) {
    power *= si;
    sum += 2.0L * power * f[k];
  }
  const LComplex scale = std::exp(si * z) / sum;
  std::vector<LComplex> out(nmax + 1);
  for (int k = 0; k <= nmax; ++k) {
    out[k] = f[k] * scale;
  }
  return out;
}

std::vector<LComplex> j_sequence_l(int nmax, LComplex z)
{
  if (std::abs(z) <= series_limit) {
    std::vector<LComplex> out(nmax + 1);
    for (int k = 0; k <= nmax; ++k) {
      out[k] = j_series(k, z);
    }
    return out;
  }
  return j_miller(nmax, z);
}

// Y_0 and Y_1 from their ascending series with the logarithmic term.
std::pair<LComplex, LComplex> y01_series(LComplex z)
{
  const LComplex half = z / 2.0L;
  const LComplex q = -half * half;
  const LComplex log_half = std::log(half);
  const LReal peak = std::abs(half);

  // u_k = q^k / (k!)^2,  v_k = q^k / (k! (k+1)!)
  LComplex u = 1.0L, v = 1.0L;
  LComplex j0 = u, j1 = v;
  LComplex s0 = 0.0L;                       // sum H_k u_k
  LComplex s1 = -2.0L * euler_gamma_l + 1;  // sum (psi(k+1)+psi(k+2)) v_k
  LReal harmonic = 0.0L;
  for (int k = 1; k < 1000; ++k) {
    u *= q / static_cast<LReal>(k * k);
    v *= q / static_cast<LReal>(k * (k + 1));
    const LReal prev = harmonic;
    harmonic += 1.0L / k;
    j0 += u;
    j1 += v;
    s0 += harmonic * u;
    s1 += (-2.0L * euler_gamma_l + prev + 1.0L / k + harmonic + 1.0L / (k + 1)) * v;
    if (k > peak && std::abs(u) <= 1e-21L * std::abs(j0) &&
        std::abs(v) <= 1e-21L * std::abs(j1)) {
      break;
    }
  }
  j1 *= half;
  s1 *= half;
  const LComplex y0 = (2.0L / pi_l) * ((log_half + euler_gamma_l) * j0 - s0);
  const LComplex y1 = -2.0L / (pi_l * z) + (2.0L / pi_l) * log_half * j1 - s1 / pi_l;
  return {y0, y1};
}

LComplex hankel_asymptotic(int nu, LComplex z)
{
  const LReal mu = 4.0L * nu * nu;
  LComplex term = 1.0L;
  LComplex sum = 1.0L;
  LReal prev = 1.0L;
  for (int k = 1; k < 80; ++k) {
    const LReal odd = 2.0L * k - 1.0L;
    term *= i_l * (mu - odd * odd) / (8.0L * k * z);
    const LReal mag = std::abs(term);
    if (mag > prev) {
      break;
    }
    sum += term;
    prev = mag;
    if (mag <= 1e-21L * std::abs(sum)) {
      break;
    }
  }
  const LComplex omega = z - nu * pi_l / 2.0L - pi_l / 4.0L;
  return std::sqrt(2.0L / (pi_l * z)) * std::exp(i_l * omega) * sum;
}

// K_n(w) = 1/2 int_{-inf}^{inf} exp(-w cosh t) cosh(n t) dt, Re w > 0.
// Trapezoid rule; exponentially convergent for this analytic integrand.
LComplex bessel_k_integral(int n, LComplex w)
{
  constexpr LReal step = 0.004L;
  LComplex sum = 0.5L * std::exp(-w);
  for (int j = 1; j < 2000000; ++j) {
    const LReal t = j * step;
    const LComplex f = std::exp(-w * std::cosh(t)) * std::cosh(n * t);
    sum += f;
    if (w.real() * std::sinh(t) > n && std::abs(f) <= 1e-22L * std::abs(sum)) {
      break;
    }
  }
  return sum * step;
}

// H_n^(1)(z) = 2/(i pi) (-i)^n K_n(-i z)
LComplex hankel_from_k(int n, LComplex z)
{
  LComplex phase = 1.0L;
  for (int k = 0; k < n; ++k) {
    phase *= -i_l;
  }
  return 2.0L / (i_l * pi_l) * phase * bessel_k_integral(n, -i_l * z);
}

std::vector<LComplex> forward_recurrence(int nmax, LComplex f0, LComplex f1, LComplex z)
{
  std::vector<LComplex> out(nmax + 1);
  out[0] = f0;
  if (nmax >= 1) {
    out[1] = f1;
  }
  for (int k = 1; k < nmax; ++k) {
    out[k + 1] = (2.0L * k / z) * out[k] - out[k - 1];
  }
  return out;
}

std::vector<LComplex> y_sequence_l(int nmax, LComplex z)
{
  const auto [y0, y1] = y01_series(z);
  return forward_recurrence(nmax, y0, y1, z);
}

std::vector<LComplex> h_sequence_l(int nmax, LComplex z)
{
  if (z.imag() < 0.0L) {
    // H^(1) = 2J - H^(2), with H^(2)_n(z) = conj(H^(1)_n(conj z)). Both terms
    // are then computed where their recurrences are stable, and the
    // subtraction never cancels: either J or H^(2) dominates.
    auto h = h_sequence_l(nmax, std::conj(z));
    const auto j = j_sequence_l(nmax, z);
    for (int k = 0; k <= nmax; ++k) {
      h[k] = 2.0L * j[k] - std::conj(h[k]);
    }
    return h;
  }
  const double az = static_cast<double>(std::abs(z));
  if (az > asymptotic_limit) {
    if (z.real() >= 0.0L) {
      return forward_recurrence(nmax, hankel_asymptotic(0, z), hankel_asymptotic(1, z), z);
    }
    // Second quadrant: H_n(z) = -(-1)^n conj(H_n(-conj z)).
    auto h = h_sequence_l(nmax, -std::conj(z));
    for (int k = 0; k <= nmax; ++k) {
      h[k] = (k % 2 ? 1.0L : -1.0L) * std::conj(h[k]);
    }
    return h;
  }
  if (z.imag() > 5.0L) {
    // H^(1) is recessive here; J + iY would cancel catastrophically.
    return forward_recurrence(nmax, hankel_from_k(0, z), hankel_from_k(1, z), z);
  }
  auto h = j_sequence_l(std::max(nmax, 1), z);
  const auto y = y_sequence_l(std::max(nmax, 1), z);
  for (std::size_t k = 0; k < h.size(); ++k) {
    h[k] += i_l * y[k];
  }
  h.resize(nmax + 1);
  return h;
}

}  // namespace

std::vector<Complex> bessel_j_sequence(int nmax, Complex z)
{
  check_envelope(nmax, z);
  const auto seq = j_sequence_l(nmax, LComplex(z.real(), z.imag()));
  std::vector<Complex> out;
  out.reserve(seq.size());
  for (const auto &v : seq) {
    out.push_back(narrow(v, "J_n"));
  }
  return out;
}

Complex bessel_j(int n, Complex z)
{
  check_envelope(n, z);
  const LComplex zl(z.real(), z.imag());
  if (std::abs(z) <= series_limit) {
    return narrow(j_series(n, zl), "J_n");
  }
  return narrow(j_miller(n, zl)[n], "J_n");
}

Complex bessel_j_prime(int n, Complex z)
{
  check_envelope(n, z);
  if (z == Complex(0.0)) {
    return n == 1 ? Complex(0.5) : Complex(0.0);
  }
  const auto j = bessel_j_sequence(std::max(n, 1), z);
  if (n == 0) {
    return -j[1];
  }
  return j[n - 1] - (static_cast<double>(n) / z) * j[n];
}

Complex bessel_y(int n, Complex z)
{
  check_envelope(n, z);
  if (z == Complex(0.0)) {
    throw SingularityError("Y_n is singular at z = 0");
  }
  const LComplex zl(z.real(), z.imag());
  if (std::abs(z) <= asymptotic_limit && z.imag() >= 0.0 && z.imag() <= 5.0) {
    return narrow(y_sequence_l(std::max(n, 1), zl)[n], "Y_n");
  }
  const LComplex h = h_sequence_l(n, zl)[n];
  const LComplex j = j_sequence_l(n, zl)[n];
  return narrow(-i_l * (h - j), "Y_n");
}

std::vector<Complex> hankel1_sequence(int nmax, Complex z)
{
  check_envelope(nmax, z);
  if (z == Complex(0.0)) {
    throw SingularityError("H_n^(1) is singular at z = 0");
  }
  const auto seq = h_sequence_l(nmax, LComplex(z.real(), z.imag()));
  std::vector<Complex> out;
  out.reserve(seq.size());
  for (const auto &v : seq) {
    out.push_back(narrow(v, "H_n^(1)"));
  }
  return out;
}

Complex hankel1(int n, Complex z) { return hankel1_sequence(n, z)[n]; }

Complex hankel1_prime(int n, Complex z)
{
  const auto h = hankel1_sequence(std::max(n, 1), z);
  if (n == 0) {
    return -h[1];
  }
  return h[n - 1] - (static_cast<double>(n) / z) * h[n];
}

double bessel_zero(int n, int m)
{
  if (n < 0 || n > 50 || m < 1 || m > 50) {
    throw RangeError("bessel_zero supports 0 <= n <= 50 and 1 <= m <= 50");
  }
  auto f = [n](double x) { return std::cyl_bessel_j(static_cast<double>(n), x); };
  // J_n has no zeros in (0, n] for n >= 1; scan forward counting sign changes.
  constexpr double step = 0.05;
  double lo = n == 0 ? 0.5 : static_cast<double>(n);
  double flo = f(lo);
  int found = 0;
  for (;;) {
    const double hi = lo + step;
    const double fhi = f(hi);
    if ((flo < 0.0) != (fhi < 0.0) || fhi == 0.0) {
      if (++found == m) {
        double a = lo, b = hi, fa = flo;
        while (b - a > 1e-14 * b) {
          const double c = 0.5 * (a + b);
          const double fc = f(c);
          if ((fa < 0.0) == (fc < 0.0) && fc != 0.0) {
            a = c;
            fa = fc;
          } else {
            b = c;
          }
        }
        return 0.5 * (a + b);
      }
    }
    lo = hi;
    flo = fhi;
  }
}

}  // namespace helmres
