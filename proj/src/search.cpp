// SPDX-License-Identifier: Apache-2.0
#include "helmres/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include "helmres/errors.hpp"

namespace helmres
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

Complex project_lower(Complex k, double im_floor)
{
  return {k.real(), std::min(k.imag(), -im_floor)};
}

double dist_to_set(Complex x, const std::vector<Complex> &set)
{
  double d = kInf;
  for (const Complex &p : set) {
    d = std::min(d, std::abs(x - p));
  }
  return d;
}

// |dist(x, A) - dist(x, B)| with dist(x, empty) = +inf.
double dist_gap(Complex x, const std::vector<Complex> &a, const std::vector<Complex> &b)
{
  const double da = dist_to_set(x, a);
  const double db = dist_to_set(x, b);
  if (std::isinf(da) && std::isinf(db)) {
    return 0.0;
  }
  return std::abs(da - db);
}

// det'(x) / det(x) by a central difference, with fx = det(x).
Complex log_derivative(const DetFunction &det, Complex x, const LogDet &fx, double step)
{
  auto ratio = [&](const LogDet &a) { return std::polar(std::exp(a.log_abs - fx.log_abs), a.phase - fx.phase); };
  return (ratio(det(x + step)) - ratio(det(x - step))) / (2.0 * step);
}

}  // namespace

void ScanRegion::validate() const
{
  if (!(re_min <= re_max) || !(im_min <= im_max)) {
    throw ParameterError("scan region bounds are out of order");
  }
  if (!(im_max < 0.0)) {
    throw ParameterError("scan region must lie in the open lower half-plane (im_max < 0)");
  }
  if (n < 2) {
    throw ParameterError("lattice density n must be at least 2");
  }
}

bool ScanRegion::contains(Complex k) const
{
  return k.real() >= re_min && k.real() <= re_max && k.imag() >= im_min && k.imag() <= im_max;
}

std::string to_string(ThresholdMode mode)
{
  return mode == ThresholdMode::paper ? "paper" : "minima";
}

ThresholdMode threshold_mode_from_string(const std::string &name)
{
  if (name == "paper") {
    return ThresholdMode::paper;
  }
  if (name == "minima") {
    return ThresholdMode::minima;
  }
  throw ParameterError("unknown threshold mode '" + name + "' (expected paper or minima)");
}

DetFunction det_function(const OperatorBuilder &builder)
{
  return [&builder](Complex k) { return builder.det(k); };
}

double paper_threshold(int n)
{
  if (n < 2) {
    throw ParameterError("threshold 1/log(n) needs n >= 2");
  }
  return 1.0 / std::log(static_cast<double>(n));
}

ScanResult scan(const ScanRegion &region, const DetFunction &det, ThresholdMode mode, std::optional<double> threshold,
                unsigned threads)
{
  region.validate();
  const double n = region.n;
  const double eps = 1e-9;
  ScanResult out;
  out.region = region;
  out.a0 = static_cast<int>(std::ceil(region.re_min * n - eps));
  out.b0 = static_cast<int>(std::ceil(region.im_min * n - eps));
  out.cols = static_cast<int>(std::floor(region.re_max * n + eps)) - out.a0 + 1;
  out.rows = static_cast<int>(std::floor(region.im_max * n + eps)) - out.b0 + 1;
  if (out.cols <= 0 || out.rows <= 0) {
    throw ParameterError("scan region contains no lattice points");
  }
  const std::size_t total = static_cast<std::size_t>(out.rows) * out.cols;
  out.k.resize(total);
  out.log_abs_det.resize(total);
  for (int row = 0; row < out.rows; ++row) {
    for (int col = 0; col < out.cols; ++col) {
      out.k[static_cast<std::size_t>(row) * out.cols + col] = Complex(out.a0 + col, out.b0 + row) / n;
    }
  }

  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        out.log_abs_det[i] = det(out.k[i]).log_abs;
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = total;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    for (auto &t : pool) {
      t.join();
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  out.selected = threshold_select(out, mode, threshold);
  return out;
}

std::vector<ResonanceCandidate> threshold_select(const ScanResult &grid, ThresholdMode mode,
                                                 std::optional<double> threshold)
{
  std::vector<ResonanceCandidate> picked;
  const int n = grid.region.n;
  auto candidate = [&](std::size_t i) {
    ResonanceCandidate c;
    c.k = grid.k[i];
    c.absdet = std::exp(grid.log_abs_det[i]);
    c.n = n;
    return c;
  };
  if (mode == ThresholdMode::paper) {
    const double limit = threshold ? *threshold : paper_threshold(n);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (std::exp(grid.log_abs_det[i]) <= limit) {
        picked.push_back(candidate(i));
      }
    }
    return picked;
  }
  // The row next to the real axis has no lattice neighbours above it in the
  // lower half-plane, so it is not treated as a border there.
  const bool top_open = grid.b0 + grid.rows >= 0;
  const int last_row = top_open ? grid.rows : grid.rows - 1;
  for (int row = 1; row < last_row; ++row) {
    for (int col = 1; col + 1 < grid.cols; ++col) {
      const double v = grid.at(row, col);
      if (std::isnan(v)) {
        continue;
      }
      bool strict = true;
      for (int dr = -1; dr <= 1 && strict; ++dr) {
        if (row + dr >= grid.rows) {
          continue;
        }
        for (int dc = -1; dc <= 1; ++dc) {
          if ((dr || dc) && !(v < grid.at(row + dr, col + dc))) {
            strict = false;
            break;
          }
        }
      }
      if (strict && (!threshold || std::exp(v) <= *threshold)) {
        picked.push_back(candidate(static_cast<std::size_t>(row) * grid.cols + col));
      }
    }
  }
  return picked;
}

ResonanceCandidate refine(Complex k0, const DetFunction &det, const RefineOptions &options)
{
  // det is analytic, so grad |det|^2 = 2 |det|^2 conj(det'/det) with det'
  // from a central difference; this stays accurate next to a simple zero.
  Complex x = project_lower(k0, options.im_floor);
  LogDet fx = det(x);
  const double log_tol = std::log(options.stop_tol);
  const double d = options.fd_step;
  ResonanceCandidate out;
  out.refine_tol = options.stop_tol;
  auto finish = [&](bool refined) {
    out.k = x;
    out.absdet = fx.abs();
    out.refined = refined;
    return out;
  };
  for (int it = 0; it < options.max_iterations; ++it) {
    if (fx.log_abs < log_tol) {
      return finish(true);
    }
    const Complex log_deriv = log_derivative(det, x, fx, d);
    if (!std::isfinite(std::abs(log_deriv)) || std::abs(log_deriv) == 0.0) {
      return finish(false);
    }
    // Descent direction -grad g / (2 g) and the step length 2g/|grad g|^2
    // combine into the Newton step det/det'.
    const Complex newton = 1.0 / log_deriv;
    double t = 1.0;
    bool moved = false;
    while (true) {
      const Complex xn = project_lower(x - t * newton, options.im_floor);
      if (std::abs(xn - x) < options.min_step) {
        break;
      }
      const LogDet fn = det(xn);
      // Armijo on g = |det|^2 along the projected step, in log form.
      const double decrease = -2.0 * (log_deriv * (xn - x)).real();
      const double predicted = std::log1p(-1e-4 * std::clamp(decrease, 0.0, 2.0));
      if (2.0 * (fn.log_abs - fx.log_abs) <= predicted || fn.log_abs < log_tol) {
        x = xn;
        fx = fn;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      return finish(fx.log_abs < log_tol);
    }
  }
  throw RefineError("descent did not converge within " + std::to_string(options.max_iterations) + " iterations", x,
                    fx.abs());
}

ResonanceCandidate localize(Complex center, const DetFunction &det, const LocalizeOptions &options)
{
  if (!(options.radius > 0.0) || options.samples < 4) {
    throw ParameterError("localize needs radius > 0 and at least 4 samples");
  }
  if (!(center.imag() + options.radius < 0.0)) {
    throw ParameterError("localization disk must lie in the lower half-plane");
  }
  const double d = options.refine.fd_step;
  // The circle mean of det'/det drops every 1/(k - z) term from zeros and
  // poles inside the disk, leaving the smooth part at the centre.
  Complex background = 0.0;
  for (int j = 0; j < options.samples; ++j) {
    const Complex p = center + std::polar(options.radius, 2.0 * std::numbers::pi * (j + 0.5) / options.samples);
    background += log_derivative(det, p, det(p), d);
  }
  background /= static_cast<double>(options.samples);

  Complex x = center;
  for (int it = 0; it < options.max_iterations; ++it) {
    const LogDet fx = det(x);
    const Complex residual = log_derivative(det, x, fx, d) - background;
    if (!std::isfinite(std::abs(residual)) || residual == 0.0) {
      throw RefineError("localize: degenerate log-derivative", x, fx.abs());
    }
    const Complex step = 1.0 / residual;
    x -= step;
    if (std::abs(x - center) > options.radius) {
      throw RefineError("localize: iterate left the disk", x, det(x).abs());
    }
    if (std::abs(step) < 1e-10 * std::max(1.0, std::abs(x))) {
      break;
    }
  }
  return refine(x, det, options.refine);
}

ScanRegion spiral_tiles(int j, int n)
{
  if (j < 1) {
    throw ParameterError("tile index must be at least 1");
  }
  // Square spiral over (column, row): right 1, up 1, left 2, down 2, right 3, ...
  static const int dc[4] = {1, 0, -1, 0};
  static const int dq[4] = {0, 1, 0, -1};
  int c = 0, q = 0, count = 1, dir = 0, run = 1;
  while (count < j) {
    for (int rep = 0; rep < 2 && count < j; ++rep) {
      for (int s = 0; s < run && count < j; ++s) {
        c += dc[dir];
        q += dq[dir];
        ++count;
      }
      dir = (dir + 1) % 4;
    }
    ++run;
  }
  ScanRegion region;
  region.re_min = c - 0.5;
  region.re_max = c + 0.5;
  if (q <= 0) {
    region.im_min = -2.0 + q;
    region.im_max = -1.0 + q;
  } else {
    region.im_min = -std::ldexp(1.0, -(q - 1));
    region.im_max = -std::ldexp(1.0, -q);
  }
  region.n = n;
  region.index = j;
  return region;
}

RadiusResult locate_radius(const Obstacle &obstacle, double step, double R0, double r0, double r_cap)
{
  if (!(step > 0.0)) {
    throw ParameterError("lattice step must be positive");
  }
  RadiusResult res;
  res.R = R0;
  res.r = r0;
  while (true) {
    if (res.r > r_cap) {
      throw NotFoundError("radius search exceeded r = " + std::to_string(r_cap));
    }
    const int m = static_cast<int>(std::floor(res.r / step));
    const double r2 = res.r * res.r;
    std::size_t hits = 0;
    double max_hit = 0.0;
    for (int i = -m; i <= m; ++i) {
      for (int jj = -m; jj <= m; ++jj) {
        const Point p(i * step, jj * step);
        const double n2 = p.squaredNorm();
        if (n2 >= r2) {
          continue;
        }
        ++res.queries;
        if (obstacle.contains(p)) {
          ++hits;
          max_hit = std::max(max_hit, std::sqrt(n2));
        }
      }
    }
    res.hits = hits;
    res.max_hit_radius = max_hit;
    const double swept = res.r;
    res.r += 1.0;
    if (hits > 0 && max_hit > res.R - 1.0) {
      res.R = res.r;
      continue;
    }
    // Accepted step. Once the swept ball covers the obstacle R cannot change.
    if (swept > obstacle.bound_radius()) {
      return res;
    }
  }
}

double hausdorff_distance(const std::vector<Complex> &a, const std::vector<Complex> &b)
{
  if (a.empty() && b.empty()) {
    return 0.0;
  }
  if (a.empty() || b.empty()) {
    return kInf;
  }
  double d = 0.0;
  for (const Complex &p : a) {
    d = std::max(d, dist_to_set(p, b));
  }
  for (const Complex &p : b) {
    d = std::max(d, dist_to_set(p, a));
  }
  return d;
}

double set_distance(const std::vector<Complex> &a, const std::vector<Complex> &b, int window)
{
  if (window < 1) {
    throw ParameterError("window must be at least 1");
  }
  double total = 0.0;
  for (int n = 1; n <= window; ++n) {
    const double radius = n;
    double sup = 0.0;
    for (const auto *set : {&a, &b}) {
      for (const Complex &p : *set) {
        if (std::abs(p) < radius) {
          sup = std::max(sup, dist_gap(p, a, b));
        }
      }
    }
    constexpr int rings = 64;
    constexpr int spokes = 256;
    sup = std::max(sup, dist_gap(0.0, a, b));
    for (int ri = 1; ri <= rings && sup < 1.0; ++ri) {
      const double r = radius * (ri - 0.5) / rings;
      for (int si = 0; si < spokes; ++si) {
        sup = std::max(sup, dist_gap(std::polar(r, 2.0 * std::numbers::pi * si / spokes), a, b));
      }
    }
    total += std::ldexp(std::min(1.0, sup), -n);
  }
  return total;
}

}  // namespace helmres
