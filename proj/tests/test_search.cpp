// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "helmres/errors.hpp"
#include "helmres/pipeline.hpp"
#include "helmres/search.hpp"

using namespace helmres;

namespace
{

const Complex I(0.0, 1.0);

DetFunction from_value(std::function<Complex(Complex)> f)
{
  return [f](Complex k) {
    const Complex v = f(k);
    LogDet d;
    d.log_abs = std::log(std::abs(v));
    d.phase = std::arg(v);
    return d;
  };
}

// Two simple zeros.
Complex two_zeros(Complex k) { return (k - Complex(1.3, -0.02)) * (k - Complex(2.1, -0.3)); }

double overlap(const ScanRegion &a, const ScanRegion &b)
{
  const double w = std::min(a.re_max, b.re_max) - std::max(a.re_min, b.re_min);
  const double h = std::min(a.im_max, b.im_max) - std::max(a.im_min, b.im_min);
  return w > 0 && h > 0 ? w * h : 0.0;
}

}  // namespace

TEST_CASE("spiral tiles")
{
  const ScanRegion q1 = spiral_tiles(1);
  CHECK(q1.re_min == -0.5);
  CHECK(q1.re_max == 0.5);
  CHECK(q1.im_min == -2.0);
  CHECK(q1.im_max == -1.0);
  CHECK(q1.index == 1);
  const ScanRegion q2 = spiral_tiles(2);
  CHECK(q2.re_min == 0.5);
  CHECK(q2.re_max == 1.5);
  CHECK(q2.im_min == -2.0);
  CHECK(q2.im_max == -1.0);
  // Counterclockwise: the third tile sits above the second.
  const ScanRegion q3 = spiral_tiles(3);
  CHECK(q3.re_min == 0.5);
  CHECK(q3.im_min == -1.0);
  CHECK(q3.im_max == -0.5);

  std::vector<ScanRegion> tiles;
  for (int j = 1; j <= 120; ++j) {
    tiles.push_back(spiral_tiles(j, 50));
    CHECK_NOTHROW(tiles.back().validate());
    CHECK(tiles.back().im_max < 0.0);
    CHECK(tiles.back().n == 50);
  }
  for (std::size_t a = 0; a < tiles.size(); ++a) {
    for (std::size_t b = a + 1; b < tiles.size(); ++b) {
      CHECK(overlap(tiles[a], tiles[b]) == 0.0);
    }
  }
  CHECK_THROWS_AS(spiral_tiles(0), ParameterError);
}

TEST_CASE("region validation and threshold")
{
  ScanRegion r{0.0, 1.0, -1.0, 0.0, 10, std::nullopt};
  CHECK_THROWS_AS(r.validate(), ParameterError);
  r.im_max = -0.1;
  CHECK_NOTHROW(r.validate());
  r.n = 1;
  CHECK_THROWS_AS(r.validate(), ParameterError);
  CHECK(paper_threshold(1000) == doctest::Approx(1.0 / std::log(1000.0)));
  CHECK_THROWS_AS(paper_threshold(1), ParameterError);
  CHECK(threshold_mode_from_string("paper") == ThresholdMode::paper);
  CHECK(threshold_mode_from_string("minima") == ThresholdMode::minima);
  CHECK_THROWS_AS(threshold_mode_from_string("lowest"), ParameterError);
}

TEST_CASE("scan covers exactly the lattice points of the region")
{
  const ScanRegion r{0.995, 1.0301, -0.0504, -0.0101, 100, std::nullopt};
  const ScanResult g = scan(r, from_value(two_zeros), ThresholdMode::minima);
  CHECK(g.a0 == 100);
  CHECK(g.cols == 4);
  CHECK(g.b0 == -5);
  CHECK(g.rows == 4);
  for (int row = 0; row < g.rows; ++row) {
    for (int col = 0; col < g.cols; ++col) {
      const Complex k = g.k[static_cast<std::size_t>(row) * g.cols + col];
      CHECK(k == Complex((g.a0 + col) / 100.0, (g.b0 + row) / 100.0));
      CHECK(g.at(row, col) == doctest::Approx(std::log(std::abs(two_zeros(k)))));
    }
  }
  CHECK_THROWS_AS(scan({0.001, 0.002, -0.5, -0.4, 100, std::nullopt}, from_value(two_zeros)), ParameterError);
}

TEST_CASE("minima selection on synthetic grids")
{
  const ScanRegion r{1.0, 1.6, -0.1, -0.005, 200, std::nullopt};
  auto constant = from_value([](Complex) { return Complex(0.5); });
  CHECK(scan(r, constant, ThresholdMode::minima).selected.empty());

  const ScanResult g = scan(r, from_value(two_zeros), ThresholdMode::minima);
  REQUIRE(g.selected.size() == 1);
  CHECK(std::abs(g.selected[0].k - Complex(1.3, -0.02)) <= 0.5 / 200 * std::sqrt(2.0));
  CHECK(g.selected[0].n == 200);
  CHECK_FALSE(g.selected[0].refined);

  // Paper mode keeps every point below the threshold, a superset of the pit.
  const ScanResult p = scan(r, from_value(two_zeros), ThresholdMode::paper, 0.05);
  CHECK(p.selected.size() > 1);
  for (const auto &c : p.selected) {
    CHECK(c.absdet <= 0.05);
  }
  CHECK(scan(r, constant, ThresholdMode::paper).selected.empty());
}

TEST_CASE("the row next to the real axis is not a border")
{
  // Pit nearest to the lattice point 1.0 - 0.01i.
  auto f = from_value([](Complex k) { return k - Complex(1.0, -0.0104); });
  const ScanRegion touching{0.95, 1.05, -0.05, -0.01, 100, std::nullopt};
  const ScanResult a = scan(touching, f, ThresholdMode::minima);
  CHECK(a.b0 + a.rows == 0);
  REQUIRE(a.selected.size() == 1);
  CHECK(std::abs(a.selected[0].k - Complex(1.0, -0.01)) < 1e-12);

  auto g = from_value([](Complex k) { return k - Complex(1.0, -0.0204); });
  const ScanRegion inner{0.95, 1.05, -0.06, -0.02, 100, std::nullopt};
  CHECK(scan(inner, g, ThresholdMode::minima).selected.empty());
}

TEST_CASE("parallel scans are identical to serial ones")
{
  const ScanRegion r{1.0, 2.5, -0.4, -0.01, 40, std::nullopt};
  const ScanResult one = scan(r, from_value(two_zeros), ThresholdMode::minima, std::nullopt, 1);
  const ScanResult four = scan(r, from_value(two_zeros), ThresholdMode::minima, std::nullopt, 4);
  CHECK(one.k == four.k);
  CHECK(one.log_abs_det == four.log_abs_det);
  REQUIRE(one.selected.size() == four.selected.size());
  for (std::size_t i = 0; i < one.selected.size(); ++i) {
    CHECK(one.selected[i].k == four.selected[i].k);
  }
}

TEST_CASE("errors inside det propagate out of a scan")
{
  auto bad = [](Complex k) -> LogDet {
    if (k.real() > 1.5) {
      throw PoleError("synthetic pole", 0);
    }
    return {};
  };
  CHECK_THROWS_AS(scan({1.0, 2.0, -0.5, -0.1, 10, std::nullopt}, bad, ThresholdMode::minima, std::nullopt, 3),
                  PoleError);
}

TEST_CASE("refine converges to simple zeros")
{
  const auto det = from_value(two_zeros);
  const ResonanceCandidate c = refine(Complex(1.32, -0.03), det);
  CHECK(c.refined);
  CHECK(c.absdet < 1e-7);
  CHECK(c.refine_tol == 1e-7);
  CHECK(std::abs(c.k - Complex(1.3, -0.02)) < 1e-6);

  RefineOptions tight;
  tight.stop_tol = 1e-13;
  const ResonanceCandidate d = refine(Complex(2.0, -0.2), det, tight);
  CHECK(d.refined);
  CHECK(std::abs(d.k - Complex(2.1, -0.3)) < 1e-11);

  // Already refined: returned unchanged.
  const ResonanceCandidate e = refine(d.k, det, tight);
  CHECK(e.k == d.k);
  CHECK(e.refined);
}

TEST_CASE("refine stays in the lower half-plane")
{
  // The only zero is on the real axis.
  const auto det = from_value([](Complex k) { return k - 1.0; });
  RefineOptions opt;
  opt.stop_tol = 1e-9;
  const ResonanceCandidate c = refine(Complex(1.05, -0.05), det, opt);
  CHECK(c.k.imag() <= -opt.im_floor);
  CHECK_FALSE(c.refined);
  CHECK(std::abs(c.k - Complex(1.0, -opt.im_floor)) < 1e-6);
}

TEST_CASE("refine gives up after the iteration budget")
{
  // Newton only gains a factor 7/8 per step on a zero of order 8.
  const auto det = from_value([](Complex k) { return std::pow(k - Complex(2.0, -0.5), 8); });
  RefineOptions opt;
  opt.max_iterations = 3;
  CHECK(refine(Complex(2.5, -1.0), det).refined);
  try {
    refine(Complex(2.5, -1.0), det, opt);
    FAIL("expected a refine failure");
  } catch (const RefineError &e) {
    CHECK(e.best_k.imag() < 0.0);
    CHECK(e.best_absdet > 0.0);
  }
}

TEST_CASE("localize removes a steep background")
{
  // |det| varies by e^{2 * 40 * |Im k|} across the plane; the zero sits on
  // a slope that sends plain descent deeper into the lower half-plane.
  const Complex z0(3.0, -0.15);
  const auto det = from_value([&](Complex k) { return (k - z0) * std::exp(-40.0 * I * k) * (k - 1.0); });
  LocalizeOptions opt;
  opt.radius = 0.1;
  const ResonanceCandidate c = localize(Complex(3.04, -0.18), det, opt);
  CHECK(c.refined);
  CHECK(std::abs(c.k - z0) < 1e-8);

  opt.radius = 0.2;
  CHECK_THROWS_AS(localize(Complex(3.0, -0.1), det, opt), ParameterError);
  opt.radius = 0.05;
  opt.samples = 2;
  CHECK_THROWS_AS(localize(Complex(3.0, -0.1), det, opt), ParameterError);
}

TEST_CASE("localize fails when the disk holds no zero")
{
  const auto det = from_value([](Complex k) { return (k - Complex(3.0, -0.05)) * std::exp(-40.0 * I * k); });
  LocalizeOptions opt;
  opt.radius = 0.05;
  CHECK_THROWS_AS(localize(Complex(2.5, -0.1), det, opt), RefineError);
}

TEST_CASE("locate_radius on the built-in obstacles")
{
  const std::vector<Obstacle> shapes = {Obstacle::circular_chamber(), Obstacle::four_disks(), Obstacle::disk(0.5),
                                        Obstacle::annulus_with_gap(2.0, 1.8, 0.6), Obstacle::empty()};
  for (const auto &u : shapes) {
    const auto t0 = std::chrono::steady_clock::now();
    const RadiusResult res = locate_radius(u, 0.1);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(secs < 1.0);
    CHECK(res.max_hit_radius <= res.R - 1.0);
    CHECK(res.r > res.R - 1e-12);
    CHECK(res.queries > 0);
    // Recheck every hit in the last ball that was swept.
    const double swept = res.r - 1.0;
    const int m = static_cast<int>(swept / 0.1) + 1;
    for (int i = -m; i <= m; ++i) {
      for (int j = -m; j <= m; ++j) {
        const Point p(i * 0.1, j * 0.1);
        if (p.norm() < swept && u.contains(p)) {
          CHECK(p.norm() <= res.R - 1.0);
        }
      }
    }
  }
  // The disks reach |x| = sqrt(2) + 0.6 > 2, but no point of the 0.1 lattice
  // inside them does; a finer lattice sees past |x| = 2.
  CHECK(locate_radius(Obstacle::four_disks(), 0.1).R == 3.0);
  const RadiusResult four = locate_radius(Obstacle::four_disks(), 0.01);
  CHECK(four.R >= 3.01);
  CHECK(four.max_hit_radius > 2.0);
  CHECK(four.max_hit_radius <= four.R - 1.0);
  CHECK(locate_radius(Obstacle::circular_chamber(), 0.1).R == 3.0);
  CHECK(locate_radius(Obstacle::disk(0.5), 0.1).R == 2.0);
  CHECK(locate_radius(Obstacle::empty(), 0.1).R == 1.0);
  // Already inside B_{R-1}: one increment of r, R unchanged.
  const RadiusResult inside = locate_radius(Obstacle::disk(0.5), 0.1, 3.0, 3.0);
  CHECK(inside.R == 3.0);
  CHECK(inside.r == 4.0);
  const auto everywhere = Obstacle::custom([](const Point &) { return true; }, 1e9);
  CHECK_THROWS_AS(locate_radius(everywhere, 0.5, 1.0, 1.0, 5.0), NotFoundError);
  CHECK_THROWS_AS(locate_radius(Obstacle::disk(0.5), 0.0), ParameterError);
}

TEST_CASE("Hausdorff distance and its empty-set conventions")
{
  const std::vector<Complex> none;
  const std::vector<Complex> a = {0.0};
  const std::vector<Complex> b = {1.0, Complex(0.0, 2.0)};
  CHECK(hausdorff_distance(none, none) == 0.0);
  CHECK(hausdorff_distance(a, none) == std::numeric_limits<double>::infinity());
  CHECK(hausdorff_distance(none, a) == std::numeric_limits<double>::infinity());
  CHECK(hausdorff_distance(a, b) == doctest::Approx(2.0));
  CHECK(hausdorff_distance(b, a) == doctest::Approx(2.0));
  CHECK(hausdorff_distance(b, b) == 0.0);
}

TEST_CASE("Attouch-Wets distance")
{
  const std::vector<Complex> none;
  const std::vector<Complex> a = {0.0};
  const std::vector<Complex> b = {Complex(1.3, -0.02), Complex(2.05, -0.026)};
  for (int w : {1, 5, 10}) {
    CHECK(set_distance(a, none, w) == 1.0 - std::ldexp(1.0, -w));
    CHECK(set_distance(none, a, w) == 1.0 - std::ldexp(1.0, -w));
    CHECK(set_distance(none, none, w) == 0.0);
    CHECK(set_distance(b, b, w) == 0.0);
  }
  const std::vector<Complex> shifted = {Complex(1.31, -0.02), Complex(2.05, -0.026)};
  const double d = set_distance(b, shifted, 10);
  CHECK(d > 0.0);
  CHECK(d <= 0.01 * (1.0 + 1e-12));
  CHECK(set_distance(b, {Complex(1.35, -0.02), Complex(2.05, -0.026)}, 10) > d);
  CHECK_THROWS_AS(set_distance(a, b, 0), ParameterError);
}

TEST_CASE("chamber operator: grid minimum and refinement agree")
{
  RunConfig config;
  config.N = 10;
  const OperatorBuilder builder = make_builder(config);
  const DetFunction det = det_function(builder);
  const ScanRegion r{1.28, 1.34, -0.01, -0.002, 500, std::nullopt};
  const ScanResult g = scan(r, det, ThresholdMode::minima);
  REQUIRE(g.selected.size() == 1);
  const ResonanceCandidate c = refine(g.selected[0].k, det);
  CHECK(c.refined);
  // Within one lattice cell of the grid minimum.
  CHECK(std::abs(c.k.real() - g.selected[0].k.real()) <= 1.0 / 500);
  CHECK(std::abs(c.k.imag() - g.selected[0].k.imag()) <= 1.0 / 500);
  CHECK(std::abs(c.k - Complex(1.315, -0.002)) < 0.02);
}

TEST_CASE("free space: no minima near the real axis")
{
  RunConfig config;
  config.obstacle = "empty";
  config.N = 10;
  config.h = 0.2;
  const OperatorBuilder builder = make_builder(config);
  const ScanRegion r{0.5, 3.0, -0.3, -0.02, 20, std::nullopt};
  CHECK(scan(r, det_function(builder), ThresholdMode::minima).selected.empty());
}

TEST_CASE("refined minima converge as the parameter doubles")
{
  RunConfig config;
  config.n_list = {5, 10, 20, 40};
  config.k0 = Complex(1.32, -0.002);
  const auto rows = convergence_study(config);
  REQUIRE(rows.size() == 4);
  double previous_h = std::numeric_limits<double>::infinity();
  double previous_aw = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    REQUIRE(rows[i].z.refined);
    const std::vector<Complex> a{rows[i].z.k}, b{rows[i + 1].z.k};
    const double dh = hausdorff_distance(a, b);
    const double aw = set_distance(a, b, 10);
    MESSAGE("n = " << rows[i].n << ": d_H " << dh << ", d_AW " << aw);
    CHECK(dh == doctest::Approx(*rows[i].succ_err));
    CHECK(dh <= previous_h);
    CHECK(aw <= previous_aw);
    previous_h = dh;
    previous_aw = aw;
  }
  const auto order = empirical_order(rows);
  REQUIRE(order);
  CHECK(*order >= 1.2);
  CHECK(*order <= 2.2);
}
