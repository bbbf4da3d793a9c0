// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helmres/errors.hpp"
#include "helmres/geometry.hpp"

using namespace helmres;

namespace
{

constexpr double pi = std::numbers::pi;

// Membership written independently of the library, with squared radii and
// explicit angle tests.
bool chamber_ref(double x, double y, double ro, double ri, double d)
{
  const double r2 = x * x + y * y;
  const bool in_ring = r2 > ri * ri && r2 < ro * ro;
  const bool in_channel = x > 0 && y * y < 0.25 * d * d;
  return in_ring && !in_channel;
}

bool four_disks_ref(double x, double y)
{
  for (int sx : {-1, 1}) {
    for (int sy : {-1, 1}) {
      const double dx = x - sx, dy = y - sy;
      if (dx * dx + dy * dy < 0.36) {
        return true;
      }
    }
  }
  return false;
}

bool annulus_gap_ref(double x, double y, double ro, double ri, double gap)
{
  const double r2 = x * x + y * y;
  if (!(r2 > ri * ri && r2 < ro * ro)) {
    return false;
  }
  // Inside the removed wedge iff the angle to the +x axis is at most gap/2.
  const double cosang = x / std::sqrt(r2);
  return cosang < std::cos(0.5 * gap);
}

}  // namespace

TEST_CASE("chi on the circular chamber")
{
  const auto u = Obstacle::circular_chamber(2.0, 1.8, 1.3);
  CHECK(chi(u, Point(0, 0)) == 0);
  CHECK(chi(u, Point(0, 1.9)) == 1);
  CHECK(chi(u, Point(1.9, 0)) == 0);
  CHECK(chi(u, Point(-1.9, 0)) == 1);
  CHECK(chi(u, Point(2.0, 0)) == 0);  // boundary of the annulus
  CHECK(u.bound_radius() == 2.0);
  CHECK(*u.curvature_bound() == doctest::Approx(1.0 / 1.8));
}

TEST_CASE("chi agrees with independent membership tests on 1e4 random points")
{
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  const auto chamber = Obstacle::circular_chamber(2.0, 1.8, 1.3);
  const auto disks = Obstacle::four_disks();
  const auto disk = Obstacle::disk(0.7, Point(0.3, -0.2));
  const auto ring = Obstacle::annulus_with_gap(2.0, 1.5, 0.8);
  int mismatches = 0;
  for (int i = 0; i < 10000; ++i) {
    const Point x(c(rng), c(rng));
    if (chamber.boundary().distance(x) > 1e-9) {
      mismatches += chi(chamber, x) != chamber_ref(x.x(), x.y(), 2.0, 1.8, 1.3);
    }
    if (disks.boundary().distance(x) > 1e-9) {
      mismatches += chi(disks, x) != four_disks_ref(x.x(), x.y());
    }
    if (disk.boundary().distance(x) > 1e-9) {
      const double dx = x.x() - 0.3, dy = x.y() + 0.2;
      mismatches += chi(disk, x) != (dx * dx + dy * dy < 0.49);
    }
    if (ring.boundary().distance(x) > 1e-9) {
      mismatches += chi(ring, x) != annulus_gap_ref(x.x(), x.y(), 2.0, 1.5, 0.8);
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("rho_eval plateaus, midpoint and derivative consistency")
{
  const Cutoff cut(3.0);
  const auto top = rho_eval(3.0, cut);
  CHECK(top.value == 1.0);
  CHECK(top.d1 == 0.0);
  CHECK(top.d2 == 0.0);
  const auto bottom = rho_eval(2.0, cut);
  CHECK(bottom.value == 0.0);
  CHECK(bottom.d1 == 0.0);
  CHECK(bottom.d2 == 0.0);
  CHECK(rho_eval(0.5 * (cut.r0 + cut.r1), cut).value == doctest::Approx(0.5).epsilon(1e-15));

  const double step = 1e-4;
  for (double r = cut.r0 + 0.01; r < cut.r1 - 0.01; r += 0.037) {
    const auto m = rho_eval(r - step, cut), c0 = rho_eval(r, cut), p = rho_eval(r + step, cut);
    const double d1 = (p.value - m.value) / (2 * step);
    const double d2 = (p.value - 2 * c0.value + m.value) / (step * step);
    const double d1b = (p.d1 - m.d1) / (2 * step);
    CHECK(std::abs(d1 - c0.d1) <= 1e-5 * std::max(1.0, std::abs(c0.d1)));
    CHECK(std::abs(d2 - c0.d2) <= 1e-5 * std::max(1.0, std::abs(c0.d2)));
    CHECK(std::abs(d1b - c0.d2) <= 1e-5 * std::max(1.0, std::abs(c0.d2)));
  }
  // C^2 at the joins.
  for (double r : {cut.r0, cut.r1}) {
    const auto v = rho_eval(r + 1e-9, cut);
    CHECK(std::abs(v.d1) < 1e-6);
    CHECK(std::abs(v.d2) < 1e-6);
  }
}

TEST_CASE("boundary parametrizations")
{
  const auto disks = Obstacle::four_disks(0.6, 1.0);
  const Point p0 = boundary_point(disks, 0.0);
  CHECK(p0.x() == doctest::Approx(1.6));
  CHECK(p0.y() == doctest::Approx(1.0));
  CHECK(disks.boundary().total_length() == doctest::Approx(4 * 2 * pi * 0.6));
  CHECK(disks.boundary().intervals().size() == 4);

  const auto unit = Obstacle::disk(1.0);
  const Point q = boundary_point(unit, pi / 2);
  CHECK(q.x() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(q.y() == doctest::Approx(1.0));
  CHECK_THROWS_AS(boundary_point(unit, 7.0), RangeError);
  CHECK_THROWS_AS(boundary_point(unit, -0.1), RangeError);

  const auto custom = Obstacle::custom([](const Point &x) { return x.norm() < 0.5; }, 0.5);
  CHECK_THROWS_AS(boundary_point(custom, 0.0), UnsupportedError);
  CHECK(chi(custom, Point(0.1, 0.1)) == 1);

  // Chamber loop is closed and unit speed.
  const auto chamber = Obstacle::circular_chamber();
  const auto &b = chamber.boundary();
  const double len = b.total_length();
  CHECK((b.point(0.0) - b.point(len)).norm() < 1e-12);
  for (double s = 0.0; s + 1e-3 < len; s += 0.01) {
    CHECK((b.point(s + 1e-3) - b.point(s)).norm() == doctest::Approx(1e-3).epsilon(1e-5));
  }
}

TEST_CASE("boundary points are chi-neutral along the normal")
{
  for (const auto &u : {Obstacle::circular_chamber(), Obstacle::four_disks(), Obstacle::disk(0.8),
                        Obstacle::annulus_with_gap(2.0, 1.6, 0.9)}) {
    const auto &b = u.boundary();
    for (const auto &[a, e] : b.intervals()) {
      for (double s = a + 1e-3; s < e - 1e-3; s += 0.013) {
        const Point back = b.point(s) - b.point(s - 1e-5);
        const Point fwd = b.point(s + 1e-5) - b.point(s);
        if ((back.normalized() - fwd.normalized()).norm() > 1e-3) {
          continue;  // corner
        }
        const Point t = (b.point(s + 1e-7) - b.point(s - 1e-7)).normalized();
        const Point n(-t.y(), t.x());
        const Point p = b.point(s);
        CHECK(u.contains(p + 1e-6 * n) != u.contains(p - 1e-6 * n));
      }
    }
  }
}

TEST_CASE("from_spec and configuration errors")
{
  const auto u = Obstacle::from_spec("circular_chamber", {{"d", 1.0}});
  CHECK(u.params().at("d") == 1.0);
  CHECK(u.params().at("r_inner") == 1.8);
  CHECK(Obstacle::from_spec("empty", {}).is_empty());
  CHECK_THROWS_AS(Obstacle::from_spec("circular_chamber", {{"width", 1.0}}), ConfigError);
  CHECK_THROWS_AS(Obstacle::from_spec("custom", {}), ConfigError);
  CHECK_THROWS_AS(Obstacle::from_spec("triangle", {}), ConfigError);
  CHECK_THROWS_AS(Obstacle::four_disks(1.2, 1.0), ConfigError);
  const auto bare = Obstacle::custom(nullptr, 1.0);
  CHECK_THROWS_AS(bare.contains(Point(0, 0)), ConfigError);
  CHECK(to_string(ObstacleKind::four_disks) == "four_disks");
}
