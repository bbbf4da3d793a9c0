// SPDX-License-Identifier: Apache-2.0
#include "helmres/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "helmres/errors.hpp"

namespace helmres
{

namespace
{

constexpr double two_pi = 2.0 * std::numbers::pi;

double wrap_angle(double a)
{
  a = std::fmod(a, two_pi);
  return a < 0.0 ? a + two_pi : a;
}

std::map<std::string, double> merged(const std::map<std::string, double> &defaults,
                                     const std::map<std::string, double> &given,
                                     const std::string &kind)
{
  auto out = defaults;
  for (const auto &[key, value] : given) {
    if (!defaults.contains(key)) {
      throw ConfigError("unknown parameter '" + key + "' for obstacle " + kind);
    }
    out[key] = value;
  }
  return out;
}

}  // namespace

std::string to_string(ObstacleKind kind)
{
  switch (kind) {
  case ObstacleKind::circular_chamber:
    return "circular_chamber";
  case ObstacleKind::four_disks:
    return "four_disks";
  case ObstacleKind::disk:
    return "disk";
  case ObstacleKind::annulus_with_gap:
    return "annulus_with_gap";
  case ObstacleKind::custom:
    return "custom";
  }
  return "custom";
}

RhoValues rho_eval(double r, const Cutoff &c)
{
  if (r <= c.r0) {
    return {0.0, 0.0, 0.0};
  }
  if (r >= c.r1) {
    return {1.0, 0.0, 0.0};
  }
  const double w = c.r1 - c.r0;
  const double t = (r - c.r0) / w;
  const double t2 = t * t;
  return {t2 * t * (10.0 - 15.0 * t + 6.0 * t2),
          30.0 * t2 * (t - 1.0) * (t - 1.0) / w,
          60.0 * t * (t - 1.0) * (2.0 * t - 1.0) / (w * w)};
}

// ---------------------------------------------------------------------------
// BoundaryPiece

BoundaryPiece BoundaryPiece::arc(const Point &center, double radius, double theta0, double sweep)
{
  BoundaryPiece p;
  p.type = Type::arc;
  p.center = center;
  p.radius = radius;
  p.theta0 = theta0;
  p.sweep = sweep;
  return p;
}

BoundaryPiece BoundaryPiece::segment(const Point &a, const Point &b)
{
  BoundaryPiece p;
  p.type = Type::segment;
  p.a = a;
  p.b = b;
  return p;
}

double BoundaryPiece::length() const
{
  return type == Type::arc ? radius * std::abs(sweep) : (b - a).norm();
}

Point BoundaryPiece::at(double s) const
{
  if (type == Type::segment) {
    const double len = length();
    return len > 0.0 ? Point(a + (b - a) * (s / len)) : a;
  }
  const double theta = theta0 + std::copysign(s / radius, sweep);
  return center + radius * Point(std::cos(theta), std::sin(theta));
}

double BoundaryPiece::closest(const Point &x) const
{
  const double len = length();
  if (type == Type::segment) {
    if (len == 0.0) {
      return 0.0;
    }
    const double t = (x - a).dot(b - a) / (len * len);
    return std::clamp(t, 0.0, 1.0) * len;
  }
  const Point d = x - center;
  if (d.norm() == 0.0) {
    return 0.0;
  }
  const double phi = std::atan2(d.y(), d.x());
  const double u = sweep > 0.0 ? wrap_angle(phi - theta0) : wrap_angle(theta0 - phi);
  if (u <= std::abs(sweep)) {
    return u * radius;
  }
  return (at(0.0) - x).squaredNorm() <= (at(len) - x).squaredNorm() ? 0.0 : len;
}

// ---------------------------------------------------------------------------
// BoundaryParam

BoundaryParam::BoundaryParam(std::vector<BoundaryPiece> pieces,
                             std::vector<std::size_t> component_sizes)
  : pieces_(std::move(pieces))
{
  double s = 0.0;
  std::size_t next = 0;
  for (std::size_t count : component_sizes) {
    const double start = s;
    for (std::size_t i = 0; i < count; ++i) {
      piece_start_.push_back(s);
      s += pieces_.at(next++).length();
    }
    intervals_.emplace_back(start, s);
  }
  if (next != pieces_.size()) {
    throw ContractError("component sizes do not cover all boundary pieces");
  }
}

BoundaryParam::BoundaryParam(std::function<Point(double)> gamma, std::vector<Interval> intervals)
  : gamma_(std::move(gamma)), intervals_(std::move(intervals))
{
}

double BoundaryParam::total_length() const
{
  double total = 0.0;
  for (const auto &[a, b] : intervals_) {
    total += b - a;
  }
  return total;
}

Point BoundaryParam::point(double s) const
{
  constexpr double tol = 1e-12;
  const bool inside = std::any_of(intervals_.begin(), intervals_.end(), [&](const Interval &iv) {
    return s >= iv.first - tol && s <= iv.second + tol;
  });
  if (!inside) {
    throw RangeError("boundary parameter " + std::to_string(s) + " outside the parameter domain");
  }
  if (gamma_) {
    return gamma_(s);
  }
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const double len = pieces_[i].length();
    if (s <= piece_start_[i] + len + tol) {
      return pieces_[i].at(std::clamp(s - piece_start_[i], 0.0, len));
    }
  }
  return pieces_.back().at(pieces_.back().length());
}

Point BoundaryParam::nearest(const Point &x) const
{
  if (intervals_.empty()) {
    throw UnsupportedError("nearest point requested on an empty boundary");
  }
  if (!gamma_) {
    Point best = pieces_.front().at(0.0);
    double best_d2 = std::numeric_limits<double>::infinity();
    for (const auto &piece : pieces_) {
      const Point p = piece.at(piece.closest(x));
      const double d2 = (p - x).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = p;
      }
    }
    return best;
  }
  // Sampled search followed by golden-section refinement.
  double best_s = intervals_.front().first;
  double best_d2 = std::numeric_limits<double>::infinity();
  double spacing = 0.0;
  for (const auto &[a, b] : intervals_) {
    const int samples = std::max(64, static_cast<int>((b - a) / 0.005));
    const double ds = (b - a) / samples;
    for (int i = 0; i <= samples; ++i) {
      const double s = a + i * ds;
      const double d2 = (gamma_(s) - x).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_s = s;
        spacing = ds;
      }
    }
  }
  const auto iv = *std::find_if(intervals_.begin(), intervals_.end(), [&](const Interval &v) {
    return best_s >= v.first && best_s <= v.second;
  });
  double lo = std::max(iv.first, best_s - spacing);
  double hi = std::min(iv.second, best_s + spacing);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  auto f = [&](double s) { return (gamma_(s) - x).squaredNorm(); };
  double c = hi - phi * (hi - lo);
  double d = lo + phi * (hi - lo);
  for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
    if (f(c) < f(d)) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - phi * (hi - lo);
    d = lo + phi * (hi - lo);
  }
  return gamma_(0.5 * (lo + hi));
}

// ---------------------------------------------------------------------------
// Obstacle

Obstacle Obstacle::circular_chamber(double r_outer, double r_inner, double d)
{
  if (!(r_inner > 0.0 && r_outer > r_inner && d > 0.0 && d < 2.0 * r_inner)) {
    throw ConfigError("circular_chamber requires 0 < r_inner < r_outer and 0 < d < 2 r_inner");
  }
  Obstacle o;
  o.kind_ = ObstacleKind::circular_chamber;
  o.params_ = {{"r_outer", r_outer}, {"r_inner", r_inner}, {"d", d}};
  const double half = 0.5 * d;
  o.oracle_ = [=](const Point &x) {
    const double r = x.norm();
    return r > r_inner && r < r_outer && (x.x() < 0.0 || std::abs(x.y()) > half);
  };
  o.bound_radius_ = r_outer;
  o.curvature_bound_ = 1.0 / r_inner;

  const double ao = std::asin(half / r_outer);
  const double ai = std::asin(half / r_inner);
  const double xo = r_outer * std::cos(ao);
  const double xi = r_inner * std::cos(ai);
  std::vector<BoundaryPiece> pieces{
      BoundaryPiece::arc(Point::Zero(), r_outer, ao, two_pi - 2.0 * ao),
      BoundaryPiece::segment(Point(xo, -half), Point(xi, -half)),
      BoundaryPiece::arc(Point::Zero(), r_inner, -ai, -(two_pi - 2.0 * ai)),
      BoundaryPiece::segment(Point(xi, half), Point(xo, half)),
  };
  o.boundary_ = BoundaryParam(std::move(pieces), {4});
  return o;
}

Obstacle Obstacle::four_disks(double radius, double offset)
{
  if (!(radius > 0.0 && offset > radius)) {
    throw ConfigError("four_disks requires 0 < radius < offset");
  }
  Obstacle o;
  o.kind_ = ObstacleKind::four_disks;
  o.params_ = {{"radius", radius}, {"offset", offset}};
  const std::vector<Point> centers{
      {offset, offset}, {-offset, offset}, {-offset, -offset}, {offset, -offset}};
  o.oracle_ = [=](const Point &x) {
    return std::any_of(centers.begin(), centers.end(),
                       [&](const Point &c) { return (x - c).norm() < radius; });
  };
  o.bound_radius_ = std::sqrt(2.0) * offset + radius;
  o.curvature_bound_ = 1.0 / radius;
  std::vector<BoundaryPiece> pieces;
  for (const auto &c : centers) {
    pieces.push_back(BoundaryPiece::arc(c, radius, 0.0, two_pi));
  }
  o.boundary_ = BoundaryParam(std::move(pieces), {1, 1, 1, 1});
  return o;
}

Obstacle Obstacle::disk(double radius, const Point &center)
{
  if (!(radius > 0.0)) {
    throw ConfigError("disk requires a positive radius");
  }
  Obstacle o;
  o.kind_ = ObstacleKind::disk;
  o.params_ = {{"radius", radius}, {"cx", center.x()}, {"cy", center.y()}};
  o.oracle_ = [=](const Point &x) { return (x - center).norm() < radius; };
  o.bound_radius_ = center.norm() + radius;
  o.curvature_bound_ = 1.0 / radius;
  o.boundary_ = BoundaryParam({BoundaryPiece::arc(center, radius, 0.0, two_pi)}, {1});
  return o;
}

Obstacle Obstacle::annulus_with_gap(double r_outer, double r_inner, double gap)
{
  if (!(r_inner > 0.0 && r_outer > r_inner && gap > 0.0 && gap < two_pi)) {
    throw ConfigError("annulus_with_gap requires 0 < r_inner < r_outer and 0 < gap < 2 pi");
  }
  Obstacle o;
  o.kind_ = ObstacleKind::annulus_with_gap;
  o.params_ = {{"r_outer", r_outer}, {"r_inner", r_inner}, {"gap", gap}};
  const double half = 0.5 * gap;
  o.oracle_ = [=](const Point &x) {
    const double r = x.norm();
    return r > r_inner && r < r_outer && std::abs(std::atan2(x.y(), x.x())) > half;
  };
  o.bound_radius_ = r_outer;
  o.curvature_bound_ = 1.0 / r_inner;
  const Point lo(std::cos(half), -std::sin(half));
  const Point hi(std::cos(half), std::sin(half));
  std::vector<BoundaryPiece> pieces{
      BoundaryPiece::arc(Point::Zero(), r_outer, half, two_pi - gap),
      BoundaryPiece::segment(r_outer * lo, r_inner * lo),
      BoundaryPiece::arc(Point::Zero(), r_inner, -half, -(two_pi - gap)),
      BoundaryPiece::segment(r_inner * hi, r_outer * hi),
  };
  o.boundary_ = BoundaryParam(std::move(pieces), {4});
  return o;
}

Obstacle Obstacle::custom(Oracle oracle, double bound_radius, std::optional<BoundaryParam> boundary,
                          std::optional<double> curvature_bound)
{
  if (curvature_bound && !(*curvature_bound > 0.0)) {
    throw ConfigError("curvature bound must be positive");
  }
  Obstacle o;
  o.kind_ = ObstacleKind::custom;
  o.oracle_ = std::move(oracle);
  o.bound_radius_ = bound_radius;
  o.boundary_ = std::move(boundary);
  o.curvature_bound_ = curvature_bound;
  return o;
}

Obstacle Obstacle::empty()
{
  Obstacle o = custom([](const Point &) { return false; }, 0.0, BoundaryParam{});
  o.empty_ = true;
  return o;
}

Obstacle Obstacle::from_spec(const std::string &kind, const std::map<std::string, double> &params)
{
  if (kind == "circular_chamber") {
    const auto p = merged({{"r_outer", 2.0}, {"r_inner", 1.8}, {"d", 1.3}}, params, kind);
    return circular_chamber(p.at("r_outer"), p.at("r_inner"), p.at("d"));
  }
  if (kind == "four_disks") {
    const auto p = merged({{"radius", 0.6}, {"offset", 1.0}}, params, kind);
    return four_disks(p.at("radius"), p.at("offset"));
  }
  if (kind == "disk") {
    const auto p = merged({{"radius", 1.0}, {"cx", 0.0}, {"cy", 0.0}}, params, kind);
    return disk(p.at("radius"), Point(p.at("cx"), p.at("cy")));
  }
  if (kind == "annulus_with_gap") {
    const auto p =
        merged({{"r_outer", 2.0}, {"r_inner", 1.8}, {"gap", 0.7}}, params, kind);
    return annulus_with_gap(p.at("r_outer"), p.at("r_inner"), p.at("gap"));
  }
  if (kind == "empty") {
    merged({}, params, kind);
    return empty();
  }
  if (kind == "custom") {
    throw ConfigError("custom obstacles need a library-supplied oracle");
  }
  throw ConfigError("unknown obstacle kind '" + kind + "'");
}

bool Obstacle::contains(const Point &x) const
{
  if (!oracle_) {
    throw ConfigError("custom obstacle has no characteristic-function oracle");
  }
  return oracle_(x);
}

const BoundaryParam &Obstacle::boundary() const
{
  if (!boundary_) {
    throw UnsupportedError("obstacle has no boundary parametrization");
  }
  return *boundary_;
}

Point boundary_point(const Obstacle &obstacle, double s)
{
  return obstacle.boundary().point(s);
}

}  // namespace helmres
