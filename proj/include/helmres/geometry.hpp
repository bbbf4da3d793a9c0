// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace helmres
{

using Point = Eigen::Vector2d;

enum class ObstacleKind
{
  circular_chamber,
  four_disks,
  disk,
  annulus_with_gap,
  custom
};

std::string to_string(ObstacleKind kind);

/// Radial cutoff. Vanishes on [0, r0], equals one on [r1, inf), quintic
/// smoothstep in between, so rho' and rho'' vanish at both ends.
struct Cutoff
{
  explicit Cutoff(double R) : R(R), r0(R - 0.9), r1(R - 0.1) {}
  Cutoff(double R, double r0, double r1) : R(R), r0(r0), r1(r1) {}

  double R;
  double r0;
  double r1;
};

struct RhoValues
{
  double value;
  double d1;
  double d2;
};

RhoValues rho_eval(double r, const Cutoff &cutoff);

/// One smooth piece of a boundary curve, traversed at unit speed.
struct BoundaryPiece
{
  enum class Type
  {
    arc,
    segment
  };

  static BoundaryPiece arc(const Point &center, double radius, double theta0, double sweep);
  static BoundaryPiece segment(const Point &a, const Point &b);

  double length() const;
  Point at(double s) const;
  /// Arc-length position of the point on this piece closest to x.
  double closest(const Point &x) const;

  Type type = Type::segment;
  Point center = Point::Zero();  // arc
  double radius = 0.0;           // arc
  double theta0 = 0.0;           // arc, start angle
  double sweep = 0.0;            // arc, signed (ccw > 0)
  Point a = Point::Zero();       // segment
  Point b = Point::Zero();       // segment
};

/// Arc-length parametrization of dU over a union of parameter intervals
/// [a_k, b_k], one per closed boundary component.
class BoundaryParam
{
public:
  using Interval = std::pair<double, double>;

  BoundaryParam() = default;

  /// Built from closed-form pieces; consecutive pieces of one component
  /// share endpoints. `component_sizes` lists how many pieces each
  /// closed component has.
  BoundaryParam(std::vector<BoundaryPiece> pieces, std::vector<std::size_t> component_sizes);

  /// Built from an arbitrary unit-speed curve. The nearest-point query
  /// falls back to sampling plus golden-section refinement.
  BoundaryParam(std::function<Point(double)> gamma, std::vector<Interval> intervals);

  const std::vector<Interval> &intervals() const { return intervals_; }
  double total_length() const;
  bool empty() const { return intervals_.empty(); }

  /// gamma(s); throws RangeError outside the parameter domain.
  Point point(double s) const;
  /// Nearest point of the curve to x. Requires a non-empty curve.
  Point nearest(const Point &x) const;
  double distance(const Point &x) const { return (nearest(x) - x).norm(); }

private:
  std::vector<BoundaryPiece> pieces_;
  std::vector<double> piece_start_;
  std::function<Point(double)> gamma_;
  std::vector<Interval> intervals_;
};

/// An obstacle U, accessed through its characteristic function. Built-in
/// shapes also carry an exact boundary parametrization and curvature bound.
class Obstacle
{
public:
  using Oracle = std::function<bool(const Point &)>;

  /// Annulus r_inner < |x| < r_outer with the channel {x1 > 0, |x2| < d/2}
  /// removed; d is the full opening width.
  static Obstacle circular_chamber(double r_outer = 2.0, double r_inner = 1.8, double d = 1.3);
  /// Four open disks of the given radius centred at (+-offset, +-offset).
  static Obstacle four_disks(double radius = 0.6, double offset = 1.0);
  static Obstacle disk(double radius, const Point &center = Point::Zero());
  /// Annulus with the closed wedge |theta| <= gap/2 removed.
  static Obstacle annulus_with_gap(double r_outer, double r_inner, double gap);
  static Obstacle custom(Oracle oracle, double bound_radius,
                         std::optional<BoundaryParam> boundary = std::nullopt,
                         std::optional<double> curvature_bound = std::nullopt);
  /// U = empty set (a custom oracle that never reports membership).
  static Obstacle empty();

  /// Built-in shape from a kind name and a parameter map (CLI entry point).
  /// Unknown keys or kinds raise ConfigError.
  static Obstacle from_spec(const std::string &kind, const std::map<std::string, double> &params);

  ObstacleKind kind() const { return kind_; }
  const std::map<std::string, double> &params() const { return params_; }
  bool is_empty() const { return empty_; }

  /// chi_U(x). Throws ConfigError for a custom obstacle without oracle.
  bool contains(const Point &x) const;
  /// Radius r_U with chi_U = 0 outside B_{r_U}.
  double bound_radius() const { return bound_radius_; }
  std::optional<double> curvature_bound() const { return curvature_bound_; }
  bool has_boundary_param() const { return boundary_.has_value(); }
  /// Throws UnsupportedError when no parametrization is available.
  const BoundaryParam &boundary() const;

private:
  Obstacle() = default;

  ObstacleKind kind_ = ObstacleKind::custom;
  std::map<std::string, double> params_;
  Oracle oracle_;
  double bound_radius_ = 0.0;
  std::optional<double> curvature_bound_;
  std::optional<BoundaryParam> boundary_;
  bool empty_ = false;
};

/// chi_U(x) as a bit. Boundary points of U return 0.
inline int chi(const Obstacle &obstacle, const Point &x) { return obstacle.contains(x) ? 1 : 0; }

/// gamma_U(s).
Point boundary_point(const Obstacle &obstacle, double s);

}  // namespace helmres
