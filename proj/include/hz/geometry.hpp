#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hz/point.hpp"
#include "hz/rng.hpp"

namespace hz {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ScalarFn = std::function<double(double)>;

struct FullSpace {
  int dim = 1;
};
// Axis-aligned interval / rectangle / cuboid.
struct Box {
  Point lo, hi;
};
// Wide cylinder |x2| < R0 for x1 < 0 joined to the narrow one |x2| < r0 for x1 >= 0.
struct Opening {
  double r0 = 0, R0 = 0;
};
// Narrow cylinder |x2| < r0 for x1 >= 0, widening with half-angle alpha for x1 < 0.
struct Cone {
  double r0 = 0, alpha = 0;
};
// |x2| < H + h(-x1).
struct ProfileCylinder {
  double H = 0;
  ScalarFn h, hprime;
};
struct BallDomain {
  Point center;
  double radius = 0;
};

// Closed segment {origin + s*dir : s0 <= s <= s1} of a boundary line, with its
// unit normal pointing into the domain. s0/s1 may be infinite.
struct BoundaryLine {
  Point origin, dir, normal;
  double s0 = 0, s1 = 0;
  std::string label;

  Point at(double s) const { return origin + dir * s; }
  double offset(const Point& x) const { return dot(x - origin, normal); }
  double param(const Point& x) const { return dot(x - origin, dir); }
  Point project(const Point& x) const { return x - normal * offset(x); }
  Point mirror(const Point& x) const { return x - normal * (2.0 * offset(x)); }
  bool projection_in_segment(const Point& x, double tol = 1e-12) const {
    const double s = param(x);
    return s >= s0 - tol && s <= s1 + tol;
  }
  double distance_to(const Point& x) const;
};

class Domain {
 public:
  using Shape = std::variant<FullSpace, Box, Opening, Cone, ProfileCylinder, BallDomain>;

  static Domain full_space(int d);
  static Domain box(const Point& lo, const Point& hi);
  static Domain opening(double r0, double R0);
  static Domain cone(double r0, double alpha);
  static Domain profile_cylinder(double H, ScalarFn h, ScalarFn hprime);
  static Domain ball(const Point& center, double radius);

  const Shape& shape() const { return shape_; }
  int dim() const { return dim_; }
  const std::vector<BoundaryLine>& lines() const { return lines_; }
  bool lines_meet(int i, int j) const;
  // Smallest geometric length scale; reflected steps must stay below half of it.
  double feature_size() const { return feature_; }
  // Largest admissible event radius for ball classification and reflected sampling.
  double max_ball_radius() const { return max_ball_; }
  // Reflected motion can be sampled exactly in one jump (free space, boxes).
  bool exact_transitions() const {
    return std::holds_alternative<FullSpace>(shape_) || std::holds_alternative<Box>(shape_);
  }

 private:
  Domain(Shape s, int d) : shape_(std::move(s)), dim_(d) {}
  void finish_lines();

  Shape shape_;
  int dim_ = 1;
  std::vector<BoundaryLine> lines_;
  std::vector<std::vector<char>> meet_;
  double feature_ = std::numeric_limits<double>::infinity();
  double max_ball_ = std::numeric_limits<double>::infinity();
};

bool contains(const Domain& domain, const Point& x);

struct ShellSpec {
  double r = 0;
  double center_offset = 0;
};

double signed_distance_shell(const Domain& domain, const ShellSpec& shell, const Point& x);

// Specular reflection of the step from -> proposed back into the domain.
Point reflect_step(const Domain& domain, const Point& from, const Point& proposed);

// Mirror-image fold of x into the box.
Point fold_into_box(const Box& box, const Point& x);

// Critical radius (d-1)/nu.
double critical_radius(double nu, int d);

std::vector<double> default_zgrid(int points = 10000, double zmin = 1e-4, double zmax = 1e2);

double blocking_functional(double H, const ScalarFn& h, const ScalarFn& hprime, double nu, int d,
                           const std::vector<double>& zgrid);

double boundary_angle_product(double H, const ScalarFn& h, const ScalarFn& hprime, double z, double r,
                              double x1);

// Shell radius chosen at profile point z for the off-centre blocking construction.
double profile_shell_radius(double H, const ScalarFn& h, const ScalarFn& hprime, double z, double nu, int d);

enum class Verdict { Blocking, Invasion, Ambiguous };
const char* verdict_name(Verdict v);

Verdict opening_verdict(double r0, double R0, double nu, int d, double tol = 1e-9);
Verdict cone_verdict(double r0, double alpha, double nu, int d, double tol = 1e-9);
Verdict profile_verdict(double H, const ScalarFn& h, const ScalarFn& hprime, double nu, int d,
                        const std::vector<double>& zgrid, double tol = 1e-9);

enum class BallKind { Inside, Outside, Side, Corner, Hallway };
const char* ball_kind_name(BallKind k);

struct BallClass {
  BallKind kind = BallKind::Inside;
  int line1 = -1, line2 = -1;
};

BallClass classify_ball(const Domain& domain, const Point& center, double radius);

std::vector<Point> reflected_preimages(const Domain& domain, const Point& w, const Point& center,
                                       double radius);

Point uniform_in_ball(const Point& center, double radius, Rng& rng);

Point reflected_sample(const Domain& domain, const Point& center, double radius, Rng& rng);

}  // namespace hz
