#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <stdexcept>

namespace hz {

inline constexpr int kMaxDim = 3;

// Fixed-capacity point in R^d, d <= 3.
struct Point {
  std::array<double, kMaxDim> c{};
  int dim = 0;

  Point() = default;
  explicit Point(int d) : dim(d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("dimension must be 1..3");
  }
  Point(std::initializer_list<double> v) : dim(static_cast<int>(v.size())) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("dimension must be 1..3");
    int i = 0;
    for (double x : v) c[i++] = x;
  }

  double& operator[](int i) { return c[i]; }
  double operator[](int i) const { return c[i]; }
  int size() const { return dim; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim; ++i) c[i] += o.c[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < dim; ++i) c[i] *= s;
    return *this;
  }
  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }
  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a.c[i] != b.c[i]) return false;
    return true;
  }
};

inline double dot(const Point& a, const Point& b) {
  double s = 0;
  for (int i = 0; i < a.dim; ++i) s += a[i] * b[i];
  return s;
}
inline double norm2(const Point& a) { return dot(a, a); }
inline double norm(const Point& a) { return std::sqrt(norm2(a)); }
inline double distance(const Point& a, const Point& b) { return norm(a - b); }

// Volume of the unit ball in R^d.
inline double unit_ball_volume(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw std::invalid_argument("dimension must be 1..3");
  }
}
inline double ball_volume(int d, double r) { return unit_ball_volume(d) * std::pow(r, d); }

}  // namespace hz
