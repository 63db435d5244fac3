#pragma once

#include <cmath>
#include <vector>

namespace gsmloc
{

// Cartesian position in meters.
struct point3
{
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr point3 operator+(point3 a, point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr point3 operator-(point3 a, point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr point3 operator-(point3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr point3 operator*(double s, point3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr point3 operator*(point3 a, double s) { return s * a; }
  friend constexpr bool operator==(point3 a, point3 b) = default;
};

constexpr double dot(point3 a, point3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr point3 cross(point3 a, point3 b)
{
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

constexpr double squared_norm(point3 a) { return dot(a, a); }

inline double norm(point3 a) { return std::hypot(a.x, a.y, a.z); }

inline bool is_finite(point3 a) { return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z); }

// Euclidean distance in meters.
inline double distance(point3 a, point3 b) { return norm(a - b); }

// A fixed ranging anchor ("signal mast").
struct tower_site
{
  int id = 0;
  point3 position;

  friend bool operator==(const tower_site &, const tower_site &) = default;
};

// Towers arranged in concentric rings around `center`. Ring k (1-based)
// holds 6k towers evenly spaced in angle at distance k * radius, the first
// one on the +x axis. Ids run 0..count-1 in ring-then-angle order and every
// tower shares center.z.
//
// Throws invalid_argument_error for radius <= 0 or n_rings < 1.
std::vector<tower_site> hex_cell_layout(point3 center, double radius, int n_rings);

// Throws invalid_argument_error when ids repeat or a position is not finite.
void validate_towers(const std::vector<tower_site> &towers);

} // namespace gsmloc
