#pragma once

#include "gsmloc/geometry.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace gsmloc
{

// One plane a_x*x + a_y*y + a_z*z = rhs obtained by subtracting the sphere
// equation of tower b from that of tower a:
//   a = 2 (T_b - T_a),  rhs = r_a^2 - r_b^2 - |T_a|^2 + |T_b|^2
struct difference_row
{
  double a_x = 0.0;
  double a_y = 0.0;
  double a_z = 0.0;
  double rhs = 0.0;
};

// Cyclic sphere differences (1-2, 2-3, 3-1). The three rows always sum to
// zero, so the coefficient matrix has rank at most 2.
struct linear_system3
{
  std::array<difference_row, 3> rows;

  // Determinant of the 3x3 coefficient block.
  [[nodiscard]] double determinant() const;
  // Largest |coefficient|, used to scale the determinant check.
  [[nodiscard]] double coefficient_scale() const;
};

enum class z_convention
{
  nonnegative,
  nonpositive,
};

enum class solve_method
{
  three_tower_quadratic,
  least_squares,
};

enum class z_branch
{
  nonnegative,
  nonpositive,
  unique,
};

// How the out-of-plane component was obtained on the three-tower path.
enum class plane_clamp
{
  none,         // real roots; branch picked by convention
  noise,        // small negative discriminant, clamped onto the tower plane
  inconsistent, // discriminant far below zero; clamped, residuals will show it
};

std::string_view to_string(z_convention v);
std::string_view to_string(solve_method v);
std::string_view to_string(z_branch v);
std::string_view to_string(plane_clamp v);

// Parses "nonnegative" / "nonpositive"; throws invalid_argument_error.
z_convention parse_z_convention(std::string_view text);

// One ranging exchange with a tower.
struct range_measurement
{
  tower_site tower;
  double turnaround = 0.0; // seconds, as read on the mobile's clock
  double range = 0.0;      // meters
};

struct location_fix
{
  point3 position;
  std::vector<double> residuals;
  solve_method method = solve_method::three_tower_quadratic;
  z_branch branch = z_branch::unique;
  plane_clamp clamp = plane_clamp::none;
  // r_1^2 - |in-plane offset|^2 on the quadratic path (square of the
  // distance from the tower plane); zero for least squares.
  double discriminant = 0.0;

  [[nodiscard]] double max_residual() const;
};

struct solve_options
{
  z_convention convention = z_convention::nonnegative;
  // One-sigma range noise in meters. Discriminants down to
  // -(3 sigma) * 2 r_1 are treated as noise and clamped silently.
  double range_sigma = 0.0;
};

// Rows for pairs (1,2), (2,3), (3,1).
// Throws degenerate_geometry_error when two towers share a position.
linear_system3 build_difference_system(std::span<const tower_site, 3> towers, std::span<const double, 3> ranges);

// Three-tower fix. The two independent difference rows pin the position to
// a line normal to the tower plane; sphere 1 then gives a quadratic along
// that line whose root is selected by `options.convention`. The direction
// "nonnegative" is the plane normal oriented toward +z (falling back to +y,
// then +x for vertical planes), so for towers on z = const it is plain z.
//
// Throws degenerate_geometry_error for collinear towers and
// invalid_argument_error for negative ranges.
location_fix solve_position(std::span<const tower_site, 3> towers, std::span<const double, 3> ranges,
                            const solve_options &options = {});

// |distance(position, tower_i) - r_i| for each tower.
std::vector<double> residuals(point3 position, std::span<const tower_site> towers, std::span<const double> ranges);

// Linearized least squares over differences against the first tower, for
// four or more towers. Throws degenerate_geometry_error when the difference
// rows do not span three dimensions (e.g. all towers coplanar).
location_fix multilaterate_lsq(std::span<const tower_site> towers, std::span<const double> ranges);

// Dispatch used by callers with a variable tower count: exactly three go
// through solve_position, more through multilaterate_lsq.
location_fix locate(std::span<const tower_site> towers, std::span<const double> ranges,
                    const solve_options &options = {});

} // namespace gsmloc
