#include "gsmloc/trilateration.hpp"

#include "gsmloc/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace gsmloc
{

namespace
{

constexpr double collinearity_threshold = 1e-9;

difference_row make_row(point3 ta, double ra, point3 tb, double rb)
{
  const point3 n = 2.0 * (tb - ta);
  return {n.x, n.y, n.z, ra * ra - rb * rb - squared_norm(ta) + squared_norm(tb)};
}

void check_ranges(std::span<const double> ranges)
{
  for (double r : ranges)
    if (!std::isfinite(r) || r < 0.0)
      throw invalid_argument_error("range must be finite and non-negative, got " + std::to_string(r));
}

// Unit normal of the tower plane, pointing toward +z (or +y, +x when the
// plane is vertical).
point3 oriented_normal(point3 n)
{
  n = (1.0 / norm(n)) * n;
  constexpr double vertical = 1e-12;
  double key = n.z;
  if (std::abs(key) <= vertical)
    key = std::abs(n.y) > vertical ? n.y : n.x;
  return key < 0.0 ? -n : n;
}

} // namespace

double linear_system3::determinant() const
{
  const auto &[r0, r1, r2] = rows;
  return r0.a_x * (r1.a_y * r2.a_z - r1.a_z * r2.a_y) - r0.a_y * (r1.a_x * r2.a_z - r1.a_z * r2.a_x) +
         r0.a_z * (r1.a_x * r2.a_y - r1.a_y * r2.a_x);
}

double linear_system3::coefficient_scale() const
{
  double m = 0.0;
  for (const auto &r : rows)
    m = std::max({m, std::abs(r.a_x), std::abs(r.a_y), std::abs(r.a_z)});
  return m;
}

std::string_view to_string(z_convention v)
{
  return v == z_convention::nonnegative ? "nonnegative" : "nonpositive";
}

std::string_view to_string(solve_method v)
{
  return v == solve_method::three_tower_quadratic ? "three-tower-quadratic" : "least-squares";
}

std::string_view to_string(z_branch v)
{
  switch (v)
  {
  case z_branch::nonnegative:
    return "nonnegative";
  case z_branch::nonpositive:
    return "nonpositive";
  case z_branch::unique:
    break;
  }
  return "unique";
}

std::string_view to_string(plane_clamp v)
{
  switch (v)
  {
  case plane_clamp::none:
    return "none";
  case plane_clamp::noise:
    return "noise";
  case plane_clamp::inconsistent:
    break;
  }
  return "inconsistent";
}

z_convention parse_z_convention(std::string_view text)
{
  if (text == "nonnegative")
    return z_convention::nonnegative;
  if (text == "nonpositive")
    return z_convention::nonpositive;
  throw invalid_argument_error("unknown z convention '" + std::string(text) + "'");
}

double location_fix::max_residual() const
{
  double m = 0.0;
  for (double r : residuals)
    m = std::max(m, r);
  return m;
}

linear_system3 build_difference_system(std::span<const tower_site, 3> towers, std::span<const double, 3> ranges)
{
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (towers[i].position == towers[j].position)
        throw degenerate_geometry_error("towers " + std::to_string(towers[i].id) + " and " +
                                        std::to_string(towers[j].id) + " share a position");

  linear_system3 sys;
  for (int i = 0; i < 3; ++i)
  {
    const int j = (i + 1) % 3;
    sys.rows[i] = make_row(towers[i].position, ranges[i], towers[j].position, ranges[j]);
  }
  return sys;
}

location_fix solve_position(std::span<const tower_site, 3> towers, std::span<const double, 3> ranges,
                            const solve_options &options)
{
  check_ranges(ranges);
  const point3 t1 = towers[0].position;
  const point3 b = towers[1].position - t1;
  const point3 c = towers[2].position - t1;

  const double longest = std::max({squared_norm(b), squared_norm(c), squared_norm(c - b)});
  const point3 normal = cross(b, c);
  if (longest == 0.0 || 0.5 * norm(normal) < collinearity_threshold * longest)
    throw degenerate_geometry_error("tower positions are collinear");

  // Rows (1-2) and (2-3) of the difference system, written relative to
  // tower 1 so large absolute coordinates do not cancel:
  //   2 b . q = r1^2 - r2^2 + |b|^2
  //   2 (c - b) . q = r2^2 - r3^2 + |c|^2 - |b|^2
  // q = u e1 + v e2 solves both inside the tower plane.
  const double r1 = ranges[0], r2 = ranges[1], r3 = ranges[2];
  const double rhs1 = r1 * r1 - r2 * r2 + squared_norm(b);
  const double rhs2 = r2 * r2 - r3 * r3 + squared_norm(c) - squared_norm(b);

  const double b_len = norm(b);
  const point3 e1 = (1.0 / b_len) * b;
  const point3 c_perp = c - dot(c, e1) * e1;
  const double c_perp_len = norm(c_perp);
  const point3 e2 = (1.0 / c_perp_len) * c_perp;

  const double u = rhs1 / (2.0 * b_len);
  const double v = (rhs2 - 2.0 * u * dot(c - b, e1)) / (2.0 * c_perp_len);

  // Remaining unknown: height t along the plane normal, from sphere 1.
  const double in_plane = std::hypot(u, v);
  const double disc = (r1 - in_plane) * (r1 + in_plane);
  const double roundoff = 256.0 * std::numeric_limits<double>::epsilon() * std::max(r1 * r1, in_plane * in_plane);
  const double noise = 3.0 * options.range_sigma * 2.0 * r1;

  location_fix fix;
  fix.method = solve_method::three_tower_quadratic;
  fix.discriminant = disc;
  double height = 0.0;
  if (disc > roundoff)
  {
    height = std::sqrt(disc);
    if (options.convention == z_convention::nonpositive)
      height = -height;
    fix.branch = options.convention == z_convention::nonnegative ? z_branch::nonnegative : z_branch::nonpositive;
  }
  else
  {
    fix.branch = z_branch::unique;
    if (disc >= -roundoff)
      fix.clamp = plane_clamp::none;
    else if (disc >= -(noise + roundoff))
      fix.clamp = plane_clamp::noise;
    else
      fix.clamp = plane_clamp::inconsistent;
  }

  fix.position = t1 + u * e1 + v * e2 + height * oriented_normal(normal);
  fix.residuals = residuals(fix.position, std::span<const tower_site>(towers), std::span<const double>(ranges));
  return fix;
}

std::vector<double> residuals(point3 position, std::span<const tower_site> towers, std::span<const double> ranges)
{
  if (towers.size() != ranges.size())
    throw invalid_argument_error("residuals: tower and range counts differ");
  std::vector<double> out;
  out.reserve(towers.size());
  for (std::size_t i = 0; i < towers.size(); ++i)
    out.push_back(std::abs(distance(position, towers[i].position) - ranges[i]));
  return out;
}

location_fix multilaterate_lsq(std::span<const tower_site> towers, std::span<const double> ranges)
{
  if (towers.size() != ranges.size())
    throw invalid_argument_error("multilaterate_lsq: tower and range counts differ");
  if (towers.size() < 4)
    throw insufficient_measurements_error("multilaterate_lsq needs at least 4 towers, got " +
                                          std::to_string(towers.size()));
  check_ranges(ranges);

  const point3 t0 = towers[0].position;
  const double r0 = ranges[0];
  const auto rows = static_cast<Eigen::Index>(towers.size() - 1);
  Eigen::MatrixX3d a(rows, 3);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i)
  {
    const point3 d = towers[static_cast<std::size_t>(i) + 1].position - t0;
    const double ri = ranges[static_cast<std::size_t>(i) + 1];
    a.row(i) << 2.0 * d.x, 2.0 * d.y, 2.0 * d.z;
    rhs(i) = r0 * r0 - ri * ri + squared_norm(d);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixX3d> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3)
    throw degenerate_geometry_error("difference rows have rank " + std::to_string(qr.rank()) +
                                    " (towers coplanar or collinear)");
  const Eigen::Vector3d q = qr.solve(rhs);

  location_fix fix;
  fix.method = solve_method::least_squares;
  fix.branch = z_branch::unique;
  fix.position = t0 + point3{q.x(), q.y(), q.z()};
  fix.residuals = residuals(fix.position, towers, ranges);
  return fix;
}

location_fix locate(std::span<const tower_site> towers, std::span<const double> ranges, const solve_options &options)
{
  if (towers.size() != ranges.size())
    throw invalid_argument_error("locate: tower and range counts differ");
  if (towers.size() < 3)
    throw insufficient_measurements_error("need at least 3 towers, got " + std::to_string(towers.size()));
  if (towers.size() == 3)
    return solve_position(towers.first<3>(), ranges.first<3>(), options);
  return multilaterate_lsq(towers, ranges);
}

} // namespace gsmloc
