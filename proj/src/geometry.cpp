#include "gsmloc/geometry.hpp"

#include "gsmloc/error.hpp"

#include <numbers>
#include <set>
#include <string>

namespace gsmloc
{

std::vector<tower_site> hex_cell_layout(point3 center, double radius, int n_rings)
{
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw invalid_argument_error("hex_cell_layout: radius must be positive, got " + std::to_string(radius));
  if (n_rings < 1)
    throw invalid_argument_error("hex_cell_layout: need at least one ring");
  if (!is_finite(center))
    throw invalid_argument_error("hex_cell_layout: center is not finite");

  std::vector<tower_site> towers;
  towers.reserve(static_cast<std::size_t>(3 * n_rings * (n_rings + 1)));
  int id = 0;
  for (int ring = 1; ring <= n_rings; ++ring)
  {
    const int count = 6 * ring;
    const double r = ring * radius;
    for (int k = 0; k < count; ++k)
    {
      const double angle = 2.0 * std::numbers::pi * k / count;
      towers.push_back({id++, {center.x + r * std::cos(angle), center.y + r * std::sin(angle), center.z}});
    }
  }
  return towers;
}

void validate_towers(const std::vector<tower_site> &towers)
{
  std::set<int> seen;
  for (const auto &t : towers)
  {
    if (t.id < 0)
      throw invalid_argument_error("tower id must be non-negative: " + std::to_string(t.id));
    if (!seen.insert(t.id).second)
      throw invalid_argument_error("duplicate tower id " + std::to_string(t.id));
    if (!is_finite(t.position))
      throw invalid_argument_error("tower " + std::to_string(t.id) + " has a non-finite position");
  }
}

} // namespace gsmloc
