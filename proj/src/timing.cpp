#include "gsmloc/timing.hpp"

#include "gsmloc/error.hpp"

#include <cmath>
#include <string>

namespace gsmloc
{

namespace
{

double mode_divisor(ranging_mode m) { return m == ranging_mode::round_trip ? 2.0 : 1.0; }

} // namespace

std::string_view to_string(ranging_mode m) { return m == ranging_mode::round_trip ? "round_trip" : "one_way"; }

ranging_mode parse_ranging_mode(std::string_view text)
{
  if (text == "round_trip")
    return ranging_mode::round_trip;
  if (text == "one_way")
    return ranging_mode::one_way;
  throw invalid_argument_error("unknown ranging mode '" + std::string(text) + "'");
}

void timing_model::validate() const
{
  if (!(c > 0.0) || !std::isfinite(c))
    throw invalid_argument_error("propagation speed must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw invalid_argument_error("internal delay must be non-negative");
  if (!(clock_resolution >= 0.0) || !std::isfinite(clock_resolution))
    throw invalid_argument_error("clock resolution must be non-negative");
}

double distance_from_turnaround(double turnaround, const timing_model &model)
{
  if (turnaround < model.alpha)
    throw negative_interval_error("turn-around time " + std::to_string(turnaround) + " s is shorter than delay " +
                                  std::to_string(model.alpha) + " s");
  return (turnaround - model.alpha) * model.c / mode_divisor(model.mode);
}

double calibrate_delay(double anchor_turnaround, double anchor_distance, const timing_model &model)
{
  if (!(anchor_distance >= 0.0))
    throw invalid_argument_error("anchor distance must be non-negative");
  const double alpha = anchor_turnaround - anchor_distance * mode_divisor(model.mode) / model.c;
  if (alpha < 0.0)
    throw calibration_error("calibrated delay is negative (" + std::to_string(alpha) + " s)");
  return alpha;
}

double quantize(double t, double resolution)
{
  if (resolution == 0.0)
    return t;
  // floor(t / resolution) can land one tick off when t is an exact multiple
  // that does not survive the division; settle it against the product.
  double ticks = std::floor(t / resolution);
  if ((ticks + 1.0) * resolution <= t)
    ticks += 1.0;
  else if (ticks * resolution > t)
    ticks -= 1.0;
  return ticks * resolution;
}

feasibility_report required_precision(double range, double c, double available)
{
  if (!(range > 0.0))
    throw invalid_argument_error("range must be positive");
  if (!(c > 0.0))
    throw invalid_argument_error("propagation speed must be positive");
  if (!(available >= 0.0))
    throw invalid_argument_error("available precision must be non-negative");
  feasibility_report report;
  report.range = range;
  report.required_precision = range / c;
  report.available_precision = available;
  report.feasible = available <= report.required_precision;
  return report;
}

double percent_error(double actual, double calculated)
{
  if (actual == 0.0)
    throw invalid_argument_error("percent error is undefined for an actual value of 0");
  return (actual - calculated) / actual * 100.0;
}

} // namespace gsmloc
