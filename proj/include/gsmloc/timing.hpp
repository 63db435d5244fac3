#pragma once

#include <string_view>

namespace gsmloc
{

inline constexpr double speed_of_light = 3.0e8; // m/s, value used throughout the ranging model

enum class ranging_mode
{
  round_trip, // the interval covers tower and back, halve it
  one_way,
};

std::string_view to_string(ranging_mode m);
// "round_trip" / "one_way"; throws invalid_argument_error.
ranging_mode parse_ranging_mode(std::string_view text);

// Turn-around time T = alpha + time_prop, time_prop = D / c.
struct timing_model
{
  double alpha = 0.0;            // constant internal delay, seconds
  double c = speed_of_light;     // propagation speed, m/s
  ranging_mode mode = ranging_mode::round_trip;
  double clock_resolution = 0.0; // seconds; 0 = exact timestamps

  // Throws invalid_argument_error unless c > 0, alpha >= 0, resolution >= 0.
  void validate() const;
};

// Range in meters for a measured turn-around time.
// Throws negative_interval_error if turnaround < model.alpha.
double distance_from_turnaround(double turnaround, const timing_model &model);

// The alpha making distance_from_turnaround(anchor_turnaround) equal
// anchor_distance under model's mode and c (model.alpha is ignored).
// Throws calibration_error if that alpha would be negative.
double calibrate_delay(double anchor_turnaround, double anchor_distance, const timing_model &model);

// Truncate t onto the clock grid. resolution 0 is the identity.
double quantize(double t, double resolution);

struct feasibility_report
{
  double range = 0.0;
  double required_precision = 0.0;  // range / c
  double available_precision = 0.0; // clock resolution on hand
  bool feasible = false;            // available <= required
};

// Throws invalid_argument_error for range <= 0 or c <= 0.
feasibility_report required_precision(double range, double c, double available);

// (actual - calculated) / actual * 100. Throws invalid_argument_error for actual == 0.
double percent_error(double actual, double calculated);

} // namespace gsmloc
