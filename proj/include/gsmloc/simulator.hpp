#pragma once

#include "gsmloc/geometry.hpp"
#include "gsmloc/timing.hpp"
#include "gsmloc/trilateration.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <variant>
#include <vector>

namespace gsmloc
{

struct scenario_config
{
  std::vector<tower_site> towers;
  point3 mobile;
  // The mobile's ranging model. alpha is what the mobile subtracts; the
  // physical delay actually added by every tower is tower_processing_delay.
  timing_model timing;
  double tower_processing_delay = 0.0;
  double start_time = 0.0;
  // Probability that a request or an ack is dropped. Off unless asked for.
  double packet_loss = 0.0;
  std::uint64_t seed = 0;
  int trials = 1;
  int mobile_id = 0;
  z_convention convention = z_convention::nonnegative;

  // Throws invalid_argument_error.
  void validate() const;
};

struct request_packet
{
  double timestamp = 0.0; // mobile clock at send
  int mob_id = 0;
};

struct ack_packet
{
  int destination = 0;
  int tower = 0;
  point3 tower_coord;
  double timestamp = 0.0; // echoed request timestamp, untouched
};

enum class event_kind
{
  request_arrives,
  ack_arrives,
};

std::string_view to_string(event_kind k);

struct event
{
  double time = 0.0;
  event_kind kind = event_kind::request_arrives;
  int tower = 0;
  std::variant<request_packet, ack_packet> payload;
  // ack_arrives only: the mobile's (quantized) reading of `time`.
  double observed_time = 0.0;
  // request_arrives only: the tower's answer never made it back.
  bool ack_lost = false;
};

// Min-queue on (time, kind, tower id), then insertion order.
class event_queue
{
public:
  void schedule(event e);
  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const { return heap_.size(); }
  event pop();

private:
  struct entry
  {
    event ev;
    std::uint64_t sequence;
  };
  struct later
  {
    bool operator()(const entry &a, const entry &b) const;
  };

  std::priority_queue<entry, std::vector<entry>, later> heap_;
  std::uint64_t next_sequence_ = 0;
};

// Every processed event, in processing order.
struct trace
{
  std::vector<event> events;
};

struct scenario_result
{
  trace events;
  // One entry per received ack, in arrival order.
  std::vector<range_measurement> measurements;
  location_fix fix;
};

// Runs the broadcast / acknowledge / locate exchange once for
// config.mobile. The fix uses the first three acks.
// Throws insufficient_measurements_error when fewer than three acks arrive
// and degenerate_geometry_error when the first three towers are collinear.
scenario_result run_scenario(const scenario_config &config);

// First k acks of the trace, turned into ranges under `model`.
// Throws insufficient_measurements_error if the trace holds fewer than k acks
// and invalid_argument_error if k < 3.
std::vector<range_measurement> first_k_acks(const trace &t, int k, const timing_model &model);

// Trace file: time<TAB>kind<TAB>tower_id<TAB>detail, 9 decimals.
std::string format_trace(const trace &t);

// Measurement CSV: tower_id,turnaround_s,distance_m,actual_m,pct_error.
std::string format_measurements(const std::vector<range_measurement> &measurements, point3 mobile);

// Mobile placement for Monte Carlo sweeps: uniform over a disk of
// `horizontal_radius` around `center` (in the xy plane), z uniform in
// [center.z + z_min, center.z + z_max].
struct mobile_sampler
{
  point3 center;
  double horizontal_radius = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;
};

struct trial_result
{
  std::uint64_t trial = 0;
  point3 truth;
  std::optional<location_fix> fix;
  std::string failure; // set when the trial threw
  double position_error = 0.0;
};

// Seed for trial `trial` of a sweep with base seed `seed`.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

// Mobile position drawn for a given trial seed.
point3 sample_mobile(const mobile_sampler &sampler, std::uint64_t seed);

// config.trials independent runs, each with its own mobile position. Output
// is a pure function of (config, sampler) regardless of `threads`.
std::vector<trial_result> run_trials(const scenario_config &config, const mobile_sampler &sampler,
                                     unsigned threads = 1);

double mean_position_error(const std::vector<trial_result> &results);

} // namespace gsmloc
