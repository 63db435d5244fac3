#include "gsmloc/simulator.hpp"

#include "gsmloc/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <thread>

namespace gsmloc
{

namespace
{

double unit_uniform(std::mt19937_64 &gen) { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }

std::string format_line(const char *fmt, auto... args)
{
  char buf[256];
  const int n = std::snprintf(buf, sizeof buf, fmt, args...);
  return std::string(buf, static_cast<std::size_t>(std::clamp(n, 0, static_cast<int>(sizeof buf) - 1)));
}

// One-sigma range error from truncating both ends of the interval onto the
// clock grid (uniform over one tick).
double quantization_sigma(const timing_model &model)
{
  const double divisor = model.mode == ranging_mode::round_trip ? 2.0 : 1.0;
  return model.clock_resolution * model.c / divisor / std::sqrt(12.0);
}

} // namespace

void scenario_config::validate() const
{
  if (towers.size() < 3)
    throw invalid_argument_error("scenario needs at least 3 towers, got " + std::to_string(towers.size()));
  validate_towers(towers);
  if (!is_finite(mobile))
    throw invalid_argument_error("mobile position is not finite");
  timing.validate();
  if (!(tower_processing_delay >= 0.0) || !std::isfinite(tower_processing_delay))
    throw invalid_argument_error("tower processing delay must be non-negative");
  if (!(start_time >= 0.0) || !std::isfinite(start_time))
    throw invalid_argument_error("start time must be non-negative");
  if (!(packet_loss >= 0.0 && packet_loss < 1.0))
    throw invalid_argument_error("packet loss probability must be in [0, 1)");
  if (trials < 1)
    throw invalid_argument_error("trials must be at least 1");
}

std::string_view to_string(event_kind k)
{
  return k == event_kind::request_arrives ? "request_arrives" : "ack_arrives";
}

bool event_queue::later::operator()(const entry &a, const entry &b) const
{
  if (a.ev.time != b.ev.time)
    return a.ev.time > b.ev.time;
  if (a.ev.kind != b.ev.kind)
    return a.ev.kind > b.ev.kind;
  if (a.ev.tower != b.ev.tower)
    return a.ev.tower > b.ev.tower;
  return a.sequence > b.sequence;
}

void event_queue::schedule(event e) { heap_.push({std::move(e), next_sequence_++}); }

event event_queue::pop()
{
  event e = heap_.top().ev;
  heap_.pop();
  return e;
}

scenario_result run_scenario(const scenario_config &config)
{
  config.validate();
  const timing_model &model = config.timing;
  const double c = model.c;

  std::mt19937_64 loss_gen(config.seed);
  auto dropped = [&] { return config.packet_loss > 0.0 && unit_uniform(loss_gen) < config.packet_loss; };

  // Broadcast: one request per tower, all stamped with the same send time.
  const request_packet request{quantize(config.start_time, model.clock_resolution), config.mobile_id};
  event_queue queue;
  for (const auto &tower : config.towers)
  {
    if (dropped())
      continue;
    event e;
    e.time = config.start_time + distance(config.mobile, tower.position) / c;
    e.kind = event_kind::request_arrives;
    e.tower = tower.id;
    e.payload = request;
    queue.schedule(std::move(e));
  }

  auto tower_by_id = [&](int id) -> const tower_site & {
    return *std::find_if(config.towers.begin(), config.towers.end(), [id](const auto &t) { return t.id == id; });
  };

  scenario_result result;
  while (!queue.empty())
  {
    event e = queue.pop();
    if (e.kind == event_kind::request_arrives)
    {
      // Tower answers with its coordinates and the untouched timestamp.
      const auto &req = std::get<request_packet>(e.payload);
      const tower_site &tower = tower_by_id(e.tower);
      ack_packet ack{req.mob_id, tower.id, tower.position, req.timestamp};
      e.ack_lost = dropped();
      if (!e.ack_lost)
      {
        event reply;
        reply.time = e.time + config.tower_processing_delay + distance(config.mobile, tower.position) / c;
        reply.kind = event_kind::ack_arrives;
        reply.tower = tower.id;
        reply.payload = ack;
        queue.schedule(std::move(reply));
      }
    }
    else
    {
      e.observed_time = quantize(e.time, model.clock_resolution);
      const auto &ack = std::get<ack_packet>(e.payload);
      range_measurement m;
      m.tower = tower_by_id(ack.tower);
      m.turnaround = e.observed_time - ack.timestamp;
      m.range = distance_from_turnaround(m.turnaround, model);
      result.measurements.push_back(m);
    }
    result.events.events.push_back(std::move(e));
  }

  const auto first = first_k_acks(result.events, 3, model);
  const std::array<tower_site, 3> towers{first[0].tower, first[1].tower, first[2].tower};
  const std::array<double, 3> ranges{first[0].range, first[1].range, first[2].range};
  result.fix = solve_position(towers, ranges, {config.convention, quantization_sigma(model)});
  return result;
}

std::vector<range_measurement> first_k_acks(const trace &t, int k, const timing_model &model)
{
  if (k < 3)
    throw invalid_argument_error("need k >= 3 acknowledgements, got " + std::to_string(k));

  std::vector<const event *> acks;
  for (const auto &e : t.events)
    if (e.kind == event_kind::ack_arrives)
      acks.push_back(&e);
  // Traces from run_scenario are already ordered; hand-built ones may not be.
  std::stable_sort(acks.begin(), acks.end(), [](const event *a, const event *b) {
    return a->time != b->time ? a->time < b->time : a->tower < b->tower;
  });
  if (acks.size() < static_cast<std::size_t>(k))
    throw insufficient_measurements_error("only " + std::to_string(acks.size()) + " acknowledgements, need " +
                                          std::to_string(k));

  std::vector<range_measurement> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i)
  {
    const event &e = *acks[static_cast<std::size_t>(i)];
    const auto &ack = std::get<ack_packet>(e.payload);
    range_measurement m;
    m.tower = {ack.tower, ack.tower_coord};
    m.turnaround = e.observed_time - ack.timestamp;
    m.range = distance_from_turnaround(m.turnaround, model);
    out.push_back(m);
  }
  return out;
}

std::string format_trace(const trace &t)
{
  std::string out;
  for (const auto &e : t.events)
  {
    if (e.kind == event_kind::request_arrives)
    {
      const auto &req = std::get<request_packet>(e.payload);
      out += format_line("%.9f\trequest_arrives\t%d\tmob=%d ts=%.9f%s\n", e.time, e.tower, req.mob_id, req.timestamp,
                         e.ack_lost ? " ack=lost" : "");
    }
    else
    {
      const auto &ack = std::get<ack_packet>(e.payload);
      out += format_line("%.9f\tack_arrives\t%d\tdst=%d ts=%.9f rx=%.9f coord=%.6f,%.6f,%.6f\n", e.time, e.tower,
                         ack.destination, ack.timestamp, e.observed_time, ack.tower_coord.x, ack.tower_coord.y,
                         ack.tower_coord.z);
    }
  }
  return out;
}

std::string format_measurements(const std::vector<range_measurement> &measurements, point3 mobile)
{
  std::string out = "tower_id,turnaround_s,distance_m,actual_m,pct_error\n";
  for (const auto &m : measurements)
  {
    const double actual = distance(mobile, m.tower.position);
    std::string pct = "NA";
    if (actual != 0.0)
    {
      double pct_value = percent_error(actual, m.range);
      if (std::abs(pct_value) < 5e-5)
        pct_value = 0.0; // keep "-0.0000" out of the CSV
      pct = format_line("%.4f", pct_value);
    }
    out += format_line("%d,%.9e,%.6f,%.6f,", m.tower.id, m.turnaround, m.range, actual) + pct + "\n";
  }
  return out;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

point3 sample_mobile(const mobile_sampler &sampler, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  const double r = sampler.horizontal_radius * std::sqrt(unit_uniform(gen));
  const double angle = 2.0 * std::numbers::pi * unit_uniform(gen);
  const double z = sampler.z_min + (sampler.z_max - sampler.z_min) * unit_uniform(gen);
  return {sampler.center.x + r * std::cos(angle), sampler.center.y + r * std::sin(angle), sampler.center.z + z};
}

std::vector<trial_result> run_trials(const scenario_config &config, const mobile_sampler &sampler, unsigned threads)
{
  config.validate();
  const auto count = static_cast<std::size_t>(config.trials);
  std::vector<trial_result> results(count);

  auto run_one = [&](std::size_t i) {
    trial_result &r = results[i];
    r.trial = i;
    scenario_config cfg = config;
    cfg.seed = trial_seed(config.seed, i);
    cfg.mobile = sample_mobile(sampler, cfg.seed);
    r.truth = cfg.mobile;
    try
    {
      r.fix = run_scenario(cfg).fix;
      r.position_error = distance(r.fix->position, r.truth);
    }
    catch (const error &e)
    {
      r.failure = e.what();
    }
  };

  threads = std::clamp(threads, 1u, static_cast<unsigned>(std::max<std::size_t>(count, 1)));
  if (threads == 1)
  {
    for (std::size_t i = 0; i < count; ++i)
      run_one(i);
    return results;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++)
        run_one(i);
    });
  pool.clear();
  return results;
}

double mean_position_error(const std::vector<trial_result> &results)
{
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto &r : results)
    if (r.fix)
    {
      sum += r.position_error;
      ++n;
    }
  if (n == 0)
    throw empty_data_error("no successful trials");
  return sum / static_cast<double>(n);
}

} // namespace gsmloc
