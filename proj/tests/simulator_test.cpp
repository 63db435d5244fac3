#include "gsmloc/error.hpp"
#include "gsmloc/simulator.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace gsmloc
{

namespace
{

scenario_config small_cell(point3 mobile)
{
  scenario_config cfg;
  cfg.towers = {{0, {0, 0, 0}}, {1, {10, 0, 0}}, {2, {0, 10, 0}}};
  cfg.mobile = mobile;
  cfg.timing = {0.0, 3e8, ranging_mode::round_trip, 0.0};
  return cfg;
}

scenario_config hex_cell(point3 mobile, double radius = 3000.0)
{
  scenario_config cfg;
  cfg.towers = hex_cell_layout({0, 0, 0}, radius, 1);
  cfg.mobile = mobile;
  cfg.timing = {0.0, 3e8, ranging_mode::round_trip, 0.0};
  return cfg;
}

} // namespace

TEST(EventQueue, OrdersByTimeKindTower)
{
  event_queue q;
  auto make = [](double t, event_kind k, int tower) {
    event e;
    e.time = t;
    e.kind = k;
    e.tower = tower;
    return e;
  };
  q.schedule(make(2.0, event_kind::request_arrives, 0));
  q.schedule(make(1.0, event_kind::ack_arrives, 1));
  q.schedule(make(1.0, event_kind::ack_arrives, 0));
  q.schedule(make(1.0, event_kind::request_arrives, 5));
  ASSERT_EQ(q.size(), 4u);
  auto e = q.pop();
  EXPECT_EQ(e.kind, event_kind::request_arrives);
  EXPECT_EQ(e.tower, 5);
  e = q.pop();
  EXPECT_EQ(e.tower, 0);
  e = q.pop();
  EXPECT_EQ(e.tower, 1);
  EXPECT_EQ(q.pop().time, 2.0);
  EXPECT_TRUE(q.empty());
}

TEST(RunScenario, ExactGeometryRoundTrip)
{
  const auto result = run_scenario(small_cell({3, 4, 0}));
  ASSERT_EQ(result.measurements.size(), 3u);
  // arrival order follows distance: tower 0 (5), tower 2 (sqrt 45), tower 1 (sqrt 65)
  EXPECT_EQ(result.measurements[0].tower.id, 0);
  EXPECT_EQ(result.measurements[1].tower.id, 2);
  EXPECT_EQ(result.measurements[2].tower.id, 1);
  EXPECT_NEAR(result.measurements[0].range, 5.0, 1e-9);
  EXPECT_NEAR(result.measurements[1].range, std::sqrt(45.0), 1e-9);
  EXPECT_NEAR(result.measurements[2].range, std::sqrt(65.0), 1e-9);
  EXPECT_LT(distance(result.fix.position, {3, 4, 0}), 1e-9);
  EXPECT_EQ(result.events.events.size(), 6u);
}

TEST(RunScenario, MobileOnTowerGivesZeroRangeFirst)
{
  const auto result = run_scenario(small_cell({10, 0, 0}));
  EXPECT_EQ(result.measurements.front().tower.id, 1);
  EXPECT_EQ(result.measurements.front().range, 0.0);
  EXPECT_LT(distance(result.fix.position, {10, 0, 0}), 1e-9);
}

TEST(RunScenario, MicrosecondClockCollapsesShortRanges)
{
  auto cfg = small_cell({3, 4, 0});
  cfg.timing.clock_resolution = 1e-6;
  const auto result = run_scenario(cfg);
  for (const auto &m : result.measurements)
  {
    EXPECT_EQ(m.turnaround, 0.0);
    EXPECT_EQ(m.range, 0.0);
  }
  EXPECT_EQ(result.fix.clamp, plane_clamp::inconsistent);
  EXPECT_GT(result.fix.max_residual(), 1.0);
}

TEST(RunScenario, ProcessingDelayCancelsWhenCalibrated)
{
  auto cfg = hex_cell({250, -40, 30});
  cfg.tower_processing_delay = 7.58e-4;
  cfg.timing.alpha = 7.58e-4;
  const auto result = run_scenario(cfg);
  EXPECT_LT(distance(result.fix.position, cfg.mobile), 1e-6);

  cfg.timing.alpha = 0.0; // mobile ignores the tower delay: ranges blow up
  EXPECT_GT(distance(run_scenario(cfg).fix.position, cfg.mobile), 1e3);
}

TEST(RunScenario, AckEchoesRequestTimestamp)
{
  auto cfg = hex_cell({100, 200, 0});
  cfg.start_time = 12.5;
  cfg.timing.clock_resolution = 1e-7;
  const auto result = run_scenario(cfg);
  std::vector<double> sent;
  for (const auto &e : result.events.events)
    if (e.kind == event_kind::request_arrives)
      sent.push_back(std::get<request_packet>(e.payload).timestamp);
  ASSERT_FALSE(sent.empty());
  for (const auto &e : result.events.events)
    if (e.kind == event_kind::ack_arrives)
      EXPECT_EQ(std::get<ack_packet>(e.payload).timestamp, sent.front());
}

TEST(RunScenario, TraceIsSortedAndDeterministic)
{
  auto cfg = hex_cell({-700, 1200, 15});
  cfg.timing.clock_resolution = 1e-8;
  const auto a = run_scenario(cfg);
  const auto b = run_scenario(cfg);
  EXPECT_EQ(format_trace(a.events), format_trace(b.events));
  EXPECT_TRUE(std::is_sorted(a.events.events.begin(), a.events.events.end(),
                             [](const event &x, const event &y) { return x.time < y.time; }));
}

TEST(RunScenario, RejectsTooFewTowers)
{
  auto cfg = small_cell({1, 1, 0});
  cfg.towers.pop_back();
  EXPECT_THROW(run_scenario(cfg), invalid_argument_error);
}

TEST(RunScenario, PacketLossCanStarveTheSolver)
{
  auto cfg = hex_cell({0, 0, 0});
  cfg.packet_loss = 0.999;
  EXPECT_THROW(run_scenario(cfg), insufficient_measurements_error);
}

TEST(RunScenario, PacketLossIsSeeded)
{
  auto cfg = hex_cell({400, 300, 0});
  cfg.packet_loss = 0.3;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
  {
    cfg.seed = seed;
    std::string first, second;
    try
    {
      first = format_trace(run_scenario(cfg).events);
    }
    catch (const insufficient_measurements_error &)
    {
      first = "starved";
    }
    try
    {
      second = format_trace(run_scenario(cfg).events);
    }
    catch (const insufficient_measurements_error &)
    {
      second = "starved";
    }
    EXPECT_EQ(first, second);
  }
}

TEST(RunScenario, RandomScenariosRecoverTruth)
{
  testing::generator g(500);
  int checked = 0;
  while (checked < 500)
  {
    scenario_config cfg;
    const double plane = g.uniform(-50, 50);
    const int n = 3 + static_cast<int>(g.uniform(0, 5));
    for (int i = 0; i < n; ++i)
      cfg.towers.push_back({i, {g.uniform(-3000, 3000), g.uniform(-3000, 3000), plane}});
    cfg.mobile = {g.uniform(-2000, 2000), g.uniform(-2000, 2000), plane + g.uniform(50, 500)};
    cfg.timing = {0.0, 3e8, ranging_mode::round_trip, 0.0};

    // Skip geometry the nearest three towers cannot resolve well.
    auto sorted = cfg.towers;
    std::sort(sorted.begin(), sorted.end(), [&](const auto &a, const auto &b) {
      return distance(a.position, cfg.mobile) < distance(b.position, cfg.mobile);
    });
    const point3 b = sorted[1].position - sorted[0].position, c = sorted[2].position - sorted[0].position;
    const double longest = std::max({squared_norm(b), squared_norm(c), squared_norm(c - b)});
    if (0.5 * norm(cross(b, c)) < 0.02 * longest)
      continue;

    const auto result = run_scenario(cfg);
    const double scale = distance(cfg.mobile, sorted[2].position);
    ASSERT_LT(testing::relative_error(result.fix.position, cfg.mobile, scale), 1e-9) << "scenario " << checked;
    ++checked;
  }
}

TEST(FirstKAcks, NearestTowersFirst)
{
  const point3 mobile{830, -450, 0};
  auto cfg = hex_cell(mobile);
  const auto result = run_scenario(cfg);
  auto by_distance = cfg.towers;
  std::sort(by_distance.begin(), by_distance.end(), [&](const auto &a, const auto &b) {
    return distance(a.position, mobile) < distance(b.position, mobile);
  });

  const auto three = first_k_acks(result.events, 3, cfg.timing);
  ASSERT_EQ(three.size(), 3u);
  for (int i = 0; i < 3; ++i)
    EXPECT_EQ(three[i].tower.id, by_distance[i].id);

  const auto six = first_k_acks(result.events, 6, cfg.timing);
  ASSERT_EQ(six.size(), 6u);
  for (int i = 0; i < 6; ++i)
  {
    EXPECT_EQ(six[i].tower.id, by_distance[i].id);
    EXPECT_NEAR(six[i].range, distance(mobile, by_distance[i].position), 1e-6);
  }
  EXPECT_THROW(first_k_acks(result.events, 7, cfg.timing), insufficient_measurements_error);
  EXPECT_THROW(first_k_acks(result.events, 2, cfg.timing), invalid_argument_error);
}

TEST(FirstKAcks, EquidistantTowersBreakTiesById)
{
  scenario_config cfg;
  cfg.towers = {{3, {10, 0, 0}}, {2, {0, 10, 0}}, {1, {-10, 0, 0}}, {0, {0, -10, 0}}};
  cfg.mobile = {0, 0, 0};
  cfg.timing = {0.0, 3e8, ranging_mode::round_trip, 0.0};
  const auto result = run_scenario(cfg);
  const auto acks = first_k_acks(result.events, 4, cfg.timing);
  for (int i = 0; i < 4; ++i)
    EXPECT_EQ(acks[i].tower.id, i);
}

TEST(FormatMeasurements, TableShapedCsv)
{
  const auto cfg = hex_cell({830, -450, 0});
  const auto result = run_scenario(cfg);
  const std::string csv = format_measurements(result.measurements, cfg.mobile);
  EXPECT_TRUE(csv.starts_with("tower_id,turnaround_s,distance_m,actual_m,pct_error\n"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_EQ(csv.find("-0.0000"), std::string::npos);
}

TEST(RunTrials, ThreadCountDoesNotChangeResults)
{
  auto cfg = hex_cell({0, 0, 0});
  cfg.timing.clock_resolution = 1e-8;
  cfg.trials = 64;
  cfg.seed = 99;
  const mobile_sampler sampler{{0, 0, 0}, 2500.0, 0.0, 0.0};
  const auto serial = run_trials(cfg, sampler, 1);
  const auto parallel = run_trials(cfg, sampler, 4);
  ASSERT_EQ(serial.size(), parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i)
  {
    EXPECT_EQ(serial[i].truth, parallel[i].truth);
    EXPECT_EQ(serial[i].position_error, parallel[i].position_error);
  }
}

TEST(SampleMobile, StaysInsideDisk)
{
  const mobile_sampler sampler{{100, 200, 5}, 1000.0, 0.0, 50.0};
  for (std::uint64_t i = 0; i < 1000; ++i)
  {
    const point3 p = sample_mobile(sampler, trial_seed(3, i));
    EXPECT_LE(std::hypot(p.x - 100, p.y - 200), 1000.0);
    EXPECT_GE(p.z, 5.0);
    EXPECT_LE(p.z, 55.0);
  }
  EXPECT_NE(trial_seed(3, 0), trial_seed(3, 1));
  EXPECT_EQ(trial_seed(3, 7), trial_seed(3, 7));
}

TEST(RunTrials, ErrorGrowsWithCoarserClock)
{
  auto cfg = hex_cell({0, 0, 0});
  cfg.trials = 100;
  cfg.seed = 5;
  const mobile_sampler sampler{{0, 0, 0}, 2500.0, 0.0, 0.0};
  double previous = -1.0;
  for (double res : {0.0, 1e-9, 1e-8, 1e-7})
  {
    cfg.timing.clock_resolution = res;
    const double mean = mean_position_error(run_trials(cfg, sampler, 2));
    EXPECT_GE(mean, previous) << "resolution " << res;
    previous = mean;
  }
}

} // namespace gsmloc
