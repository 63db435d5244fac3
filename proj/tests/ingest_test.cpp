#include "gsmloc/error.hpp"
#include "gsmloc/ingest.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

namespace gsmloc
{

namespace
{

std::vector<rtt_sample> samples_for(const char *file)
{
  return pair_rtts(parse_ping_log(testing::slurp(testing::data_dir() / file)).records);
}

std::vector<double> published(const char *file)
{
  return parse_reference_table(testing::slurp(testing::data_dir() / file));
}

std::int64_t us(const rtt_sample &s) { return s.rtt_us; }

} // namespace

TEST(ParsePingLog, RequestLine)
{
  const auto log = parse_ping_log("49 23.000103 169.254.118.52 169.254.65.4 ICMP Echo (ping) request");
  ASSERT_EQ(log.records.size(), 1u);
  const auto &r = log.records[0];
  EXPECT_EQ(r.seq, 49);
  EXPECT_EQ(r.time_us, 23'000'103);
  EXPECT_DOUBLE_EQ(r.time_seconds(), 23.000103);
  EXPECT_EQ(r.src, "169.254.118.52");
  EXPECT_EQ(r.dst, "169.254.65.4");
  EXPECT_EQ(r.protocol, "ICMP");
  EXPECT_EQ(r.info, "Echo (ping) request");
  EXPECT_EQ(r.direction, ping_direction::request);
  EXPECT_TRUE(log.warnings.empty());
}

TEST(ParsePingLog, ReplyLine)
{
  const auto log = parse_ping_log("50\t23.000793\t169.254.65.4\t169.254.118.52\tICMP\tEcho (ping) reply\r\n");
  ASSERT_EQ(log.records.size(), 1u);
  EXPECT_EQ(log.records[0].direction, ping_direction::reply);
}

TEST(ParsePingLog, EmptyInput)
{
  const auto log = parse_ping_log("");
  EXPECT_TRUE(log.records.empty());
  EXPECT_TRUE(log.warnings.empty());
}

TEST(ParsePingLog, MalformedLinesBecomeWarnings)
{
  const auto log = parse_ping_log("garbage\n"
                                  "x 1.0 1.2.3.4 5.6.7.8 ICMP Echo (ping) request\n"
                                  "1 1.0000001 1.2.3.4 5.6.7.8 ICMP Echo (ping) request\n"
                                  "2 1.0 1.2.3 5.6.7.8 ICMP Echo (ping) request\n"
                                  "3 1.0 1.2.3.4 5.6.7.8 ICMP Destination unreachable\n"
                                  "\n"
                                  "4 1.5 1.2.3.4 5.6.7.8 ICMP Echo (ping) request\n");
  ASSERT_EQ(log.records.size(), 1u);
  EXPECT_EQ(log.records[0].seq, 4);
  ASSERT_EQ(log.warnings.size(), 5u);
  EXPECT_EQ(log.warnings[0].line, 1u);
  EXPECT_EQ(log.warnings[4].line, 5u);
}

TEST(ParseMicroseconds, Forms)
{
  EXPECT_EQ(parse_microseconds("23.000103"), 23'000'103);
  EXPECT_EQ(parse_microseconds("7"), 7'000'000);
  EXPECT_EQ(parse_microseconds("0.5"), 500'000);
  EXPECT_FALSE(parse_microseconds("1.0000001"));
  EXPECT_FALSE(parse_microseconds("-1.0"));
  EXPECT_FALSE(parse_microseconds("1."));
  EXPECT_FALSE(parse_microseconds(".5"));
}

TEST(SerializePingLog, ParseSerializeParseIsFixedPoint)
{
  testing::generator g(17);
  for (int trial = 0; trial < 200; ++trial)
  {
    std::string text;
    const int lines = 1 + static_cast<int>(g.uniform(0, 30));
    for (int i = 0; i < lines; ++i)
    {
      const auto a = std::to_string(static_cast<int>(g.uniform(0, 255)));
      const auto b = std::to_string(static_cast<int>(g.uniform(0, 255)));
      const auto secs = std::to_string(static_cast<int>(g.uniform(0, 1e5)));
      auto frac = std::to_string(static_cast<int>(g.uniform(0, 999999)));
      frac = frac.substr(0, 1 + static_cast<std::size_t>(g.uniform(0, 5.99)));
      text += std::to_string(i) + (g.uniform(0, 1) < 0.5 ? " " : "\t  ") + secs + '.' + frac + " 10.0." + a + ".1 10.0." +
              b + ".2 ICMP Echo   (ping) " + (g.uniform(0, 1) < 0.5 ? "request" : "reply") + '\n';
    }
    const auto first = parse_ping_log(text);
    ASSERT_TRUE(first.warnings.empty());
    const auto second = parse_ping_log(serialize_ping_log(first.records));
    ASSERT_EQ(first.records, second.records);
    ASSERT_EQ(serialize_ping_log(first.records), serialize_ping_log(second.records));
  }
}

TEST(PairRtts, FigureFiveExamples)
{
  const auto samples = samples_for("fig5_tower1.txt");
  ASSERT_EQ(samples.size(), 7u);
  EXPECT_EQ(samples[0].request_seq, 45);
  EXPECT_EQ(samples[0].reply_seq, 46);
  EXPECT_FALSE(samples[0].valid);
  EXPECT_EQ(samples[0].anomaly, rtt_anomaly::negative);
  EXPECT_EQ(samples[0].rtt_us, -17);

  EXPECT_EQ(samples[2].request_seq, 49);
  EXPECT_EQ(samples[2].reply_seq, 50);
  EXPECT_TRUE(samples[2].valid);
  EXPECT_EQ(samples[2].rtt_us, 690);
  EXPECT_DOUBLE_EQ(samples[2].rtt_seconds(), 0.000690);
}

TEST(PairRtts, FigureSevenFirstPair)
{
  const auto samples = samples_for("fig7_tower3.txt");
  EXPECT_EQ(samples[0].request_seq, 21);
  EXPECT_EQ(samples[0].reply_seq, 22);
  EXPECT_EQ(samples[0].rtt_us, 774);
}

TEST(PairRtts, MissingReplyAndAddressMatching)
{
  const auto log = parse_ping_log("1 1.000000 10.0.0.1 10.0.0.2 ICMP Echo (ping) request\n"
                                  "2 1.000100 10.0.0.3 10.0.0.1 ICMP Echo (ping) reply\n"  // wrong peer
                                  "3 1.000200 10.0.0.1 10.0.0.3 ICMP Echo (ping) request\n"
                                  "4 1.000300 10.0.0.2 10.0.0.1 ICMP Echo (ping) reply\n"
                                  "5 2.000000 10.0.0.1 10.0.0.2 ICMP Echo (ping) request\n");
  const auto samples = pair_rtts(log.records);
  ASSERT_EQ(samples.size(), 3u);
  EXPECT_EQ(samples[0].reply_seq, 4);
  EXPECT_EQ(samples[0].rtt_us, 300);
  EXPECT_FALSE(samples[1].reply_seq); // the early reply from .3 preceded this request
  EXPECT_EQ(samples[1].anomaly, rtt_anomaly::missing_reply);
  EXPECT_FALSE(samples[2].valid);
  EXPECT_EQ(samples[2].anomaly, rtt_anomaly::missing_reply);
}

TEST(PairRtts, EachLineUsedAtMostOnce)
{
  for (const char *file : {"fig5_tower1.txt", "fig6_tower2.txt", "fig7_tower3.txt"})
  {
    const auto log = parse_ping_log(testing::slurp(testing::data_dir() / file));
    const auto samples = pair_rtts(log.records);
    std::set<std::int64_t> used;
    for (const auto &s : samples)
    {
      EXPECT_TRUE(used.insert(s.request_seq).second);
      if (s.reply_seq)
        EXPECT_TRUE(used.insert(*s.reply_seq).second);
      if (s.valid)
        EXPECT_GE(s.rtt_us, 0);
    }
  }
}

TEST(SubtractBaseline, Examples)
{
  rtt_sample a;
  a.request_seq = 1;
  a.rtt_us = 690;
  a.valid = true;
  rtt_sample b = a;
  b.request_seq = 2;
  b.rtt_us = 567;
  rtt_sample bad = a;
  bad.request_seq = 3;
  bad.valid = false;
  const std::vector<rtt_sample> samples{a, b, bad};

  const auto r600 = subtract_baseline(samples, 0.000600);
  ASSERT_EQ(r600.size(), 2u);
  EXPECT_NEAR(r600[0].seconds, 0.000090, 1e-15);
  EXPECT_FALSE(r600[0].negative);
  EXPECT_TRUE(r600[1].negative);

  const auto r690 = subtract_baseline(samples, 0.000690);
  EXPECT_EQ(r690[0].seconds, 0.0);
  EXPECT_FALSE(r690[0].negative);

  EXPECT_THROW(subtract_baseline(samples, -1e-6), invalid_argument_error);
}

TEST(RttStats, TableFourExtremes)
{
  const auto stats = rtt_stats(samples_for("fig7_tower3.txt"));
  EXPECT_EQ(stats.count, 7u);
  EXPECT_NEAR(stats.min, 0.655e-3, 1e-12);
  EXPECT_NEAR(stats.max, 0.778e-3, 1e-12);
}

TEST(RttStats, TableThreeOutlier)
{
  const auto stats = rtt_stats(samples_for("fig6_tower2.txt"));
  EXPECT_NEAR(stats.max, 3.608e-3, 1e-12);
  EXPECT_NEAR(stats.median, 0.667e-3, 1e-12);
}

TEST(RttStats, SingleSampleAndEmpty)
{
  rtt_sample s;
  s.rtt_us = 123;
  s.valid = true;
  const auto stats = rtt_stats(std::vector{s});
  EXPECT_EQ(stats.min, stats.median);
  EXPECT_EQ(stats.mean, stats.max);
  EXPECT_EQ(stats.min, 123e-6);

  s.valid = false;
  EXPECT_THROW(rtt_stats(std::vector{s}), empty_data_error);
  EXPECT_THROW(rtt_stats(std::vector<rtt_sample>{}), empty_data_error);
}

TEST(RttStats, EvenCountMedianAverages)
{
  std::vector<rtt_sample> v;
  for (std::int64_t x : {10, 40, 20, 30})
  {
    rtt_sample s;
    s.rtt_us = x;
    s.valid = true;
    v.push_back(s);
  }
  EXPECT_DOUBLE_EQ(rtt_stats(v).median, 25e-6);
}

TEST(CompareWithReference, PublishedTablesAgreement)
{
  const auto t3 = compare_with_reference(samples_for("fig6_tower2.txt"), published("table3_published_ms.txt"));
  EXPECT_GE(count_status(t3, row_status::match), 6u);

  const auto t4 = compare_with_reference(samples_for("fig7_tower3.txt"), published("table4_published_ms.txt"));
  EXPECT_GE(count_status(t4, row_status::match) + count_status(t4, row_status::within_1us), 6u);

  const auto t2 = compare_with_reference(samples_for("fig5_tower1.txt"), published("table2_published_ms.txt"));
  EXPECT_GE(count_status(t2, row_status::match), 3u);
  EXPECT_EQ(t2[0].status, row_status::anomaly);
}

TEST(DiscrepancyReport, MatchesGoldenFiles)
{
  const std::array<std::array<const char *, 3>, 3> cases{{
      {"fig5_tower1.txt", "table2_published_ms.txt", "fig5_discrepancies.tsv"},
      {"fig6_tower2.txt", "table3_published_ms.txt", "fig6_discrepancies.tsv"},
      {"fig7_tower3.txt", "table4_published_ms.txt", "fig7_discrepancies.tsv"},
  }};
  for (const auto &[fig, table, golden] : cases)
  {
    const auto rows = compare_with_reference(samples_for(fig), published(table));
    EXPECT_EQ(format_discrepancy_report(rows), testing::slurp(testing::golden_dir() / golden)) << golden;
  }
}

TEST(FormatRttCsv, Columns)
{
  const auto csv = format_rtt_csv(samples_for("fig5_tower1.txt"));
  EXPECT_TRUE(csv.starts_with("request_seq,reply_seq,rtt_us,valid,anomaly\n45,46,-17,false,negative\n"));
}

TEST(ReferenceTable, RejectsNonNumeric)
{
  EXPECT_EQ(parse_reference_table("# header\n1.\t0.5\n\n2. 0.25\n"), (std::vector<double>{0.5, 0.25}));
  EXPECT_THROW(parse_reference_table("1. abc\n"), invalid_argument_error);
}

} // namespace gsmloc
