#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsmloc
{

enum class ping_direction
{
  request,
  reply,
};

// One sniffer line: seq time src dst protocol info...
struct ping_record
{
  std::int64_t seq = 0;
  std::int64_t time_us = 0; // timestamps are kept in whole microseconds
  std::string src;
  std::string dst;
  std::string protocol;
  std::string info; // remaining columns joined by single spaces
  ping_direction direction = ping_direction::request;

  [[nodiscard]] double time_seconds() const { return static_cast<double>(time_us) / 1e6; }
  friend bool operator==(const ping_record &, const ping_record &) = default;
};

struct parse_warning
{
  std::size_t line = 0; // 1-based
  std::string text;
  std::string reason;
};

struct ping_log
{
  std::vector<ping_record> records;
  std::vector<parse_warning> warnings;
};

// Malformed lines become warnings; blank lines are skipped.
ping_log parse_ping_log(std::string_view text);

// Tab-separated rendering that parse_ping_log reads back unchanged.
std::string serialize_ping_log(std::span<const ping_record> records);

// Decimal seconds with at most 6 fractional digits -> microseconds.
std::optional<std::int64_t> parse_microseconds(std::string_view text);

enum class rtt_anomaly
{
  negative,
  missing_reply,
};

std::string_view to_string(rtt_anomaly a);

struct rtt_sample
{
  std::int64_t request_seq = 0;
  std::optional<std::int64_t> reply_seq;
  std::int64_t rtt_us = 0;
  bool valid = false;
  std::optional<rtt_anomaly> anomaly;

  [[nodiscard]] double rtt_seconds() const { return static_cast<double>(rtt_us) / 1e6; }
};

// Each request takes the first later, unclaimed reply travelling the
// reversed address pair.
std::vector<rtt_sample> pair_rtts(std::span<const ping_record> records);

struct propagation_delay
{
  std::int64_t request_seq = 0;
  double seconds = 0.0;
  bool negative = false; // baseline larger than the round trip
};

// time_prop = rtt - kernel_delay for every valid sample.
// Throws invalid_argument_error for a negative kernel_delay.
std::vector<propagation_delay> subtract_baseline(std::span<const rtt_sample> samples, double kernel_delay);

struct rtt_summary
{
  std::size_t count = 0;
  double min = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

// Statistics in seconds over valid samples. Throws empty_data_error.
rtt_summary rtt_stats(std::span<const rtt_sample> samples);

// RTT CSV: request_seq,reply_seq,rtt_us,valid,anomaly
std::string format_rtt_csv(std::span<const rtt_sample> samples);

// count/min/median/mean/max in milliseconds with three decimals.
std::string format_summary(const rtt_summary &summary);

// Published interval table, one value in milliseconds per line.
// Throws invalid_argument_error on a non-numeric line.
std::vector<double> parse_reference_table(std::string_view text);

enum class row_status
{
  match,        // equal at 1 us resolution
  within_1us,   // off by exactly one microsecond
  mismatch,
  anomaly,      // negative interval or missing reply
  unreferenced, // no published value to compare with
};

std::string_view to_string(row_status s);

struct discrepancy_row
{
  std::size_t row = 0; // 1-based position among request pairs
  rtt_sample sample;
  std::optional<double> published_ms;
  row_status status = row_status::unreferenced;
};

std::vector<discrepancy_row> compare_with_reference(std::span<const rtt_sample> samples,
                                                    std::span<const double> published_ms);

std::size_t count_status(std::span<const discrepancy_row> rows, row_status status);

// TSV: row, request_seq, reply_seq, computed_ms, published_ms, status, note
std::string format_discrepancy_report(std::span<const discrepancy_row> rows);

} // namespace gsmloc
