#include "gsmloc/ingest.hpp"

#include "gsmloc/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <numeric>

namespace gsmloc
{

namespace
{

std::vector<std::string_view> split_ws(std::string_view line)
{
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size())
  {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r'))
      ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
      ++i;
    if (i > start)
      out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T &value)
{
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

bool is_dotted_quad(std::string_view text)
{
  int parts = 0;
  std::size_t start = 0;
  while (true)
  {
    const std::size_t dot = text.find('.', start);
    const std::string_view part = text.substr(start, dot == std::string_view::npos ? dot : dot - start);
    int octet = 0;
    if (part.empty() || part.size() > 3 || !parse_number(part, octet) || octet > 255)
      return false;
    ++parts;
    if (dot == std::string_view::npos)
      break;
    start = dot + 1;
  }
  return parts == 4;
}

std::string format_ms(std::int64_t us)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(us) / 1000.0);
  return buf;
}

} // namespace

std::optional<std::int64_t> parse_microseconds(std::string_view text)
{
  const std::size_t dot = text.find('.');
  const std::string_view whole = text.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() || frac.size() > 6 || (dot != std::string_view::npos && frac.empty()))
    return std::nullopt;
  const auto all_digits = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
  };
  if (!all_digits(whole) || !all_digits(frac))
    return std::nullopt;

  std::int64_t seconds = 0;
  if (!parse_number(whole, seconds) || seconds > INT64_MAX / 1'000'000 - 1)
    return std::nullopt;
  std::int64_t micros = 0;
  if (!frac.empty())
  {
    parse_number(frac, micros);
    for (std::size_t i = frac.size(); i < 6; ++i)
      micros *= 10;
  }
  return seconds * 1'000'000 + micros;
}

ping_log parse_ping_log(std::string_view text)
{
  ping_log log;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size())
  {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    const auto fields = split_ws(line);
    if (fields.empty())
      continue;
    auto warn = [&](std::string reason) {
      std::string_view shown = line;
      if (!shown.empty() && shown.back() == '\r')
        shown.remove_suffix(1);
      log.warnings.push_back({line_no, std::string(shown), std::move(reason)});
    };

    if (fields.size() < 6)
    {
      warn("expected at least 6 fields");
      continue;
    }
    ping_record rec;
    if (!parse_number(fields[0], rec.seq))
    {
      warn("bad sequence number");
      continue;
    }
    const auto us = parse_microseconds(fields[1]);
    if (!us)
    {
      warn("bad timestamp");
      continue;
    }
    rec.time_us = *us;
    if (!is_dotted_quad(fields[2]) || !is_dotted_quad(fields[3]))
    {
      warn("bad address");
      continue;
    }
    rec.src = fields[2];
    rec.dst = fields[3];
    rec.protocol = fields[4];
    const std::string_view last = fields.back();
    if (last == "request")
      rec.direction = ping_direction::request;
    else if (last == "reply")
      rec.direction = ping_direction::reply;
    else
    {
      warn("line does not end in request or reply");
      continue;
    }
    for (std::size_t i = 5; i < fields.size(); ++i)
    {
      if (i > 5)
        rec.info += ' ';
      rec.info += fields[i];
    }
    log.records.push_back(std::move(rec));
  }
  return log;
}

std::string serialize_ping_log(std::span<const ping_record> records)
{
  std::string out;
  char buf[64];
  for (const auto &r : records)
  {
    std::snprintf(buf, sizeof buf, "%lld\t%lld.%06lld\t", static_cast<long long>(r.seq),
                  static_cast<long long>(r.time_us / 1'000'000), static_cast<long long>(r.time_us % 1'000'000));
    out += buf;
    out += r.src + '\t' + r.dst + '\t' + r.protocol + '\t' + r.info + '\n';
  }
  return out;
}

std::string_view to_string(rtt_anomaly a) { return a == rtt_anomaly::negative ? "negative" : "missing_reply"; }

std::vector<rtt_sample> pair_rtts(std::span<const ping_record> records)
{
  // Pending requests per (src, dst), oldest first. A reply on the reversed
  // pair closes the oldest one, which is the same as every request taking
  // the first later unclaimed reply.
  std::map<std::pair<std::string_view, std::string_view>, std::deque<std::size_t>> pending;
  std::vector<rtt_sample> samples;
  for (const auto &r : records)
  {
    if (r.direction == ping_direction::request)
    {
      rtt_sample s;
      s.request_seq = r.seq;
      s.rtt_us = r.time_us; // holds the send time until the reply shows up
      s.anomaly = rtt_anomaly::missing_reply;
      pending[{r.src, r.dst}].push_back(samples.size());
      samples.push_back(s);
      continue;
    }
    auto it = pending.find({r.dst, r.src});
    if (it == pending.end() || it->second.empty())
      continue;
    rtt_sample &s = samples[it->second.front()];
    it->second.pop_front();
    s.reply_seq = r.seq;
    s.rtt_us = r.time_us - s.rtt_us;
    s.valid = s.rtt_us >= 0;
    s.anomaly = s.valid ? std::nullopt : std::optional{rtt_anomaly::negative};
  }
  for (auto &s : samples)
    if (!s.reply_seq)
      s.rtt_us = 0;
  return samples;
}

std::vector<propagation_delay> subtract_baseline(std::span<const rtt_sample> samples, double kernel_delay)
{
  if (!(kernel_delay >= 0.0))
    throw invalid_argument_error("kernel delay must be non-negative");
  std::vector<propagation_delay> out;
  for (const auto &s : samples)
  {
    if (!s.valid)
      continue;
    const double prop = s.rtt_seconds() - kernel_delay;
    out.push_back({s.request_seq, prop, prop < 0.0});
  }
  return out;
}

rtt_summary rtt_stats(std::span<const rtt_sample> samples)
{
  std::vector<std::int64_t> us;
  for (const auto &s : samples)
    if (s.valid)
      us.push_back(s.rtt_us);
  if (us.empty())
    throw empty_data_error("no valid RTT samples");
  std::sort(us.begin(), us.end());

  rtt_summary out;
  out.count = us.size();
  out.min = static_cast<double>(us.front()) / 1e6;
  out.max = static_cast<double>(us.back()) / 1e6;
  const std::size_t mid = us.size() / 2;
  const double median_us =
      us.size() % 2 == 1 ? static_cast<double>(us[mid]) : (static_cast<double>(us[mid - 1]) + us[mid]) / 2.0;
  out.median = median_us / 1e6;
  const auto total = std::accumulate(us.begin(), us.end(), std::int64_t{0});
  out.mean = static_cast<double>(total) / static_cast<double>(us.size()) / 1e6;
  return out;
}

std::string format_rtt_csv(std::span<const rtt_sample> samples)
{
  std::string out = "request_seq,reply_seq,rtt_us,valid,anomaly\n";
  for (const auto &s : samples)
  {
    out += std::to_string(s.request_seq) + ',';
    out += s.reply_seq ? std::to_string(*s.reply_seq) : std::string{};
    out += ',';
    out += s.reply_seq ? std::to_string(s.rtt_us) : std::string{};
    out += s.valid ? ",true," : ",false,";
    out += s.anomaly ? std::string(to_string(*s.anomaly)) : std::string{};
    out += '\n';
  }
  return out;
}

std::string format_summary(const rtt_summary &summary)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, "count\t%zu\nmin_ms\t%.3f\nmedian_ms\t%.3f\nmean_ms\t%.3f\nmax_ms\t%.3f\n",
                summary.count, summary.min * 1e3, summary.median * 1e3, summary.mean * 1e3, summary.max * 1e3);
  return buf;
}

std::vector<double> parse_reference_table(std::string_view text)
{
  std::vector<double> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size())
  {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos)
      end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty() || fields.front().starts_with('#'))
      continue;
    double value = 0.0;
    if (!parse_number(fields.back(), value))
      throw invalid_argument_error("reference table line " + std::to_string(line_no) + " has no numeric value");
    out.push_back(value);
  }
  return out;
}

std::string_view to_string(row_status s)
{
  switch (s)
  {
  case row_status::match:
    return "match";
  case row_status::within_1us:
    return "within_1us";
  case row_status::mismatch:
    return "mismatch";
  case row_status::anomaly:
    return "anomaly";
  case row_status::unreferenced:
    break;
  }
  return "unreferenced";
}

std::vector<discrepancy_row> compare_with_reference(std::span<const rtt_sample> samples,
                                                    std::span<const double> published_ms)
{
  std::vector<discrepancy_row> rows;
  rows.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
  {
    discrepancy_row row;
    row.row = i + 1;
    row.sample = samples[i];
    if (i < published_ms.size())
      row.published_ms = published_ms[i];

    if (!row.sample.valid)
      row.status = row_status::anomaly;
    else if (!row.published_ms)
      row.status = row_status::unreferenced;
    else
    {
      const auto published_us = static_cast<std::int64_t>(std::llround(*row.published_ms * 1000.0));
      const auto diff = std::abs(row.sample.rtt_us - published_us);
      row.status = diff == 0 ? row_status::match : diff == 1 ? row_status::within_1us : row_status::mismatch;
    }
    rows.push_back(row);
  }
  return rows;
}

std::size_t count_status(std::span<const discrepancy_row> rows, row_status status)
{
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(), [status](const auto &r) { return r.status == status; }));
}

std::string format_discrepancy_report(std::span<const discrepancy_row> rows)
{
  std::string out = "row\trequest_seq\treply_seq\tcomputed_ms\tpublished_ms\tstatus\tnote\n";
  char buf[32];
  for (const auto &r : rows)
  {
    const auto &s = r.sample;
    out += std::to_string(r.row) + '\t' + std::to_string(s.request_seq) + '\t';
    out += s.reply_seq ? std::to_string(*s.reply_seq) : "-";
    out += '\t';
    out += s.reply_seq ? format_ms(s.rtt_us) : "-";
    out += '\t';
    if (r.published_ms)
    {
      std::snprintf(buf, sizeof buf, "%.3f", *r.published_ms);
      out += buf;
    }
    else
      out += '-';
    out += '\t';
    out += to_string(r.status);
    out += '\t';
    if (s.anomaly)
      out += to_string(*s.anomaly);
    else if (r.status == row_status::mismatch || r.status == row_status::within_1us)
    {
      const auto published_us = static_cast<std::int64_t>(std::llround(*r.published_ms * 1000.0));
      out += "delta_us=" + std::to_string(s.rtt_us - published_us);
    }
    else
      out += '-';
    out += '\n';
  }
  return out;
}

} // namespace gsmloc
