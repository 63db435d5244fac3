#include "gsmloc/app.hpp"

#include "gsmloc/error.hpp"
#include "gsmloc/ingest.hpp"

#include <json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace gsmloc::app
{

namespace fs = std::filesystem;

namespace
{

std::string read_file(const fs::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw invalid_argument_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt17(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string shortest(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string fixed(double v, int decimals)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Every key a section may contain; anything else is a typo worth failing on.
void check_keys(const YAML::Node &node, std::string_view where, std::initializer_list<std::string_view> allowed)
{
  if (!node.IsMap())
    throw invalid_argument_error(std::string(where) + " must be a mapping");
  for (const auto &kv : node)
  {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw invalid_argument_error("unknown key '" + key + "' in " + std::string(where));
  }
}

point3 as_point(const YAML::Node &node, std::string_view what)
{
  if (!node.IsSequence() || node.size() != 3)
    throw invalid_argument_error(std::string(what) + " must be a list of three numbers");
  return {node[0].as<double>(), node[1].as<double>(), node[2].as<double>()};
}

template <typename T>
T get_or(const YAML::Node &parent, const char *key, T fallback)
{
  const auto node = parent[key];
  return node ? node.as<T>() : fallback;
}

int report_error(std::ostream &err, std::string_view command, const std::exception &e, int code)
{
  err << "gsmloc " << command << ": " << e.what() << '\n';
  return code;
}

// Shared mapping from library errors to exit codes.
template <typename F>
int guarded(std::string_view command, std::ostream &err, F &&body)
{
  try
  {
    return body();
  }
  catch (const degenerate_geometry_error &e)
  {
    return report_error(err, command, e, exit_degenerate);
  }
  catch (const insufficient_measurements_error &e)
  {
    return report_error(err, command, e, exit_no_data);
  }
  catch (const empty_data_error &e)
  {
    return report_error(err, command, e, exit_no_data);
  }
  catch (const error &e)
  {
    return report_error(err, command, e, exit_invalid_input);
  }
  catch (const YAML::Exception &e)
  {
    return report_error(err, command, e, exit_invalid_input);
  }
  catch (const fs::filesystem_error &e)
  {
    return report_error(err, command, e, exit_io_failure);
  }
}

std::string fix_report(const location_fix &fix, std::span<const tower_site> towers)
{
  std::string out = "position " + fixed(fix.position.x, 6) + ' ' + fixed(fix.position.y, 6) + ' ' +
                    fixed(fix.position.z, 6) + '\n';
  out += "residuals";
  for (double r : fix.residuals)
    out += ' ' + fixed(r, 6);
  out += "\nmethod ";
  out += to_string(fix.method);
  out += "\nz_branch ";
  out += to_string(fix.branch);
  out += "\nclamp ";
  out += to_string(fix.clamp);
  out += "\ntowers";
  for (const auto &t : towers)
    out += ' ' + std::to_string(t.id);
  out += '\n';
  return out;
}

run_manifest make_manifest(std::string command, std::string digest, std::uint64_t seed)
{
  run_manifest m;
  m.command = std::move(command);
  m.config_digest = std::move(digest);
  m.seed = seed;
  return m;
}

} // namespace

loaded_config parse_config(std::string_view text)
{
  YAML::Node root;
  try
  {
    root = YAML::Load(std::string(text));
  }
  catch (const YAML::Exception &e)
  {
    throw invalid_argument_error(std::string("config is not valid YAML: ") + e.what());
  }
  if (!root || root.IsNull())
    throw invalid_argument_error("config is empty");

  loaded_config cfg;
  try
  {
    check_keys(root, "config",
               {"seed", "trials", "threads", "mobile", "mobile_id", "start_time", "packet_loss", "z_convention",
                "towers", "hex", "timing", "sweep"});
    auto &sc = cfg.scenario;
    sc.seed = get_or<std::uint64_t>(root, "seed", 0);
    sc.trials = get_or<int>(root, "trials", 1);
    cfg.threads = get_or<unsigned>(root, "threads", 1);
    sc.mobile_id = get_or<int>(root, "mobile_id", 0);
    sc.start_time = get_or<double>(root, "start_time", 0.0);
    sc.packet_loss = get_or<double>(root, "packet_loss", 0.0);
    sc.convention = parse_z_convention(get_or<std::string>(root, "z_convention", "nonnegative"));
    if (!root["mobile"])
      throw invalid_argument_error("config needs a 'mobile' position");
    sc.mobile = as_point(root["mobile"], "mobile");

    const bool has_towers = static_cast<bool>(root["towers"]);
    const bool has_hex = static_cast<bool>(root["hex"]);
    if (has_towers == has_hex)
      throw invalid_argument_error("config needs exactly one of 'towers' or 'hex'");
    if (has_towers)
    {
      const auto list = root["towers"];
      if (!list.IsSequence())
        throw invalid_argument_error("'towers' must be a list");
      for (const auto &t : list)
      {
        check_keys(t, "tower entry", {"id", "position"});
        if (!t["id"] || !t["position"])
          throw invalid_argument_error("each tower needs 'id' and 'position'");
        sc.towers.push_back({t["id"].as<int>(), as_point(t["position"], "tower position")});
      }
    }
    else
    {
      const auto hex = root["hex"];
      check_keys(hex, "hex", {"center", "radius", "rings"});
      const point3 center = hex["center"] ? as_point(hex["center"], "hex center") : point3{};
      if (!hex["radius"])
        throw invalid_argument_error("hex needs a 'radius'");
      sc.towers = hex_cell_layout(center, hex["radius"].as<double>(), get_or<int>(hex, "rings", 1));
    }

    if (const auto timing = root["timing"])
    {
      check_keys(timing, "timing", {"c", "alpha", "mode", "clock_resolution", "tower_processing_delay"});
      sc.timing.c = get_or<double>(timing, "c", speed_of_light);
      sc.timing.mode = parse_ranging_mode(get_or<std::string>(timing, "mode", "round_trip"));
      sc.timing.clock_resolution = get_or<double>(timing, "clock_resolution", 0.0);
      sc.tower_processing_delay = get_or<double>(timing, "tower_processing_delay", 0.0);
      sc.timing.alpha = get_or<double>(timing, "alpha", sc.tower_processing_delay);
    }

    cfg.sampler.center = sc.mobile;
    if (const auto sweep = root["sweep"])
    {
      check_keys(sweep, "sweep", {"center", "radius", "z_min", "z_max"});
      if (sweep["center"])
        cfg.sampler.center = as_point(sweep["center"], "sweep center");
      cfg.sampler.horizontal_radius = get_or<double>(sweep, "radius", 0.0);
      cfg.sampler.z_min = get_or<double>(sweep, "z_min", 0.0);
      cfg.sampler.z_max = get_or<double>(sweep, "z_max", 0.0);
      if (!(cfg.sampler.horizontal_radius >= 0.0) || cfg.sampler.z_max < cfg.sampler.z_min)
        throw invalid_argument_error("sweep needs radius >= 0 and z_min <= z_max");
    }
  }
  catch (const YAML::Exception &e)
  {
    throw invalid_argument_error(std::string("bad config value: ") + e.what());
  }

  cfg.scenario.validate();
  if (cfg.threads < 1)
    throw invalid_argument_error("threads must be at least 1");
  cfg.canonical = canonical_config(cfg);
  cfg.digest = sha256_hex(cfg.canonical);
  return cfg;
}

std::string canonical_config(const loaded_config &cfg)
{
  const auto &sc = cfg.scenario;
  std::string out;
  auto put = [&out](std::string_view key, const std::string &value) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  };
  auto point = [](point3 p) { return fmt17(p.x) + ',' + fmt17(p.y) + ',' + fmt17(p.z); };
  put("seed", std::to_string(sc.seed));
  put("trials", std::to_string(sc.trials));
  put("mobile", point(sc.mobile));
  put("mobile_id", std::to_string(sc.mobile_id));
  put("start_time", fmt17(sc.start_time));
  put("packet_loss", fmt17(sc.packet_loss));
  put("z_convention", std::string(to_string(sc.convention)));
  put("timing.c", fmt17(sc.timing.c));
  put("timing.alpha", fmt17(sc.timing.alpha));
  put("timing.mode", std::string(to_string(sc.timing.mode)));
  put("timing.clock_resolution", fmt17(sc.timing.clock_resolution));
  put("timing.tower_processing_delay", fmt17(sc.tower_processing_delay));
  put("sweep.center", point(cfg.sampler.center));
  put("sweep.radius", fmt17(cfg.sampler.horizontal_radius));
  put("sweep.z_min", fmt17(cfg.sampler.z_min));
  put("sweep.z_max", fmt17(cfg.sampler.z_max));
  for (const auto &t : sc.towers)
    put("tower." + std::to_string(t.id), point(t.position));
  return out;
}

std::string sha256_hex(std::string_view data)
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw error("SHA-256 computation failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i)
  {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string run_manifest::to_json() const
{
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_digest"] = config_digest;
  j["seed"] = seed;
  j["tool_version"] = tool_version;
  j["outputs"] = outputs;
  return j.dump(2) + '\n';
}

void write_outputs(const fs::path &dir, const std::vector<std::pair<std::string, std::string>> &files)
{
  fs::create_directories(dir);
  std::vector<fs::path> staged;
  try
  {
    for (const auto &[name, content] : files)
    {
      const fs::path tmp = dir / (name + ".partial");
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      staged.push_back(tmp);
      f << content;
      f.close();
      if (!f)
        throw error("failed writing " + tmp.string());
    }
  }
  catch (...)
  {
    std::error_code ignored;
    for (const auto &p : staged)
      fs::remove(p, ignored);
    throw;
  }
  for (std::size_t i = 0; i < files.size(); ++i)
    fs::rename(staged[i], dir / files[i].first);
}

std::string format_sci(double value, int digits)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", std::max(digits - 1, 0), value);
  std::string s = buf;
  const auto e = s.find('e');
  std::string mantissa = s.substr(0, e);
  const int exponent = std::stoi(s.substr(e + 1));
  if (mantissa.find('.') != std::string::npos)
  {
    while (mantissa.back() == '0')
      mantissa.pop_back();
    if (mantissa.back() == '.')
      mantissa.pop_back();
  }
  return mantissa + 'e' + std::to_string(exponent);
}

int cmd_simulate(const fs::path &config_path, const fs::path &out_dir, std::ostream &out, std::ostream &err)
{
  return guarded("simulate", err, [&] {
    const loaded_config cfg = parse_config(read_file(config_path));
    const scenario_result result = run_scenario(cfg.scenario);

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("trace.tsv", format_trace(result.events));
    files.emplace_back("measurements.csv", format_measurements(result.measurements, cfg.scenario.mobile));

    std::vector<tower_site> used;
    for (std::size_t i = 0; i < 3; ++i)
      used.push_back(result.measurements[i].tower);
    std::string report = fix_report(result.fix, used);
    report += "truth " + fixed(cfg.scenario.mobile.x, 6) + ' ' + fixed(cfg.scenario.mobile.y, 6) + ' ' +
              fixed(cfg.scenario.mobile.z, 6) + '\n';
    report += "position_error_m " + fixed(distance(result.fix.position, cfg.scenario.mobile), 9) + '\n';

    if (cfg.scenario.trials > 1)
    {
      const auto trials = run_trials(cfg.scenario, cfg.sampler, cfg.threads);
      std::string csv = "trial,true_x,true_y,true_z,est_x,est_y,est_z,error_m,status\n";
      for (const auto &t : trials)
      {
        csv += std::to_string(t.trial) + ',' + fixed(t.truth.x, 6) + ',' + fixed(t.truth.y, 6) + ',' +
               fixed(t.truth.z, 6) + ',';
        if (t.fix)
          csv += fixed(t.fix->position.x, 6) + ',' + fixed(t.fix->position.y, 6) + ',' +
                 fixed(t.fix->position.z, 6) + ',' + fixed(t.position_error, 9) + ",ok\n";
        else
          csv += ",,,,failed\n";
      }
      files.emplace_back("sweep.csv", csv);
      report += "sweep_trials " + std::to_string(trials.size()) + '\n';
      report += "sweep_mean_error_m " + fixed(mean_position_error(trials), 9) + '\n';
    }
    files.emplace_back("fix.txt", report);

    auto manifest = make_manifest("simulate", cfg.digest, cfg.scenario.seed);
    for (const auto &f : files)
      manifest.outputs.push_back(f.first);
    manifest.outputs.push_back("manifest.json");
    files.emplace_back("manifest.json", manifest.to_json());
    write_outputs(out_dir, files);

    out << report;
    return int{exit_ok};
  });
}

int cmd_locate(const fs::path &input, z_convention convention, const std::optional<fs::path> &out_dir,
               std::ostream &out, std::ostream &err)
{
  return guarded("locate", err, [&] {
    const std::string text = read_file(input);
    std::vector<tower_site> towers;
    std::vector<double> ranges;
    std::istringstream lines(text);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line))
    {
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      std::istringstream fields(line);
      tower_site t;
      double r = 0.0;
      if (!(fields >> t.id))
      {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
          continue;
        throw invalid_argument_error("line " + std::to_string(line_no) + ": expected 'tower_id x y z range'");
      }
      std::string extra;
      if (!(fields >> t.position.x >> t.position.y >> t.position.z >> r) || (fields >> extra))
        throw invalid_argument_error("line " + std::to_string(line_no) + ": expected 'tower_id x y z range'");
      towers.push_back(t);
      ranges.push_back(r);
    }
    if (towers.size() < 3)
      throw invalid_argument_error("need at least 3 tower rows, got " + std::to_string(towers.size()));
    validate_towers(towers);

    const location_fix fix = locate(towers, ranges, {convention, 0.0});
    const std::string report = fix_report(fix, towers);
    if (out_dir)
    {
      auto manifest = make_manifest("locate", sha256_hex(text + "\nz_convention=" + std::string(to_string(convention))), 0);
      manifest.outputs = {"fix.txt", "manifest.json"};
      write_outputs(*out_dir, {{"fix.txt", report}, {"manifest.json", manifest.to_json()}});
    }
    out << report;
    return int{exit_ok};
  });
}

int cmd_analyze_log(const fs::path &log_path, std::optional<double> baseline, const std::optional<fs::path> &reference,
                    const fs::path &out_dir, std::ostream &out, std::ostream &err)
{
  return guarded("analyze-log", err, [&] {
    const std::string text = read_file(log_path);
    std::vector<double> published;
    std::string reference_text;
    if (reference)
    {
      reference_text = read_file(*reference);
      published = parse_reference_table(reference_text);
    }
    if (baseline && !(*baseline >= 0.0))
      throw invalid_argument_error("baseline must be non-negative");

    const ping_log log = parse_ping_log(text);
    for (const auto &w : log.warnings)
      err << "warning: line " << w.line << ": " << w.reason << ": " << w.text << '\n';
    const auto samples = pair_rtts(log.records);
    const rtt_summary stats = rtt_stats(samples); // throws empty_data_error -> exit 4
    const auto rows = compare_with_reference(samples, published);

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("rtt.csv", format_rtt_csv(samples));
    files.emplace_back("stats.txt", format_summary(stats));
    files.emplace_back("discrepancies.tsv", format_discrepancy_report(rows));
    if (baseline)
    {
      std::string csv = "request_seq,propagation_s,negative\n";
      for (const auto &p : subtract_baseline(samples, *baseline))
        csv += std::to_string(p.request_seq) + ',' + format_sci(p.seconds, 6) + ',' +
               (p.negative ? "true" : "false") + '\n';
      files.emplace_back("propagation.csv", csv);
    }

    std::string digest_input = text;
    digest_input += "\nbaseline=" + (baseline ? fmt17(*baseline) : std::string("none"));
    digest_input += "\nreference=" + reference_text;
    auto manifest = make_manifest("analyze-log", sha256_hex(digest_input), 0);
    for (const auto &f : files)
      manifest.outputs.push_back(f.first);
    manifest.outputs.push_back("manifest.json");
    files.emplace_back("manifest.json", manifest.to_json());
    write_outputs(out_dir, files);

    out << format_summary(stats);
    std::size_t anomalies = count_status(rows, row_status::anomaly);
    out << "anomalies\t" << anomalies << '\n';
    if (reference)
      out << "matched\t" << count_status(rows, row_status::match) << '/' << rows.size() << '\n';
    return int{exit_ok};
  });
}

int cmd_feasibility(double range, double clock, double c, const std::optional<fs::path> &out_dir, std::ostream &out,
                    std::ostream &err)
{
  return guarded("feasibility", err, [&] {
    const feasibility_report r = required_precision(range, c, clock);
    std::string report = "range " + shortest(r.range) + " m, clock " + format_sci(r.available_precision, 6) +
                         " s\n";
    report += "required " + format_sci(r.required_precision) + " s, " + (r.feasible ? "feasible" : "NOT feasible") +
              '\n';
    if (out_dir)
    {
      const std::string args = "range=" + fmt17(range) + "\nclock=" + fmt17(clock) + "\nc=" + fmt17(c) + '\n';
      auto manifest = make_manifest("feasibility", sha256_hex(args), 0);
      manifest.outputs = {"feasibility.txt", "manifest.json"};
      write_outputs(*out_dir, {{"feasibility.txt", report}, {"manifest.json", manifest.to_json()}});
    }
    out << report;
    return r.feasible ? int{exit_ok} : int{exit_infeasible};
  });
}

} // namespace gsmloc::app
