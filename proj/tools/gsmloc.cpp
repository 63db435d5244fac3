// gsmloc: time-of-flight localization simulator and ping-trace analyzer.
//
// Exit codes: 0 ok, 1 infeasible (feasibility), 2 invalid input,
// 3 degenerate geometry, 4 no usable data, 5 output I/O failure.

#include "gsmloc/app.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
  namespace app = gsmloc::app;

  CLI::App cli{"GSM-style time-of-flight localization toolkit"};
  cli.set_version_flag("--version", std::string(app::tool_version));
  cli.require_subcommand(1);

  std::string config_path, input_path, log_path, out_dir, reference, z_text = "nonnegative";
  std::optional<std::string> opt_out_dir;
  std::optional<double> baseline;
  double range = 0.0, clock = 0.0, c = gsmloc::speed_of_light;

  auto *simulate = cli.add_subcommand("simulate", "run the ranging protocol for a scenario file");
  simulate->add_option("config", config_path, "scenario YAML")->required();
  simulate->add_option("-o,--out-dir", out_dir, "directory for trace, measurements, fix and manifest")->required();

  auto *locate = cli.add_subcommand("locate", "solve a position from tower/range rows");
  locate->add_option("input", input_path, "rows of: tower_id x y z range_m")->required();
  locate->add_option("-z,--z-convention", z_text, "root choice for three towers")
      ->check(CLI::IsMember({"nonnegative", "nonpositive"}));
  locate->add_option("-o,--out-dir", opt_out_dir, "also write fix.txt and manifest.json here");

  auto *analyze = cli.add_subcommand("analyze-log", "pair ping requests/replies and summarize RTTs");
  analyze->add_option("log", log_path, "sniffer text log")->required();
  analyze->add_option("-o,--out-dir", out_dir, "directory for rtt.csv, stats.txt, discrepancies.tsv")->required();
  analyze->add_option("-b,--baseline", baseline, "kernel delay in seconds to subtract");
  analyze->add_option("-r,--reference", reference, "published intervals (ms), one per line");

  auto *feasibility = cli.add_subcommand("feasibility", "clock precision needed for a ranging distance");
  feasibility->add_option("--range", range, "maximum range in meters")->required();
  feasibility->add_option("--clock", clock, "available timestamp resolution in seconds")->required();
  feasibility->add_option("--c", c, "propagation speed in m/s");
  feasibility->add_option("-o,--out-dir", opt_out_dir, "also write feasibility.txt and manifest.json here");

  try
  {
    cli.parse(argc, argv);
  }
  catch (const CLI::Success &e)
  {
    return cli.exit(e);
  }
  catch (const CLI::ParseError &e)
  {
    cli.exit(e);
    return app::exit_invalid_input;
  }

  const auto maybe_dir = [&]() -> std::optional<std::filesystem::path> {
    if (opt_out_dir)
      return std::filesystem::path(*opt_out_dir);
    return std::nullopt;
  };

  if (*simulate)
    return app::cmd_simulate(config_path, out_dir, std::cout, std::cerr);
  if (*locate)
    return app::cmd_locate(input_path, gsmloc::parse_z_convention(z_text), maybe_dir(), std::cout, std::cerr);
  if (*analyze)
  {
    std::optional<std::filesystem::path> ref;
    if (!reference.empty())
      ref = reference;
    return app::cmd_analyze_log(log_path, baseline, ref, out_dir, std::cout, std::cerr);
  }
  return app::cmd_feasibility(range, clock, c, maybe_dir(), std::cout, std::cerr);
}
