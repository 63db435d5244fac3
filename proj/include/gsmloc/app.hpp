#pragma once

#include "gsmloc/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gsmloc::app
{

inline constexpr std::string_view tool_version = "0.1.0";

// Process exit codes shared by every command.
enum exit_code : int
{
  exit_ok = 0,
  exit_infeasible = 1,
  exit_invalid_input = 2,
  exit_degenerate = 3,
  exit_no_data = 4,
  exit_io_failure = 5,
};

// A scenario file after parsing. `canonical` is a fixed-order rendering of
// every resolved setting; the digest is taken over it, so reformatting or
// comments do not change the digest but any value change does.
struct loaded_config
{
  scenario_config scenario;
  mobile_sampler sampler; // used when scenario.trials > 1
  unsigned threads = 1;
  std::string canonical;
  std::string digest;
};

// YAML scenario text. Throws invalid_argument_error with a readable message.
loaded_config parse_config(std::string_view text);
std::string canonical_config(const loaded_config &cfg);

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

struct run_manifest
{
  std::string command;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string tool_version{app::tool_version};
  std::vector<std::string> outputs; // file names relative to the output directory

  [[nodiscard]] std::string to_json() const;
};

// Writes every (name, content) pair into dir, or nothing at all.
// Throws std::filesystem::filesystem_error / gsmloc::error on failure.
void write_outputs(const std::filesystem::path &dir, const std::vector<std::pair<std::string, std::string>> &files);

// "5.833e-7" style: `digits` significant digits, trailing zeros dropped,
// exponent without padding.
std::string format_sci(double value, int digits = 4);

int cmd_simulate(const std::filesystem::path &config_path, const std::filesystem::path &out_dir, std::ostream &out,
                 std::ostream &err);

// Input rows: tower_id x y z range_m, '#' starts a comment.
int cmd_locate(const std::filesystem::path &input, z_convention convention,
               const std::optional<std::filesystem::path> &out_dir, std::ostream &out, std::ostream &err);

int cmd_analyze_log(const std::filesystem::path &log_path, std::optional<double> baseline,
                    const std::optional<std::filesystem::path> &reference, const std::filesystem::path &out_dir,
                    std::ostream &out, std::ostream &err);

int cmd_feasibility(double range, double clock, double c, const std::optional<std::filesystem::path> &out_dir,
                    std::ostream &out, std::ostream &err);

} // namespace gsmloc::app
